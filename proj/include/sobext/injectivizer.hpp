#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sobext/geodesic.hpp"
#include "sobext/plgeom.hpp"

namespace sobext {

// x/(2A) on [0,A], (f+1)/2 after; f*(0) = 0. Normalized domain and range [0,1].
double f_star(double x, double flat, double fx);

// nondecreasing PL function on [0,1] onto [0,1], zero exactly on [0, flat()]
struct MonotoneReparam {
    std::vector<double> x, f;

    static MonotoneReparam from_samples(std::vector<double> x, std::vector<double> f);
    double flat() const;
    double operator()(double s) const;
    double star(double s) const;  // strictly increasing replacement
    // decreasing counterpart: mirror x -> 1 - x
    double star_mirrored(double s) const { return star(1 - s); }
};

// P and V_P = P + (epsilon D / 3) * inner bisector
struct NormalSegment {
    std::size_t index = 0;
    Point2 vertex, tip;
    double epsilon = 0, D = 0;
    double length() const { return dist(vertex, tip); }
};

std::vector<NormalSegment> normal_segments(const JordanPolygon& poly, double epsilon);

// curves s -> PL path between two boundary points of a closed region
struct CurveFamily {
    std::function<PolyLine(double)> curve;
    double lo = 0, hi = 1;
};

struct VertexPlan {
    NormalSegment seg;
    double anchor = 0;    // curve ending at P, or the family end whose curve runs along P
    double flat_end = 0;  // last curve through P
    double reach = 0;     // curve through V_P (or the family end)
    bool active = false;
};

struct ModifyOptions {
    double epsilon = 0.1;  // global delta_0
    int scan = 512;        // parameter samples across the family
};

// Moves each crossing X_s of PV_P to |X_s* - P| = f*(s) |PV_P|
class ModifiedFamily {
public:
    // anchors[i]: parameter whose curve starts the flat run at polygon vertex i (none: untouched)
    ModifiedFamily(CurveFamily family, JordanPolygon region, const std::vector<std::optional<double>>& anchors,
                   const ModifyOptions& opt = {});

    PolyLine operator()(double s) const;
    PolyLine original(double s) const { return family_.curve(s); }
    CurveFamily modified() const;
    const CurveFamily& family() const { return family_; }
    const JordanPolygon& region() const { return region_; }
    const std::vector<VertexPlan>& plans() const { return plans_; }
    // |X_s* - P| for plan i, or -1 when s is outside its range
    double offset(std::size_t plan, double s) const;

private:
    CurveFamily family_;
    JordanPolygon region_;
    std::vector<VertexPlan> plans_;
};

// leaves of the shortest-curve extension, anchored at the leaf ending at each vertex
ModifiedFamily modify_curves(const ShortestCurveExtension& ext, const ModifyOptions& opt = {});

struct Violation {
    std::string type;  // "boundary" or "crossing"
    std::vector<double> s_values;
    Point2 location;
    nlohmann::json to_json() const;
};

struct InjectivityReport {
    int curves = 0, pairs = 0;
    std::vector<Violation> violations;
    bool clean() const { return violations.empty(); }
    nlohmann::json to_json() const;
};

// curves touch the boundary only at their ends, and sampled pairs are disjoint
InjectivityReport verify_injective(const CurveFamily& family, const JordanPolygon& region, int pairs = 200,
                                   std::uint64_t seed = 42, int max_violations = 16);

// epsilon_P(t) * D(t): delta0 * gate * (0.9 x sampled minimum of D) on every life interval
struct Schedule {
    std::vector<double> t, value;
    double operator()(double s) const;
};

double lower_bound_D(const std::function<double(double)>& D, double t0, double t1, int resolution_exp = 7);

Schedule vertex_schedule(const std::vector<std::pair<double, double>>& alive,
                         const std::function<double(double)>& D, double delta0, double ramp);

// PL slice map on a triangulated square
struct PLMap2 {
    std::vector<Point2> domain, image;
    std::vector<std::array<int, 3>> triangles;
};

PLMap2 square_mesh(int n);
PLMap2 sample_slice(const std::function<Point2(Point2)>& h, int n);

struct BlendReport {
    bool ok = true;
    int facet = -1;
    double min_det = 0;
    double tau = 0;
};

// facetwise Jacobians of (1 - tau) a + tau b over tau in [0, 1]
BlendReport blend_check(const PLMap2& a, const PLMap2& b);
// throws geometry_error (facet, minimum determinant) when the blend folds
PLMap2 blend_levels(const PLMap2& a, const PLMap2& b, double tau);
// (lo, hi] -> ((lo + hi)/2, hi]
double rescale_interval(double t, double lo, double hi);
// largest tk - 2^-m (m = 1..max_m) whose slice blends with the slice at tk
double select_tk_star(const std::function<PLMap2(double)>& slice, double tk, int max_m = 12);

}  // namespace sobext
