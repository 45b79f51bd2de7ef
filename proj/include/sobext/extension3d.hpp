#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sobext/boundary_maps.hpp"
#include "sobext/geodesic.hpp"
#include "sobext/homotopy.hpp"
#include "sobext/linearizer.hpp"
#include "sobext/plgeom.hpp"

namespace sobext {

// Q~_{k,j} x [2^-k, 2^-(k-1)]
struct CubeCell {
    int k = 1, j = 0;
    int ix = 0, iy = 0;
    Point2 lower_left;
    double side = 0.5;
    double top = 1, mid = 0.75, bot = 0.5;

    static CubeCell make(int k, int j);
    Point2 to_unit(double x, double y) const { return {(x - lower_left.x) / side, (y - lower_left.y) / side}; }
};

// arm of a cross parametrized from the centre (u = 0) to its side midpoint (u = 1)
struct ArmParam {
    std::vector<double> u;
    PolyLine pts;
    Point2 at(double s) const;
};

using CrossParam = std::array<ArmParam, 4>;

// arms 0..3 end at the midpoints of the left, top, right and bottom sides
Point2 arm_end(int arm);
Cross to_cross(const CrossParam& c);
CrossParam lerp_cross(const CrossParam& a, const CrossParam& b, double lambda);
SquareBoundaryMap lerp_boundary(const SquareBoundaryMap& a, const SquareBoundaryMap& b, double lambda);

// cell construction failure, tagged with the cell
struct cell_error : geometry_error {
    int k, j;
    cell_error(int k_, int j_, const std::string& what);
};

struct CylCell {
    CubeCell cell;
    std::vector<Point2> top_curve;                  // Gamma_{k,j}
    std::vector<Point2> bottom_curve;               // outer curve of the four children
    std::array<std::vector<Point2>, 4> children;    // Gamma_{k+1,j'} (lower-left, lower-right, upper-right, upper-left)
    std::array<int, 4> child_index{};
    SquareBoundaryMap phi_top, phi_mid;
    std::array<SquareBoundaryMap, 4> child_params;
    CrossParam t_mid, t_mid_star, t_bot;
    std::optional<CrossParam> t_fix;
    std::string lower_route;  // "direct" or "t-fix"
};

// Slice maps of one cell: shortest-curve extensions of the linear boundary homotopy
// on [mid, top], per-child extensions around a moving cross on [bot, mid).
class CellSlices {
public:
    CellSlices(int k, int j, const PLGrid& level, const PLGrid& next, int arm_samples = 32);

    const CylCell& data() const { return *data_; }
    const CubeCell& cell() const { return data_->cell; }

    // boundary values phi_t (phi_mid for t <= mid)
    SquareBoundaryMap boundary(double t) const;
    // cross T_t for t in [bot, mid]
    CrossParam cross(double t) const;
    // h_t on the unit square of the cell
    Point2 map(Point2 uv, double t) const;
    // boundary values of child c for t in [bot, mid)
    SquareBoundaryMap child_boundary(int c, double t) const;

    void clear_cache() const;

private:
    struct Slice {
        std::shared_ptr<ShortestCurveExtension> whole;
        std::array<std::shared_ptr<ShortestCurveExtension>, 4> child;
    };
    std::shared_ptr<const Slice> slice(double t) const;
    SquareBoundaryMap child_map(int c, const CrossParam& x) const;

    std::shared_ptr<CylCell> data_;
    struct Cache {
        std::mutex mu;
        std::map<double, std::shared_ptr<const Slice>> slices;
    };
    std::shared_ptr<Cache> cache_;
};

struct ExtensionOptions {
    int levels = 4;  // K
    double p = 2;    // exponent of the good-grid selection
    int grid_candidates = 4;
    KeyQuadrature key_rule{16, 16};
    LinearizerOptions linearizer;
    int arm_samples = 32;
};

class ExtensionField {
public:
    ExtensionField(MapPtr phi, const ExtensionOptions& opt = {});
    // pl_grids: levels 1..K+1
    ExtensionField(MapPtr phi, std::vector<PLGrid> pl_grids, const ExtensionOptions& opt = {});

    int levels() const { return levels_; }
    double min_t() const { return std::ldexp(1.0, -levels_); }
    MapPtr map() const { return phi_; }
    const std::vector<PLGrid>& pl_grids() const { return grids_; }
    const CellSlices& cell(int k, int j) const;
    int cell_count(int k) const { return 1 << (2 * k); }
    // cell containing (x, y) at level k
    int locate(int k, double x, double y) const;
    int level_of(double t) const;

    // (h_t(x, y), t); throws std::out_of_range below the built depth
    Point3 eval(double x, double y, double t) const;
    // evaluation through a given cell (t within its height)
    Point3 eval_cell(int k, int j, double x, double y, double t) const;

    nlohmann::json config() const;

private:
    void build(const ExtensionOptions& opt);

    MapPtr phi_;
    int levels_ = 0;
    std::vector<PLGrid> grids_;
    std::vector<std::vector<std::shared_ptr<CellSlices>>> cells_;  // cells_[k-1][j]
    ExtensionOptions opt_;
};

struct CellEnergy {
    int k = 0, j = 0;
    double energy = 0;
    double max_norm = 0;
};

struct ExtensionEnergy {
    double q = 0;
    int resolution = 0;
    std::vector<CellEnergy> cells;
    std::vector<double> per_level;
    double total = 0, volume = 0;

    nlohmann::json to_json() const;
};

// midpoint rule over every built cell of the central-difference operator norm of Dh
ExtensionEnergy energy_estimate(const ExtensionField& h, double q, int resolution = 8);

// largest singular value of a 3x3 matrix
double operator_norm3(const std::array<std::array<double, 3>, 3>& m);

struct GoalReport {
    int k = 0, j = 0;
    double lipschitz = 0;
    double own = 0;             // 2^k (|Gamma| + sum of the children lengths)
    double with_neighbors = 0;  // own plus the same over edge-adjacent cells
    double ratio = 0;           // lipschitz / with_neighbors
    double ratio_own = 0;       // lipschitz / own

    nlohmann::json to_json() const;
};

// Lipschitz constant over neighbouring points of a (resolution + 1)^3 lattice of the cell
GoalReport goal_check(const ExtensionField& h, int k, int j, int resolution = 8);

struct SliceInjectivity {
    int slices = 0, points = 0;
    int collisions = 0;
    double min_separation = 0;
    double worst_t = 0;
};

// n^2 lattice points per slice, `slices` heights from bot to top; collisions within tol
SliceInjectivity slice_injectivity(const ExtensionField& h, int k, int j, int n = 33, int slices = 17,
                                   double tol = 1e-12);

// wireframe of slice boundaries (and crosses below mid) at `per_cell` heights of every cell
std::string export_obj(const ExtensionField& h, int per_cell = 5);
// {resolution, points: [[x, y, t, hx, hy] ...]} at the tops and middles of every level
nlohmann::json sample_json(const ExtensionField& h, int resolution);

}  // namespace sobext
