#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sobext/geodesic.hpp"
#include "sobext/injectivizer.hpp"
#include "sobext/plgeom.hpp"

namespace sobext {

// vertex i moves on the segment from[i] -> to[i] as lambda runs over [0,1]
struct MovingChain {
    std::vector<Point2> from, to;
    bool closed = false;
};

struct MotionCertificate {
    bool ok = true;
    double lambda = 0;
    Point2 location;
    std::string what;
};

// No two non-adjacent segments of the chains ever touch. Vertices with identical
// motion (same from and to) are one point and may be shared. With
// allow_initial_contact, contacts at lambda = 0 are ignored.
MotionCertificate certify_linear_motion(const std::vector<MovingChain>& chains, bool allow_initial_contact = false);

// arc-length fraction of every vertex
std::vector<double> arc_fractions(const PolyLine& pl);

// Family t -> gamma_t between two curves from A to B meeting only at A and B:
// for t <= 1/2 follow gamma0 for portion 1 - 2t, then the geodesic to B inside the
// region between the curves; mirrored through gamma1 for t >= 1/2. Vertices of the
// region are nudged along normal segments so distinct curves stay apart.
class HalfFixedCurves {
public:
    // params: value in [0,1] of every vertex (default arc-length fractions)
    HalfFixedCurves(PolyLine gamma0, PolyLine gamma1, double epsilon = 0.1, std::vector<double> params0 = {},
                    std::vector<double> params1 = {});

    PolyLine operator()(double t) const;
    PolyLine raw(double t) const;

    struct Split {
        int curve = 0;          // 0 or 1
        double portion = 1;     // travelled portion of that curve
        std::size_t edge = 0;   // split point lies on edge (edge, edge + 1)
        double u = 0;           // fraction on that edge
        std::size_t index = 0;  // index of the split point in the curve at t
        bool whole = false;     // the whole curve is travelled
    };
    Split split(double t) const;

    bool trivial() const { return trivial_; }
    const JordanPolygon& region() const;
    const ModifiedFamily& modification() const { return *mod_; }
    const PolyLine& gamma(int i) const { return i ? data_->gamma1 : data_->gamma0; }
    const std::vector<double>& params(int i) const { return i ? data_->params1 : data_->params0; }

private:
    struct Data {
        PolyLine gamma0, gamma1;
        std::vector<double> params0, params1;
        JordanPolygon region;
        std::shared_ptr<GeodesicDomain> dom;
        std::vector<int> region_index0, region_index1;  // -1 at A and B
    };
    static PolyLine raw_curve(const Data& d, double t, Split* s);
    Point2 nudged_vertex(int curve, std::size_t i, double t) const;

    std::shared_ptr<Data> data_;
    std::shared_ptr<ModifiedFamily> mod_;
    bool trivial_ = false;
};

// Boundary maps equal outside the arc [theta_a, theta_a + length) joined through HalfFixedCurves
class HalfFixedHomotopy {
public:
    HalfFixedHomotopy(SquareBoundaryMap phi0, SquareBoundaryMap phi1, double theta_a, double theta_b,
                      double epsilon = 0.1);

    SquareBoundaryMap operator()(double t) const;
    const HalfFixedCurves& curves() const { return *curves_; }
    double arc_length() const { return span_; }

private:
    SquareBoundaryMap phi0_;
    double theta_a_, span_;
    std::shared_ptr<HalfFixedCurves> curves_;
};

// sorted (theta, image) pairs into a map with a knot at 0
SquareBoundaryMap boundary_map_from_knots(std::vector<std::pair<double, Point2>> knots);

struct Cross {
    Point2 center;
    std::array<PolyLine, 4> arms;  // arms[i] runs from the center to m_i

    std::array<Point2, 4> ends() const;
    bool simple() const;
    // arms touch the polygon boundary only at their ends and stay inside
    bool clear_of(const JordanPolygon& poly) const;
};

struct OpenedCurve {
    PolyLine base;              // vertices P of Psi, base[0] = Psi(0)
    std::vector<double> times;  // t_P, increasing, times[0] = 0
    std::vector<Point2> normal;  // unit direction of S_P^+; S_P^- is opposite
    double side = 0;             // |S_P^+| = |S_P^-|

    // Q_{t,P} with |Q - P| = side (t - t_P)/(1 - t_P) for t >= t_P
    Point2 split_point(std::size_t vertex, double t, bool plus) const;
    // from Q_{t,base[0]} through the split points of the passed vertices to `tip`
    PolyLine opened(double t, Point2 tip, bool plus) const;
};

// Migrates the centre of a cross to `target` along the arms' half-fixed family.
// alpha1 runs from m_1 to the target, alpha2 from m_2 to the target.
class CrossDeformation {
public:
    CrossDeformation(Cross cross0, PolyLine alpha1, PolyLine alpha2, double epsilon = 0.1, int samples = 64,
                     double side = -1);

    Cross operator()(double t) const;
    Point2 center_path(double t) const;
    const OpenedCurve& opened() const { return opened_; }
    bool constant() const { return constant_; }
    // intermediate crosses simple at `samples` times; returns the first failing t or -1
    double first_failure(int samples = 64) const;

private:
    Cross cross0_;
    std::shared_ptr<HalfFixedCurves> curves_;
    double frac0_ = 0, frac1_ = 0;
    OpenedCurve opened_;
    bool plus_for_third_ = true;
    bool constant_ = false;
};

Cross cross_deform(const Cross& cross0, Point2 target, const PolyLine& alpha1, const PolyLine& alpha2, double t);

// arm vertices within `gap` of the boundary (other than the arm ends) move inward by `gap`,
// halving the gap until the cross is clear of the boundary
Cross nudge_cross(const Cross& cross, const JordanPolygon& poly, double gap);

struct TFixReport {
    Cross cross;
    double depth = 0;
    std::array<int, 4> counts1{}, counts2{};  // crossings of every arm with T1, T2
};

// cross with the same ends whose centre sits near `corner` (a boundary point between
// m_1 and m_2) and whose arms run parallel to the boundary; arms 1,2 at depth d, arms
// 3,4 at depth 2d. Throws geometry_error with the smallest depth tried.
TFixReport build_t_fix(const Cross& t1, const Cross& t2, const JordanPolygon& poly, Point2 corner);
TFixReport build_t_fix(const Cross& t1, const Cross& t2, const JordanPolygon& poly);

// number of contacts of each arm of `a` with the arms of `b`, shared ends excluded
std::array<int, 4> cross_contacts(const Cross& a, const Cross& b);

// Gamma -> Gamma-hat in two halves: corners migrate one by one, then sides deform one by one
class GridLevelHomotopy {
public:
    // both rings counterclockwise; corners are ring indices of the four corresponding vertices
    GridLevelHomotopy(std::vector<Point2> gamma, std::array<int, 4> corners, std::vector<Point2> target,
                      std::array<int, 4> target_corners, double epsilon = 0.1);

    std::vector<Point2> operator()(double t) const;
    // "half-fixed", "linear" or "constant" for each of the eight stages
    std::vector<std::string> stage_kinds() const;

private:
    struct Stage {
        std::vector<Point2> before;  // ring with the moving chain at [lo, hi] (cyclic)
        std::size_t lo = 0, hi = 0;
        std::string kind;
        std::shared_ptr<HalfFixedCurves> curves;
        PolyLine from, to;  // linear stage
    };
    std::vector<Point2> evaluate(const Stage& s, double tau) const;
    std::vector<Stage> stages_;
    std::vector<Point2> initial_, final_;
};

std::vector<Point2> grid_level_homotopy(const std::vector<Point2>& gamma, std::array<int, 4> corners,
                                        const std::vector<Point2>& target, std::array<int, 4> target_corners,
                                        double t);

}  // namespace sobext
