#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>

#include "sobext/plgeom.hpp"

namespace sobext {

// Triangulated simple polygon answering repeated shortest-path queries.
class GeodesicDomain {
public:
    explicit GeodesicDomain(JordanPolygon poly, double snap_tol = -1);

    const JordanPolygon& polygon() const { return poly_; }
    const std::vector<Triangle>& triangles() const { return tris_; }

    // Euclidean shortest path in the closed polygon (funnel over the dual tree).
    PolyLine path(Point2 a, Point2 b) const;

private:
    std::vector<int> locate(Point2 p) const;

    JordanPolygon poly_;
    std::vector<Triangle> tris_;
    std::vector<std::array<int, 3>> nbr_;  // neighbour across edge (i, i+1)
    double snap_tol_;
};

PolyLine shortest_path(const JordanPolygon& poly, Point2 a, Point2 b);

// Visibility graph + Dijkstra; test oracle.
PolyLine shortest_path_oracle(const JordanPolygon& poly, Point2 a, Point2 b);

// drop duplicates and straight-through middle vertices (exact predicate)
PolyLine simplify_path(const PolyLine& pl);

// any interior crossing between the two chains
bool polylines_interior_cross(const PolyLine& p, const PolyLine& q);

// Star-shaped random simple polygon with n vertices around the origin.
JordanPolygon random_star_polygon(std::mt19937_64& rng, int n, double rmin = 0.3, double rmax = 1.0);

// Comb with `teeth` upward teeth over a base bar.
JordanPolygon comb_polygon(int teeth, double tooth_w = 0.1, double gap_w = 0.1, double height = 1.0,
                           double base = 0.2);

// Perimeter parameter on the boundary of [0,1]^2: 0 at (0,0), counterclockwise, period 4.
double square_theta(Point2 uv);
Point2 square_point(double theta);

// PL homeomorphism of the unit-square boundary onto a Jordan polygon.
struct SquareBoundaryMap {
    std::vector<double> knots;  // increasing in [0,4), knots[0] == 0
    std::vector<Point2> images;

    Point2 at_theta(double theta) const;
    Point2 operator()(Point2 uv) const { return at_theta(square_theta(uv)); }
    std::vector<Point2> ring() const;

    static SquareBoundaryMap from_function(const std::function<Point2(Point2)>& f, int per_side);
    // ring vertices between consecutive marks are spread at constant speed;
    // marks are (ring index, theta) pairs with increasing theta, first theta 0
    static SquareBoundaryMap from_marked(const std::vector<Point2>& ring,
                                         const std::vector<std::pair<int, double>>& marks);
};

// Pull the vertices that pinch a near-degenerate ring inward by eps.
std::vector<Point2> inflate_pinches(const std::vector<Point2>& ring, double eps);

// Shortest-curve extension on the unit square: the diagonal w - u = s maps at
// constant speed onto the geodesic between the images of its two ends.
class ShortestCurveExtension {
public:
    explicit ShortestCurveExtension(SquareBoundaryMap phi);

    Point2 operator()(Point2 uv) const;
    // diamond model |x| + |y| <= 1, horizontal foliation
    Point2 diamond(Point2 z) const;

    // geodesic for the leaf w - u = s, s in [-1,1]
    PolyLine leaf(double s) const;
    static std::pair<Point2, Point2> leaf_ends(double s);

    const SquareBoundaryMap& boundary() const { return phi_; }
    const GeodesicDomain& domain() const { return *dom_; }

private:
    SquareBoundaryMap phi_;
    std::shared_ptr<GeodesicDomain> dom_;
    struct Cache {
        std::mutex mu;
        std::map<long, PolyLine> leaves;
    };
    std::shared_ptr<Cache> cache_;
};

inline Point2 diamond_to_square(Point2 z) { return {(z.x - z.y + 1) / 2, (z.x + z.y + 1) / 2}; }
inline Point2 square_to_diamond(Point2 uv) { return {uv.x + uv.y - 1, uv.y - uv.x}; }

struct SampleRegion {
    Point2 lo, hi;
    std::function<bool(Point2)> inside;  // optional extra membership test
    bool contains(Point2 p) const;
};

// max |f(x)-f(y)|/|x-y| over n pairs at dyadic scales 2^-1 .. 2^-10
double lipschitz_estimate(const std::function<Point2(Point2)>& f, const SampleRegion& region, int n,
                          std::uint64_t seed = 42);

// max |H_t1(z) - H_t2(z)| / |t1 - t2| over sampled t-pairs and points
double family_time_lipschitz(const std::function<Point2(double, Point2)>& family,
                             const SampleRegion& region, int n_t, int n_z, std::uint64_t seed = 42);

}  // namespace sobext
