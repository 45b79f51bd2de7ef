#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sobext {

struct geometry_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Point2 {
    double x = 0, y = 0;
    Point2() = default;
    Point2(double x_, double y_) : x(x_), y(y_) {}
    Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    Point2 operator/(double s) const { return {x / s, y / s}; }
    bool operator==(const Point2& o) const { return x == o.x && y == o.y; }
    bool operator!=(const Point2& o) const { return !(*this == o); }
};

inline Point2 operator*(double s, const Point2& p) { return p * s; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }
inline Point2 lerp(Point2 a, Point2 b, double t) { return a + (b - a) * t; }

struct Point3 {
    double x = 0, y = 0, z = 0;
};

using PolyLine = std::vector<Point2>;

// counterclockwise, implicitly closed
struct JordanPolygon {
    std::vector<Point2> vertices;
    std::size_t size() const { return vertices.size(); }
    const Point2& operator[](std::size_t i) const { return vertices[i]; }
    const Point2& at_wrap(long i) const {
        long n = static_cast<long>(vertices.size());
        return vertices[static_cast<std::size_t>(((i % n) + n) % n)];
    }
};

struct ParamCurve {
    PolyLine polyline;
    double lo = 0, hi = 1;
};

// exact sign of (b-a)x(c-a)
int orient2d(Point2 a, Point2 b, Point2 c);

enum class SegRelation { disjoint, endpoint_touch, interior_cross, overlap };

struct SegIntersection {
    SegRelation kind = SegRelation::disjoint;
    Point2 point;  // valid for touch / cross
};

// endpoint_touch covers any single shared point that is an endpoint of either segment
SegIntersection segments_intersect(Point2 a0, Point2 a1, Point2 b0, Point2 b1);

// closed segment contains p
bool on_segment(Point2 p, Point2 a, Point2 b);

double signed_area(const std::vector<Point2>& pts);
double polygon_area(const JordanPolygon& poly);
double polyline_length(const PolyLine& pl);
bool is_simple(const std::vector<Point2>& ring);
bool polyline_is_simple(const PolyLine& pl);

// -1 outside, 0 on boundary, 1 inside
int point_in_polygon(const JordanPolygon& poly, Point2 p);

// build a CCW Jordan polygon from a ring; reverses if clockwise, checks simplicity
JordanPolygon make_polygon(std::vector<Point2> ring, bool check = true);

// drop consecutive duplicates and (near) collinear middle vertices; `keep` flags survive
std::vector<Point2> normalize_collinear(const std::vector<Point2>& ring, bool closed,
                                       const std::vector<bool>* keep = nullptr,
                                       double tol = 1e-12);

using Triangle = std::array<int, 3>;

std::vector<Triangle> triangulate(const JordanPolygon& poly);

Point2 eval_constant_speed(const ParamCurve& c, double t);
// point at arc-length fraction u in [0,1]
Point2 eval_fraction(const PolyLine& pl, double u);
// sub-polyline between arc fractions u0 <= u1
PolyLine sub_polyline(const PolyLine& pl, double u0, double u1);

double segment_distance(Point2 a0, Point2 a1, Point2 b0, Point2 b1);
double point_segment_distance(Point2 p, Point2 a, Point2 b);

double min_nonadjacent_side_distance(const JordanPolygon& poly);

Point2 inner_normal(const JordanPolygon& poly, std::size_t vertex);
Point2 inner_normal(const JordanPolygon& poly, Point2 vertex);

std::optional<std::size_t> find_vertex(const JordanPolygon& poly, Point2 p);

}  // namespace sobext
