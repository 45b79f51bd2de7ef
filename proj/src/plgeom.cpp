#include "sobext/plgeom.hpp"

#include <algorithm>
#include <limits>

namespace sobext {

namespace {

// error-free transforms (Shewchuk); expansions stored in increasing magnitude
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    double bv = s - a;
    double av = s - bv;
    e = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

void grow_expansion(std::vector<double>& e, double b) {
    double q = b;
    std::vector<double> h;
    h.reserve(e.size() + 1);
    for (double ei : e) {
        double s, err;
        two_sum(q, ei, s, err);
        if (err != 0) h.push_back(err);
        q = s;
    }
    if (q != 0 || h.empty()) h.push_back(q);
    e.swap(h);
}

int orient_exact(Point2 a, Point2 b, Point2 c) {
    const double terms[6][2] = {{a.x, b.y},  {-a.x, c.y}, {-a.y, b.x},
                                {a.y, c.x},  {b.x, c.y},  {-b.y, c.x}};
    std::vector<double> e;
    for (auto& t : terms) {
        double p, err;
        two_product(t[0], t[1], p, err);
        grow_expansion(e, err);
        grow_expansion(e, p);
    }
    for (auto it = e.rbegin(); it != e.rend(); ++it)
        if (*it != 0) return *it > 0 ? 1 : -1;
    return 0;
}

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2;
constexpr double kCcwBound = (3.0 + 16.0 * kEps) * kEps;

}  // namespace

int orient2d(Point2 a, Point2 b, Point2 c) {
    double l = (a.x - c.x) * (b.y - c.y);
    double r = (a.y - c.y) * (b.x - c.x);
    double det = l - r;
    double bound = kCcwBound * (std::abs(l) + std::abs(r));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return orient_exact(a, b, c);
}

bool on_segment(Point2 p, Point2 a, Point2 b) {
    if (orient2d(a, b, p) != 0) return false;
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

SegIntersection segments_intersect(Point2 a0, Point2 a1, Point2 b0, Point2 b1) {
    if (a0 == a1 || b0 == b1) throw geometry_error("degenerate segment");
    int o1 = orient2d(a0, a1, b0), o2 = orient2d(a0, a1, b1);
    int o3 = orient2d(b0, b1, a0), o4 = orient2d(b0, b1, a1);
    SegIntersection r;
    if (o1 == 0 && o2 == 0) {
        bool use_x = std::abs(a1.x - a0.x) >= std::abs(a1.y - a0.y);
        auto key = [&](Point2 p) { return use_x ? p.x : p.y; };
        Point2 alo = a0, ahi = a1, blo = b0, bhi = b1;
        if (key(alo) > key(ahi)) std::swap(alo, ahi);
        if (key(blo) > key(bhi)) std::swap(blo, bhi);
        double lo = std::max(key(alo), key(blo)), hi = std::min(key(ahi), key(bhi));
        if (lo > hi) return r;
        if (lo == hi) {
            r.kind = SegRelation::endpoint_touch;
            for (Point2 q : {a0, a1, b0, b1})
                if (key(q) == lo) r.point = q;
            return r;
        }
        r.kind = SegRelation::overlap;
        return r;
    }
    if (o1 * o2 > 0 || o3 * o4 > 0) return r;
    if (o1 == 0) { r.kind = SegRelation::endpoint_touch; r.point = b0; return r; }
    if (o2 == 0) { r.kind = SegRelation::endpoint_touch; r.point = b1; return r; }
    if (o3 == 0) { r.kind = SegRelation::endpoint_touch; r.point = a0; return r; }
    if (o4 == 0) { r.kind = SegRelation::endpoint_touch; r.point = a1; return r; }
    r.kind = SegRelation::interior_cross;
    Point2 da = a1 - a0, db = b1 - b0;
    double t = cross(b0 - a0, db) / cross(da, db);
    r.point = a0 + da * t;
    return r;
}

double signed_area(const std::vector<Point2>& pts) {
    double s = 0;
    std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) s += cross(pts[i], pts[(i + 1) % n]);
    return 0.5 * s;
}

double polygon_area(const JordanPolygon& poly) { return signed_area(poly.vertices); }

double polyline_length(const PolyLine& pl) {
    double s = 0;
    for (std::size_t i = 1; i < pl.size(); ++i) s += dist(pl[i - 1], pl[i]);
    return s;
}

namespace {

bool chain_simple(const std::vector<Point2>& v, bool closed) {
    std::size_t n = v.size();
    std::size_t m = closed ? n : n - 1;
    if (n < 2) return false;
    if (closed && n < 3) return false;
    for (std::size_t i = 0; i < m; ++i)
        if (v[i] == v[(i + 1) % n]) return false;
    for (std::size_t i = 0; i < m; ++i) {
        Point2 a0 = v[i], a1 = v[(i + 1) % n];
        for (std::size_t j = i + 1; j < m; ++j) {
            Point2 b0 = v[j], b1 = v[(j + 1) % n];
            auto r = segments_intersect(a0, a1, b0, b1);
            bool next = j == i + 1;
            bool wrap = closed && i == 0 && j == m - 1;
            if (next || wrap) {
                if (r.kind == SegRelation::overlap || r.kind == SegRelation::interior_cross)
                    return false;
                if (r.kind == SegRelation::endpoint_touch) {
                    Point2 shared = next ? a1 : a0;
                    if (r.point != shared) return false;
                }
            } else if (r.kind != SegRelation::disjoint) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

bool is_simple(const std::vector<Point2>& ring) { return chain_simple(ring, true); }
bool polyline_is_simple(const PolyLine& pl) { return chain_simple(pl, false); }

int point_in_polygon(const JordanPolygon& poly, Point2 p) {
    std::size_t n = poly.size();
    int wn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = poly[i], b = poly[(i + 1) % n];
        if (on_segment(p, a, b)) return 0;
        if (a.y <= p.y) {
            if (b.y > p.y && orient2d(a, b, p) > 0) ++wn;
        } else if (b.y <= p.y && orient2d(a, b, p) < 0) {
            --wn;
        }
    }
    return wn != 0 ? 1 : -1;
}

JordanPolygon make_polygon(std::vector<Point2> ring, bool check) {
    if (ring.size() < 3) throw geometry_error("polygon needs at least 3 vertices");
    if (check && !is_simple(ring)) throw geometry_error("polygon is not simple");
    if (signed_area(ring) < 0) std::reverse(ring.begin(), ring.end());
    return JordanPolygon{std::move(ring)};
}

std::vector<Point2> normalize_collinear(const std::vector<Point2>& ring, bool closed,
                                       const std::vector<bool>* keep, double tol) {
    std::vector<Point2> v;
    std::vector<bool> k;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        bool ki = keep && (*keep)[i];
        if (!v.empty() && v.back() == ring[i]) {
            if (ki) k.back() = true;
            continue;
        }
        v.push_back(ring[i]);
        k.push_back(ki);
    }
    if (closed && v.size() > 1 && v.front() == v.back()) {
        k.front() = k.front() || k.back();
        v.pop_back();
        k.pop_back();
    }
    bool changed = true;
    while (changed && v.size() > (closed ? 3u : 2u)) {
        changed = false;
        std::size_t n = v.size();
        for (std::size_t i = 0; i < n && v.size() > (closed ? 3u : 2u); ++i) {
            if (!closed && (i == 0 || i + 1 >= v.size())) continue;
            if (i >= v.size()) break;
            std::size_t m = v.size();
            Point2 a = v[(i + m - 1) % m], b = v[i], c = v[(i + 1) % m];
            if (k[i]) continue;
            Point2 u = b - a, w = c - b;
            double lu = norm(u), lw = norm(w);
            if (std::abs(cross(u, w)) <= tol * lu * lw && dot(u, w) > 0) {
                v.erase(v.begin() + static_cast<long>(i));
                k.erase(k.begin() + static_cast<long>(i));
                changed = true;
                --i;
            }
        }
    }
    return v;
}

std::vector<Triangle> triangulate(const JordanPolygon& poly) {
    std::size_t n = poly.size();
    if (n < 3) throw geometry_error("triangulate: fewer than 3 vertices");
    if (!is_simple(poly.vertices)) throw geometry_error("triangulate: polygon not simple");
    const auto& P = poly.vertices;
    bool ccw = signed_area(P) > 0;
    std::vector<int> prv(n), nxt(n);
    for (std::size_t i = 0; i < n; ++i) {
        prv[i] = static_cast<int>((i + n - 1) % n);
        nxt[i] = static_cast<int>((i + 1) % n);
    }
    if (!ccw) std::swap(prv, nxt);
    std::vector<char> alive(n, 1);
    auto is_ear = [&](int i) {
        int a = prv[i], c = nxt[i];
        if (orient2d(P[a], P[i], P[c]) <= 0) return false;
        for (int j = nxt[c]; j != a; j = nxt[j]) {
            Point2 q = P[j];
            if (q == P[a] || q == P[i] || q == P[c]) return false;
            if (orient2d(P[a], P[i], q) >= 0 && orient2d(P[i], P[c], q) >= 0 &&
                orient2d(P[c], P[a], q) >= 0)
                return false;
        }
        return true;
    };
    std::vector<char> ear(n);
    for (std::size_t i = 0; i < n; ++i) ear[i] = is_ear(static_cast<int>(i));
    std::vector<Triangle> tris;
    tris.reserve(n - 2);
    std::size_t remaining = n;
    int cur = 0;
    while (remaining > 3) {
        int start = cur;
        bool found = false;
        do {
            if (ear[cur]) { found = true; break; }
            cur = nxt[cur];
        } while (cur != start);
        if (!found) throw geometry_error("triangulate: no ear found");
        int a = prv[cur], c = nxt[cur];
        tris.push_back({a, cur, c});
        alive[cur] = 0;
        nxt[a] = c;
        prv[c] = a;
        --remaining;
        ear[a] = is_ear(a);
        ear[c] = is_ear(c);
        cur = c;
    }
    tris.push_back({prv[cur], cur, nxt[cur]});
    if (orient2d(P[tris.back()[0]], P[tris.back()[1]], P[tris.back()[2]]) <= 0)
        throw geometry_error("triangulate: degenerate final triangle");
    return tris;
}

Point2 eval_fraction(const PolyLine& pl, double u) {
    if (pl.empty()) throw geometry_error("empty polyline");
    if (pl.size() == 1 || u <= 0) return pl.front();
    if (u >= 1) return pl.back();
    double total = polyline_length(pl);
    if (total == 0) return pl.front();
    double target = u * total, acc = 0;
    for (std::size_t i = 1; i < pl.size(); ++i) {
        double l = dist(pl[i - 1], pl[i]);
        if (acc + l >= target) {
            double f = l > 0 ? (target - acc) / l : 0.0;
            return lerp(pl[i - 1], pl[i], std::clamp(f, 0.0, 1.0));
        }
        acc += l;
    }
    return pl.back();
}

Point2 eval_constant_speed(const ParamCurve& c, double t) {
    if (!(c.hi > c.lo)) throw geometry_error("empty parameter domain");
    if (t < c.lo || t > c.hi) throw geometry_error("parameter outside domain");
    return eval_fraction(c.polyline, (t - c.lo) / (c.hi - c.lo));
}

PolyLine sub_polyline(const PolyLine& pl, double u0, double u1) {
    double total = polyline_length(pl);
    PolyLine out;
    out.push_back(eval_fraction(pl, u0));
    double acc = 0;
    for (std::size_t i = 1; i + 1 < pl.size(); ++i) {
        acc += dist(pl[i - 1], pl[i]);
        double f = total > 0 ? acc / total : 0;
        if (f > u0 && f < u1 && pl[i] != out.back()) out.push_back(pl[i]);
    }
    Point2 e = eval_fraction(pl, u1);
    if (e != out.back()) out.push_back(e);
    return out;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    Point2 d = b - a;
    double l2 = dot(d, d);
    if (l2 == 0) return dist(p, a);
    double t = std::clamp(dot(p - a, d) / l2, 0.0, 1.0);
    return dist(p, a + d * t);
}

double segment_distance(Point2 a0, Point2 a1, Point2 b0, Point2 b1) {
    if (a0 != a1 && b0 != b1 &&
        segments_intersect(a0, a1, b0, b1).kind != SegRelation::disjoint)
        return 0;
    return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                     point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

double min_nonadjacent_side_distance(const JordanPolygon& poly) {
    std::size_t n = poly.size();
    if (n < 4) throw geometry_error("min_nonadjacent_side_distance: needs >= 4 sides");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            best = std::min(best, segment_distance(poly[i], poly[(i + 1) % n], poly[j],
                                                   poly[(j + 1) % n]));
        }
    return best;
}

std::optional<std::size_t> find_vertex(const JordanPolygon& poly, Point2 p) {
    for (std::size_t i = 0; i < poly.size(); ++i)
        if (poly[i] == p) return i;
    return std::nullopt;
}

Point2 inner_normal(const JordanPolygon& poly, std::size_t i) {
    std::size_t n = poly.size();
    if (i >= n) throw geometry_error("inner_normal: not a vertex");
    Point2 p = poly[i], a = poly[(i + n - 1) % n], b = poly[(i + 1) % n];
    Point2 e1 = (p - a) / dist(p, a), e2 = (b - p) / dist(b, p);
    Point2 d = Point2{-e1.y, e1.x} + Point2{-e2.y, e2.x};
    double l = norm(d);
    if (l < 1e-15) throw geometry_error("inner_normal: spike vertex");
    return d / l;
}

Point2 inner_normal(const JordanPolygon& poly, Point2 vertex) {
    auto i = find_vertex(poly, vertex);
    if (!i) throw geometry_error("inner_normal: point is not a vertex");
    return inner_normal(poly, *i);
}

}  // namespace sobext
