#include "sobext/geodesic.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numbers>
#include <queue>

namespace sobext {

namespace {

double bbox_diameter(const std::vector<Point2>& pts) {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (auto p : pts) {
        x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
    return std::hypot(x1 - x0, y1 - y0);
}

bool in_closed_triangle(Point2 a, Point2 b, Point2 c, Point2 p) {
    return orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0;
}

double triangle_distance(Point2 a, Point2 b, Point2 c, Point2 p) {
    if (in_closed_triangle(a, b, c, p)) return 0;
    return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                     point_segment_distance(p, c, a)});
}

}  // namespace

GeodesicDomain::GeodesicDomain(JordanPolygon poly, double snap_tol)
    : poly_(std::move(poly)), snap_tol_(snap_tol) {
    if (signed_area(poly_.vertices) < 0)
        std::reverse(poly_.vertices.begin(), poly_.vertices.end());
    tris_ = triangulate(poly_);
    if (snap_tol_ < 0) snap_tol_ = 1e-9 * bbox_diameter(poly_.vertices);
    nbr_.assign(tris_.size(), {-1, -1, -1});
    std::map<std::pair<int, int>, std::pair<int, int>> edges;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
        for (int e = 0; e < 3; ++e) {
            int u = tris_[t][e], v = tris_[t][(e + 1) % 3];
            auto key = std::minmax(u, v);
            auto it = edges.find(key);
            if (it == edges.end()) {
                edges[key] = {t, e};
            } else {
                nbr_[t][e] = it->second.first;
                nbr_[it->second.first][it->second.second] = t;
            }
        }
}

std::vector<int> GeodesicDomain::locate(Point2 p) const {
    const auto& P = poly_.vertices;
    std::vector<int> out;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
        if (in_closed_triangle(P[tris_[t][0]], P[tris_[t][1]], P[tris_[t][2]], p)) out.push_back(t);
    if (!out.empty()) return out;
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        double d = triangle_distance(P[tris_[t][0]], P[tris_[t][1]], P[tris_[t][2]], p);
        if (d < bd) { bd = d; best = t; }
    }
    if (bd > snap_tol_) throw geometry_error("shortest_path: endpoint outside the closed polygon");
    return {best};
}

PolyLine GeodesicDomain::path(Point2 a, Point2 b) const {
    if (a == b) return {a};
    auto ta = locate(a), tb = locate(b);
    for (int x : ta)
        if (std::find(tb.begin(), tb.end(), x) != tb.end()) return {a, b};

    // multi-source BFS in the dual tree
    std::vector<int> parent(tris_.size(), -2);
    std::deque<int> q;
    for (int x : ta) { parent[x] = -1; q.push_back(x); }
    int hit = -1;
    while (!q.empty() && hit < 0) {
        int t = q.front();
        q.pop_front();
        for (int e = 0; e < 3; ++e) {
            int u = nbr_[t][e];
            if (u < 0 || parent[u] != -2) continue;
            parent[u] = t;
            if (std::find(tb.begin(), tb.end(), u) != tb.end()) { hit = u; break; }
            q.push_back(u);
        }
    }
    if (hit < 0) throw geometry_error("shortest_path: disconnected triangulation");
    std::vector<int> sleeve;
    for (int t = hit; t >= 0; t = parent[t]) sleeve.push_back(t);
    std::reverse(sleeve.begin(), sleeve.end());

    const auto& P = poly_.vertices;
    std::vector<Point2> lefts{a}, rights{a};
    for (std::size_t i = 0; i + 1 < sleeve.size(); ++i) {
        int t = sleeve[i], u = sleeve[i + 1];
        int e = 0;
        while (nbr_[t][e] != u) ++e;
        rights.push_back(P[tris_[t][e]]);
        lefts.push_back(P[tris_[t][(e + 1) % 3]]);
    }
    lefts.push_back(b);
    rights.push_back(b);

    PolyLine out{a};
    Point2 apex = a, left = a, right = a;
    int apex_i = 0, left_i = 0, right_i = 0;
    int m = static_cast<int>(lefts.size());
    for (int i = 1; i < m; ++i) {
        Point2 l = lefts[i], r = rights[i];
        if (orient2d(apex, right, r) >= 0) {
            if (apex == right || orient2d(apex, left, r) < 0) {
                right = r;
                right_i = i;
            } else {
                if (out.back() != left) out.push_back(left);
                apex = left;
                apex_i = left_i;
                right = left = apex;
                right_i = left_i = apex_i;
                i = apex_i;
                continue;
            }
        }
        if (orient2d(apex, left, l) <= 0) {
            if (apex == left || orient2d(apex, right, l) > 0) {
                left = l;
                left_i = i;
            } else {
                if (out.back() != right) out.push_back(right);
                apex = right;
                apex_i = right_i;
                right = left = apex;
                right_i = left_i = apex_i;
                i = apex_i;
                continue;
            }
        }
    }
    if (out.back() != b) out.push_back(b);
    return simplify_path(out);
}

PolyLine shortest_path(const JordanPolygon& poly, Point2 a, Point2 b) {
    return GeodesicDomain(poly).path(a, b);
}

PolyLine simplify_path(const PolyLine& pl) {
    PolyLine v;
    for (auto p : pl)
        if (v.empty() || v.back() != p) v.push_back(p);
    bool changed = true;
    while (changed && v.size() > 2) {
        changed = false;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (orient2d(v[i - 1], v[i], v[i + 1]) == 0 &&
                dot(v[i] - v[i - 1], v[i + 1] - v[i]) > 0) {
                v.erase(v.begin() + static_cast<long>(i));
                changed = true;
                break;
            }
        }
    }
    return v;
}

namespace {

bool segment_inside(const JordanPolygon& poly, Point2 p, Point2 q) {
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i)
        if (segments_intersect(p, q, poly[i], poly[(i + 1) % n]).kind == SegRelation::interior_cross)
            return false;
    Point2 d = q - p;
    double l2 = dot(d, d);
    std::vector<std::pair<double, Point2>> cuts{{0.0, p}, {1.0, q}};
    for (auto v : poly.vertices)
        if (v != p && v != q && on_segment(v, p, q)) cuts.push_back({dot(v - p, d) / l2, v});
    std::sort(cuts.begin(), cuts.end(), [](auto& x, auto& y) { return x.first < y.first; });
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        Point2 x = cuts[k].second, y = cuts[k + 1].second;
        bool along_edge = false;
        for (std::size_t i = 0; i < n && !along_edge; ++i)
            along_edge = on_segment(x, poly[i], poly[(i + 1) % n]) &&
                         on_segment(y, poly[i], poly[(i + 1) % n]);
        if (along_edge) continue;
        if (point_in_polygon(poly, (x + y) * 0.5) < 0) return false;
    }
    return true;
}

}  // namespace

PolyLine shortest_path_oracle(const JordanPolygon& poly, Point2 a, Point2 b) {
    if (point_in_polygon(poly, a) < 0 || point_in_polygon(poly, b) < 0)
        throw geometry_error("shortest_path_oracle: endpoint outside the closed polygon");
    if (a == b) return {a};
    std::vector<Point2> nodes{a, b};
    for (auto v : poly.vertices)
        if (v != a && v != b) nodes.push_back(v);
    std::size_t n = nodes.size();
    std::vector<double> d(n, std::numeric_limits<double>::infinity());
    std::vector<int> prev(n, -1);
    std::vector<char> done(n, 0);
    d[0] = 0;
    for (std::size_t it = 0; it < n; ++it) {
        int u = -1;
        for (std::size_t i = 0; i < n; ++i)
            if (!done[i] && (u < 0 || d[i] < d[u])) u = static_cast<int>(i);
        if (u < 0 || d[u] == std::numeric_limits<double>::infinity()) break;
        done[u] = 1;
        if (u == 1) break;
        for (std::size_t v = 0; v < n; ++v) {
            if (done[v]) continue;
            double w = dist(nodes[u], nodes[v]);
            if (d[u] + w >= d[v]) continue;
            if (!segment_inside(poly, nodes[u], nodes[v])) continue;
            d[v] = d[u] + w;
            prev[v] = u;
        }
    }
    if (prev[1] < 0) throw geometry_error("shortest_path_oracle: no path");
    PolyLine out;
    for (int v = 1; v >= 0; v = prev[v]) out.push_back(nodes[v]);
    std::reverse(out.begin(), out.end());
    return simplify_path(out);
}

bool polylines_interior_cross(const PolyLine& p, const PolyLine& q) {
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        if (p[i] == p[i + 1]) continue;
        for (std::size_t j = 0; j + 1 < q.size(); ++j) {
            if (q[j] == q[j + 1]) continue;
            if (segments_intersect(p[i], p[i + 1], q[j], q[j + 1]).kind ==
                SegRelation::interior_cross)
                return true;
        }
    }
    return false;
}

JordanPolygon random_star_polygon(std::mt19937_64& rng, int n, double rmin, double rmax) {
    std::uniform_real_distribution<double> jit(0.0, 0.8), rad(rmin, rmax);
    std::vector<Point2> ring;
    for (int i = 0; i < n; ++i) {
        double ang = 2 * std::numbers::pi * (i + jit(rng)) / n;
        double r = rad(rng);
        ring.push_back({r * std::cos(ang), r * std::sin(ang)});
    }
    return make_polygon(ring);
}

JordanPolygon comb_polygon(int teeth, double tw, double gw, double height, double base) {
    double w = teeth * tw + (teeth - 1) * gw;
    std::vector<Point2> ring{{0, 0}, {w, 0}};
    for (int i = teeth - 1; i >= 0; --i) {
        double xl = i * (tw + gw), xr = xl + tw;
        ring.push_back({xr, height});
        ring.push_back({xl, height});
        if (i > 0) {
            ring.push_back({xl, base});
            ring.push_back({xl - gw, base});
        }
    }
    return make_polygon(ring);
}

double square_theta(Point2 uv) {
    double u = uv.x, w = uv.y;
    if (w == 0 && u < 1) return u;
    if (u == 1 && w < 1) return 1 + w;
    if (w == 1 && u > 0) return 2 + (1 - u);
    if (u == 0 && w > 0) return 3 + (1 - w);
    double db = std::abs(w), dr = std::abs(1 - u), dt = std::abs(1 - w), dl = std::abs(u);
    double m = std::min({db, dr, dt, dl});
    if (m > 1e-9) throw geometry_error("square_theta: point not on the square boundary");
    auto c = [](double x) { return std::clamp(x, 0.0, 1.0); };
    if (m == db) return c(u) >= 1 ? 1.0 : c(u);
    if (m == dr) return 1 + c(w);
    if (m == dt) return 2 + (1 - c(u));
    double th = 3 + (1 - c(w));
    return th >= 4 ? 0.0 : th;
}

Point2 square_point(double th) {
    th = std::fmod(th, 4.0);
    if (th < 0) th += 4;
    if (th < 1) return {th, 0};
    if (th < 2) return {1, th - 1};
    if (th < 3) return {3 - th, 1};
    return {0, 4 - th};
}

Point2 SquareBoundaryMap::at_theta(double th) const {
    th = std::fmod(th, 4.0);
    if (th < 0) th += 4;
    std::size_t n = knots.size();
    auto it = std::upper_bound(knots.begin(), knots.end(), th);
    std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
    if (knots[i] == th) return images[i];
    double t0 = knots[i], t1 = i + 1 < n ? knots[i + 1] : 4.0;
    Point2 p0 = images[i], p1 = images[(i + 1) % n];
    return lerp(p0, p1, (th - t0) / (t1 - t0));
}

std::vector<Point2> SquareBoundaryMap::ring() const {
    std::vector<Point2> r;
    for (auto p : images)
        if (r.empty() || r.back() != p) r.push_back(p);
    if (r.size() > 1 && r.front() == r.back()) r.pop_back();
    return r;
}

SquareBoundaryMap SquareBoundaryMap::from_function(const std::function<Point2(Point2)>& f,
                                                   int per_side) {
    SquareBoundaryMap m;
    int n = 4 * per_side;
    for (int i = 0; i < n; ++i) {
        double th = 4.0 * i / n;
        m.knots.push_back(th);
        m.images.push_back(f(square_point(th)));
    }
    return m;
}

SquareBoundaryMap SquareBoundaryMap::from_marked(const std::vector<Point2>& ring,
                                                 const std::vector<std::pair<int, double>>& marks) {
    if (marks.empty() || marks.front().second != 0)
        throw geometry_error("from_marked: first mark must sit at theta 0");
    SquareBoundaryMap m;
    int n = static_cast<int>(ring.size());
    for (std::size_t k = 0; k < marks.size(); ++k) {
        int i0 = marks[k].first;
        double th0 = marks[k].second;
        int i1 = k + 1 < marks.size() ? marks[k + 1].first : marks[0].first;
        double th1 = k + 1 < marks.size() ? marks[k + 1].second : 4.0;
        int cnt = ((i1 - i0) % n + n) % n;
        if (cnt == 0 && marks.size() == 1) cnt = n;
        double total = 0;
        for (int s = 0; s < cnt; ++s) total += dist(ring[(i0 + s) % n], ring[(i0 + s + 1) % n]);
        double acc = 0;
        for (int s = 0; s < cnt; ++s) {
            m.knots.push_back(total > 0 ? th0 + (th1 - th0) * acc / total : th0);
            m.images.push_back(ring[(i0 + s) % n]);
            acc += dist(ring[(i0 + s) % n], ring[(i0 + s + 1) % n]);
        }
    }
    return m;
}

std::vector<Point2> inflate_pinches(const std::vector<Point2>& ring, double eps) {
    std::size_t n = ring.size();
    double sgn = signed_area(ring) >= 0 ? 1.0 : -1.0;
    std::vector<Point2> out = ring;
    for (std::size_t i = 0; i < n; ++i) {
        Point2 p = ring[i];
        bool pinched = false;
        for (std::size_t j = 0; j < n && !pinched; ++j) {
            if (j == i || (j + 1) % n == i) continue;
            pinched = point_segment_distance(p, ring[j], ring[(j + 1) % n]) < eps;
        }
        if (!pinched) continue;
        Point2 a = ring[(i + n - 1) % n], b = ring[(i + 1) % n];
        Point2 e1 = (p - a) / dist(p, a), e2 = (b - p) / dist(b, p);
        Point2 d = (Point2{-e1.y, e1.x} + Point2{-e2.y, e2.x}) * sgn;
        double l = norm(d);
        if (l > 0) out[i] = p + d * (eps / l);
    }
    return out;
}

ShortestCurveExtension::ShortestCurveExtension(SquareBoundaryMap phi)
    : phi_(std::move(phi)), cache_(std::make_shared<Cache>()) {
    auto ring = normalize_collinear(phi_.ring(), true);
    if (!is_simple(ring)) {
        auto fixed = inflate_pinches(ring, 1e-9 * bbox_diameter(ring));
        if (!is_simple(fixed)) throw geometry_error("shortest-curve extension: target curve not simple");
        ring = fixed;
    }
    dom_ = std::make_shared<GeodesicDomain>(make_polygon(ring, false));
}

std::pair<Point2, Point2> ShortestCurveExtension::leaf_ends(double s) {
    if (s >= 0) return {{0, s}, {1 - s, 1}};
    return {{-s, 0}, {1, 1 + s}};
}

PolyLine ShortestCurveExtension::leaf(double s) const {
    double scaled = s * 4096.0;
    bool cacheable = scaled == std::floor(scaled);
    long key = static_cast<long>(scaled);
    if (cacheable) {
        std::lock_guard<std::mutex> g(cache_->mu);
        auto it = cache_->leaves.find(key);
        if (it != cache_->leaves.end()) return it->second;
    }
    auto [a, b] = leaf_ends(s);
    PolyLine pl = dom_->path(phi_(a), phi_(b));
    if (cacheable) {
        std::lock_guard<std::mutex> g(cache_->mu);
        cache_->leaves.emplace(key, pl);
    }
    return pl;
}

Point2 ShortestCurveExtension::operator()(Point2 uv) const {
    double u = uv.x, w = uv.y;
    if (u < -1e-12 || u > 1 + 1e-12 || w < -1e-12 || w > 1 + 1e-12)
        throw geometry_error("extension: point outside the square");
    if (u <= 0 || u >= 1 || w <= 0 || w >= 1) return phi_(uv);
    double s = w - u;
    auto [a, b] = leaf_ends(s);
    double lam = (u - a.x) / (b.x - a.x);
    return eval_fraction(leaf(s), lam);
}

Point2 ShortestCurveExtension::diamond(Point2 z) const { return (*this)(diamond_to_square(z)); }

bool SampleRegion::contains(Point2 p) const {
    if (p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y) return false;
    return !inside || inside(p);
}

double lipschitz_estimate(const std::function<Point2(Point2)>& f, const SampleRegion& region, int n,
                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(region.lo.x, region.hi.x), uy(region.lo.y, region.hi.y);
    std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
    std::uniform_int_distribution<int> lvl(1, 10);
    double best = 0;
    for (int k = 0; k < n; ++k) {
        for (int tries = 0; tries < 1000; ++tries) {
            Point2 x{ux(rng), uy(rng)};
            if (!region.contains(x)) continue;
            double r = std::ldexp(1.0, -lvl(rng));
            double a = ang(rng);
            Point2 y = x + Point2{std::cos(a), std::sin(a)} * r;
            if (!region.contains(y)) continue;
            best = std::max(best, dist(f(x), f(y)) / dist(x, y));
            break;
        }
    }
    return best;
}

double family_time_lipschitz(const std::function<Point2(double, Point2)>& family,
                             const SampleRegion& region, int n_t, int n_z, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0, 1), ux(region.lo.x, region.hi.x),
        uy(region.lo.y, region.hi.y);
    std::uniform_int_distribution<int> lvl(1, 8);
    std::vector<Point2> zs;
    while (static_cast<int>(zs.size()) < n_z) {
        Point2 z{ux(rng), uy(rng)};
        if (region.contains(z)) zs.push_back(z);
    }
    double best = 0;
    for (int k = 0; k < n_t; ++k) {
        double t1 = ut(rng), dt = std::ldexp(1.0, -lvl(rng));
        double t2 = t1 + dt <= 1 ? t1 + dt : t1 - dt;
        for (auto z : zs) best = std::max(best, dist(family(t1, z), family(t2, z)) / std::abs(t1 - t2));
    }
    return best;
}

}  // namespace sobext
