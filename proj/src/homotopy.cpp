#include "sobext/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace sobext {

namespace {

double scale_of(const std::vector<Point2>& pts) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto& v : pts) {
        x0 = std::min(x0, v.x), x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
    }
    return std::max({x1 - x0, y1 - y0, 1e-300});
}

struct Box {
    double x0, y0, x1, y1;
    void add(Point2 p) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    bool meets(const Box& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
};

Box box_of(std::initializer_list<Point2> pts) {
    Box b{1e300, 1e300, -1e300, -1e300};
    for (auto p : pts) b.add(p);
    return b;
}

Point2 left_normal(Point2 d) {
    double l = norm(d);
    return l > 0 ? Point2{-d.y / l, d.x / l} : Point2{0, 0};
}

PolyLine dedupe(PolyLine pl) {
    PolyLine out;
    for (auto& p : pl)
        if (out.empty() || out.back() != p) out.push_back(p);
    return out;
}

PolyLine reversed(PolyLine pl) {
    std::reverse(pl.begin(), pl.end());
    return pl;
}

// roots of c0 + c1 x + c2 x^2 in [0,1]; `always` set when the polynomial vanishes identically
std::vector<double> unit_roots(double c0, double c1, double c2, bool& always) {
    always = false;
    std::vector<double> r;
    double mag = std::abs(c0) + std::abs(c1) + std::abs(c2);
    if (mag == 0) {
        always = true;
        return r;
    }
    if (std::abs(c2) <= 1e-13 * mag) {
        if (std::abs(c1) <= 1e-13 * mag) {
            if (std::abs(c0) <= 1e-15 * mag) always = true;
            return r;
        }
        r.push_back(-c0 / c1);
    } else {
        double disc = c1 * c1 - 4 * c2 * c0;
        if (disc < 0) {
            if (disc > -1e-12 * c1 * c1) disc = 0;
            else return r;
        }
        double sq = std::sqrt(disc);
        double q = -0.5 * (c1 + (c1 >= 0 ? sq : -sq));
        if (q != 0) {
            r.push_back(q / c2);
            r.push_back(c0 / q);
        } else {
            r.push_back(0);
        }
    }
    std::vector<double> out;
    for (double x : r)
        if (x >= -1e-12 && x <= 1 + 1e-12) out.push_back(std::clamp(x, 0.0, 1.0));
    return out;
}

}  // namespace

MotionCertificate certify_linear_motion(const std::vector<MovingChain>& chains, bool allow_initial) {
    struct Vtx {
        Point2 a, b;
    };
    std::vector<Vtx> verts;
    std::vector<std::array<std::size_t, 2>> segs;
    std::vector<Point2> all;
    for (auto& c : chains) {
        if (c.from.size() != c.to.size()) throw std::invalid_argument("certify_linear_motion: chain sizes differ");
        std::size_t base = verts.size(), n = c.from.size();
        for (std::size_t i = 0; i < n; ++i) {
            verts.push_back({c.from[i], c.to[i]});
            all.push_back(c.from[i]);
            all.push_back(c.to[i]);
        }
        for (std::size_t i = 0; i + 1 < n; ++i) segs.push_back({base + i, base + i + 1});
        if (c.closed && n > 2) segs.push_back({base + n - 1, base});
    }
    if (verts.empty()) return {};
    double tol = 1e-12 * scale_of(all);
    auto same = [&](std::size_t g, std::size_t h) {
        return g == h || (verts[g].a == verts[h].a && verts[g].b == verts[h].b);
    };
    auto at = [&](std::size_t g, double l) { return lerp(verts[g].a, verts[g].b, l); };
    std::vector<Box> sbox(segs.size());
    for (std::size_t s = 0; s < segs.size(); ++s) {
        auto [p, q] = segs[s];
        sbox[s] = box_of({verts[p].a, verts[p].b, verts[q].a, verts[q].b});
        sbox[s].x0 -= tol, sbox[s].y0 -= tol, sbox[s].x1 += tol, sbox[s].y1 += tol;
    }

    // static configurations
    for (double l : {0.0, 1.0}) {
        if (l == 0 && allow_initial) continue;
        for (std::size_t s = 0; s < segs.size(); ++s)
            for (std::size_t r = s + 1; r < segs.size(); ++r) {
                if (!sbox[s].meets(sbox[r])) continue;
                auto [p, q] = segs[s];
                auto [u, v] = segs[r];
                bool shared = same(p, u) || same(p, v) || same(q, u) || same(q, v);
                bool both = (same(p, u) && same(q, v)) || (same(p, v) && same(q, u));
                if (both) continue;
                auto x = segments_intersect(at(p, l), at(q, l), at(u, l), at(v, l));
                if (x.kind == SegRelation::disjoint) continue;
                if (shared && x.kind == SegRelation::endpoint_touch) {
                    Point2 c = same(p, u) || same(p, v) ? at(p, l) : at(q, l);
                    if (x.point == c) continue;
                }
                return {false, l, x.point, "contact"};
            }
    }
    // vertex-on-segment events in between
    for (std::size_t g = 0; g < verts.size(); ++g) {
        Box vb = box_of({verts[g].a, verts[g].b});
        for (std::size_t s = 0; s < segs.size(); ++s) {
            auto [p, q] = segs[s];
            if (same(g, p) || same(g, q) || !vb.meets(sbox[s])) continue;
            Point2 u0 = verts[q].a - verts[p].a, du = (verts[q].b - verts[p].b) - u0;
            Point2 w0 = verts[g].a - verts[p].a, dw = (verts[g].b - verts[p].b) - w0;
            bool always = false;
            auto roots = unit_roots(cross(u0, w0), cross(u0, dw) + cross(du, w0), cross(du, dw), always);
            if (always) roots = {0.0, 0.5, 1.0};
            for (double l : roots) {
                if (allow_initial && l < 1e-9) continue;
                Point2 a = at(p, l), b = at(q, l), x = at(g, l);
                Point2 d = b - a;
                double len2 = dot(d, d);
                double u = len2 > 0 ? dot(x - a, d) / len2 : 0;
                if (u < -1e-12 || u > 1 + 1e-12) continue;
                if (point_segment_distance(x, a, b) <= tol) return {false, l, x, "vertex meets segment"};
            }
        }
    }
    return {};
}

std::vector<double> arc_fractions(const PolyLine& pl) {
    std::vector<double> f(pl.size(), 0);
    double total = polyline_length(pl), acc = 0;
    for (std::size_t i = 1; i < pl.size(); ++i) {
        acc += dist(pl[i - 1], pl[i]);
        f[i] = total > 0 ? acc / total : double(i) / double(pl.size() - 1);
    }
    if (!f.empty()) f.back() = 1;
    return f;
}

SquareBoundaryMap boundary_map_from_knots(std::vector<std::pair<double, Point2>> knots) {
    if (knots.empty()) throw std::invalid_argument("boundary_map_from_knots: no knots");
    for (auto& k : knots) {
        k.first = std::fmod(k.first, 4.0);
        if (k.first < 0) k.first += 4;
        if (k.first >= 4) k.first = 0;
    }
    std::stable_sort(knots.begin(), knots.end(), [](auto& a, auto& b) { return a.first < b.first; });
    SquareBoundaryMap m;
    for (auto& k : knots)
        if (m.knots.empty() || k.first > m.knots.back()) {
            m.knots.push_back(k.first);
            m.images.push_back(k.second);
        }
    if (m.knots.front() > 0) {
        double tl = m.knots.back() - 4, tf = m.knots.front();
        Point2 p = lerp(m.images.back(), m.images.front(), (0 - tl) / (tf - tl));
        m.knots.insert(m.knots.begin(), 0.0);
        m.images.insert(m.images.begin(), p);
    }
    return m;
}

// ---------------------------------------------------------------- half-fixed

HalfFixedCurves::HalfFixedCurves(PolyLine g0, PolyLine g1, double epsilon, std::vector<double> p0,
                                 std::vector<double> p1) {
    if (g0.size() < 2 || g1.size() < 2) throw std::invalid_argument("half_fixed: curves need two points");
    if (g0.front() != g1.front() || g0.back() != g1.back())
        throw std::invalid_argument("half_fixed: curves must share both endpoints");
    if (p0.empty()) p0 = arc_fractions(g0);
    if (p1.empty()) p1 = arc_fractions(g1);
    auto check = [](const PolyLine& g, const std::vector<double>& p) {
        if (p.size() != g.size() || p.front() != 0 || p.back() != 1)
            throw std::invalid_argument("half_fixed: parameters must run from 0 to 1");
        for (std::size_t i = 1; i < p.size(); ++i)
            if (!(p[i] > p[i - 1])) throw std::invalid_argument("half_fixed: parameters must increase");
        for (std::size_t i = 1; i < g.size(); ++i)
            if (g[i] == g[i - 1]) throw std::invalid_argument("half_fixed: repeated vertex");
    };
    check(g0, p0);
    check(g1, p1);
    data_ = std::make_shared<Data>();
    data_->gamma0 = g0;
    data_->gamma1 = g1;
    data_->params0 = p0;
    data_->params1 = p1;
    if (simplify_path(g0) == simplify_path(g1)) {
        trivial_ = true;
        return;
    }
    for (std::size_t i = 0; i + 1 < g0.size(); ++i)
        for (std::size_t j = 0; j + 1 < g1.size(); ++j) {
            auto r = segments_intersect(g0[i], g0[i + 1], g1[j], g1[j + 1]);
            if (r.kind == SegRelation::disjoint) continue;
            if (r.kind == SegRelation::endpoint_touch) {
                if (i == 0 && j == 0 && r.point == g0.front()) continue;
                if (i + 2 == g0.size() && j + 2 == g1.size() && r.point == g0.back()) continue;
            }
            std::ostringstream os;
            os << "half_fixed: curves meet beyond their endpoints at (" << r.point.x << ", " << r.point.y << ")";
            throw geometry_error(os.str());
        }
    std::vector<Point2> ring(g0.begin(), g0.end());
    for (std::size_t j = g1.size() - 2; j >= 1; --j) ring.push_back(g1[j]);
    data_->region = make_polygon(ring);
    data_->dom = std::make_shared<GeodesicDomain>(data_->region);
    auto& poly = data_->region;
    std::vector<std::optional<double>> anchors(poly.size());
    auto index_all = [&](const PolyLine& g, std::vector<int>& idx, double anchor) {
        idx.assign(g.size(), -1);
        for (std::size_t i = 1; i + 1 < g.size(); ++i) {
            auto v = find_vertex(poly, g[i]);
            if (!v) throw geometry_error("half_fixed: region lost a curve vertex");
            idx[i] = static_cast<int>(*v);
            anchors[*v] = anchor;
        }
    };
    index_all(g0, data_->region_index0, 0.0);
    index_all(g1, data_->region_index1, 1.0);
    CurveFamily fam{[d = data_](double t) { return raw_curve(*d, t, nullptr); }, 0, 1};
    mod_ = std::make_shared<ModifiedFamily>(fam, poly, anchors, ModifyOptions{epsilon, 256});
}

const JordanPolygon& HalfFixedCurves::region() const { return data_->region; }

PolyLine HalfFixedCurves::raw_curve(const Data& d, double t, Split* out) {
    t = std::clamp(t, 0.0, 1.0);
    Split s;
    s.curve = t <= 0.5 ? 0 : 1;
    s.portion = s.curve == 0 ? 1 - 2 * t : 2 * t - 1;
    const PolyLine& g = s.curve ? d.gamma1 : d.gamma0;
    const auto& p = s.curve ? d.params1 : d.params0;
    if (s.portion >= 1 || !d.dom) {
        s.whole = true;
        s.edge = g.size() - 2;
        s.u = 1;
        s.index = g.size() - 1;
        if (out) *out = s;
        return g;
    }
    std::size_t k = static_cast<std::size_t>(std::upper_bound(p.begin(), p.end(), s.portion) - p.begin()) - 1;
    k = std::min(k, g.size() - 2);
    double u = (s.portion - p[k]) / (p[k + 1] - p[k]);
    PolyLine c(g.begin(), g.begin() + static_cast<long>(k) + 1);
    Point2 split = g[k];
    if (u > 0) {
        split = lerp(g[k], g[k + 1], u);
        if (split == g[k]) u = 0;
        else c.push_back(split);
    }
    s.edge = k;
    s.u = u;
    s.index = c.size() - 1;
    auto path = d.dom->path(split, g.back());
    for (std::size_t i = 1; i < path.size(); ++i)
        if (path[i] != c.back()) c.push_back(path[i]);
    if (c.back() != g.back()) c.back() = g.back();
    if (out) *out = s;
    return c;
}

PolyLine HalfFixedCurves::raw(double t) const { return trivial_ ? data_->gamma0 : raw_curve(*data_, t, nullptr); }

HalfFixedCurves::Split HalfFixedCurves::split(double t) const {
    Split s;
    if (trivial_) {
        s.whole = true;
        s.index = data_->gamma0.size() - 1;
        s.edge = s.index - 1;
        s.u = 1;
        return s;
    }
    raw_curve(*data_, t, &s);
    return s;
}

Point2 HalfFixedCurves::nudged_vertex(int curve, std::size_t i, double t) const {
    const PolyLine& g = curve ? data_->gamma1 : data_->gamma0;
    if (i == 0 || i + 1 == g.size()) return g[i];
    int idx = (curve ? data_->region_index1 : data_->region_index0)[i];
    auto& plan = mod_->plans()[static_cast<std::size_t>(idx)];
    if (!plan.active) return g[i];
    double off = mod_->offset(static_cast<std::size_t>(idx), t);
    double len = plan.seg.length();
    if (off < 0) off = (t - plan.anchor) / (plan.reach - plan.anchor) > 1 ? len : 0;
    return g[i] + (plan.seg.tip - g[i]) * (off / len);
}

PolyLine HalfFixedCurves::operator()(double t) const {
    if (trivial_) return data_->gamma0;
    t = std::clamp(t, 0.0, 1.0);
    Split s;
    raw_curve(*data_, t, &s);
    PolyLine l = (*mod_)(t);
    if (!s.whole && s.u > 0) {
        Point2 a = nudged_vertex(s.curve, s.edge, t), b = nudged_vertex(s.curve, s.edge + 1, t);
        l[s.index] = lerp(a, b, s.u);
    }
    return dedupe(l);
}

HalfFixedHomotopy::HalfFixedHomotopy(SquareBoundaryMap phi0, SquareBoundaryMap phi1, double theta_a, double theta_b,
                                     double epsilon)
    : phi0_(std::move(phi0)) {
    theta_a_ = std::fmod(std::fmod(theta_a, 4.0) + 4.0, 4.0);
    span_ = std::fmod(std::fmod(theta_b - theta_a, 4.0) + 4.0, 4.0);
    if (span_ == 0) throw std::invalid_argument("half_fixed_homotopy: empty arc");
    auto rel = [&](double th) { return std::fmod(std::fmod(th - theta_a_, 4.0) + 4.0, 4.0); };
    std::vector<Point2> pts = phi0_.images;
    pts.insert(pts.end(), phi1.images.begin(), phi1.images.end());
    double tol = 1e-12 * scale_of(pts);
    auto agree = [&](double th) {
        if (dist(phi0_.at_theta(th), phi1.at_theta(th)) > tol)
            throw std::invalid_argument("half_fixed_homotopy: maps differ off the arc");
    };
    for (auto* m : {&phi0_, &phi1})
        for (double th : m->knots)
            if (rel(th) > span_) agree(th);
    agree(theta_a_);
    agree(theta_a_ + span_);
    auto arc = [&](const SquareBoundaryMap& m, PolyLine& g, std::vector<double>& p) {
        std::vector<std::pair<double, Point2>> in;
        for (std::size_t i = 0; i < m.knots.size(); ++i) {
            double r = rel(m.knots[i]);
            if (r > 0 && r < span_) in.push_back({r, m.images[i]});
        }
        std::sort(in.begin(), in.end(), [](auto& a, auto& b) { return a.first < b.first; });
        g = {m.at_theta(theta_a_)};
        p = {0};
        for (auto& [r, q] : in)
            if (q != g.back()) {
                g.push_back(q);
                p.push_back(r / span_);
            }
        Point2 b = m.at_theta(theta_a_ + span_);
        if (b == g.back() && g.size() > 1) {
            g.back() = b;
            p.back() = 1;
        } else {
            g.push_back(b);
            p.push_back(1);
        }
    };
    PolyLine g0, g1;
    std::vector<double> p0, p1;
    arc(phi0_, g0, p0);
    arc(phi1, g1, p1);
    g1.front() = g0.front();
    g1.back() = g0.back();
    curves_ = std::make_shared<HalfFixedCurves>(g0, g1, epsilon, p0, p1);
}

SquareBoundaryMap HalfFixedHomotopy::operator()(double t) const {
    auto rel = [&](double th) { return std::fmod(std::fmod(th - theta_a_, 4.0) + 4.0, 4.0); };
    std::vector<std::pair<double, Point2>> knots;
    for (std::size_t i = 0; i < phi0_.knots.size(); ++i)
        if (rel(phi0_.knots[i]) > span_) knots.push_back({phi0_.knots[i], phi0_.images[i]});
    PolyLine l = (*curves_)(t);
    auto s = curves_->split(t);
    const auto& p = curves_->params(s.curve);
    if (s.whole) {
        if (l.size() != p.size()) throw geometry_error("half_fixed_homotopy: vertex count changed");
        for (std::size_t j = 0; j < l.size(); ++j) knots.push_back({theta_a_ + p[j] * span_, l[j]});
        return boundary_map_from_knots(knots);
    }
    for (std::size_t j = 0; j <= s.edge; ++j) knots.push_back({theta_a_ + p[j] * span_, l[j]});
    double th0 = theta_a_ + s.portion * span_, th1 = theta_a_ + span_;
    if (s.u > 0) knots.push_back({th0, l[s.index]});
    double total = 0;
    for (std::size_t j = s.index + 1; j < l.size(); ++j) total += dist(l[j - 1], l[j]);
    double acc = 0;
    for (std::size_t j = s.index + 1; j < l.size(); ++j) {
        acc += dist(l[j - 1], l[j]);
        double th = j + 1 == l.size() ? th1 : th0 + (th1 - th0) * acc / total;
        knots.push_back({th, l[j]});
    }
    return boundary_map_from_knots(knots);
}

// ---------------------------------------------------------------- crosses

std::array<Point2, 4> Cross::ends() const {
    return {arms[0].back(), arms[1].back(), arms[2].back(), arms[3].back()};
}

bool Cross::simple() const {
    for (auto& a : arms)
        if (a.size() < 2 || a.front() != center || !polyline_is_simple(a)) return false;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            auto& a = arms[i];
            auto& b = arms[j];
            for (std::size_t p = 0; p + 1 < a.size(); ++p) {
                auto ba = box_of({a[p], a[p + 1]});
                for (std::size_t q = 0; q + 1 < b.size(); ++q) {
                    if (!ba.meets(box_of({b[q], b[q + 1]}))) continue;
                    auto r = segments_intersect(a[p], a[p + 1], b[q], b[q + 1]);
                    if (r.kind == SegRelation::disjoint) continue;
                    if (p == 0 && q == 0 && r.kind == SegRelation::endpoint_touch && r.point == center) continue;
                    return false;
                }
            }
        }
    return true;
}

bool Cross::clear_of(const JordanPolygon& poly) const {
    double tol = 1e-12 * scale_of(poly.vertices);
    std::size_t n = poly.size();
    for (auto& a : arms) {
        for (std::size_t i = 0; i + 1 < a.size(); ++i)
            if (point_in_polygon(poly, a[i]) != 1) return false;
        for (std::size_t i = 0; i + 1 < a.size(); ++i) {
            auto ba = box_of({a[i], a[i + 1]});
            for (std::size_t e = 0; e < n; ++e) {
                Point2 p = poly[e], q = poly[(e + 1) % n];
                if (!ba.meets(box_of({p, q}))) continue;
                auto r = segments_intersect(a[i], a[i + 1], p, q);
                if (r.kind == SegRelation::disjoint) continue;
                if (r.kind != SegRelation::overlap && i + 2 == a.size() && dist(r.point, a.back()) <= tol) continue;
                return false;
            }
        }
    }
    return true;
}

Point2 OpenedCurve::split_point(std::size_t i, double t, bool plus) const {
    double tp = times.at(i);
    if (t <= tp) return base[i];
    double frac = tp < 1 ? (t - tp) / (1 - tp) : 1;
    return base[i] + normal[i] * (side * frac * (plus ? 1 : -1));
}

PolyLine OpenedCurve::opened(double t, Point2 tip, bool plus) const {
    PolyLine out;
    for (std::size_t i = 0; i < base.size() && times[i] <= t; ++i) out.push_back(split_point(i, t, plus));
    out.push_back(tip);
    return dedupe(out);
}

CrossDeformation::CrossDeformation(Cross cross0, PolyLine alpha1, PolyLine alpha2, double epsilon, int samples,
                                   double side)
    : cross0_(std::move(cross0)) {
    if (!cross0_.simple()) throw std::invalid_argument("cross_deform: input cross is not simple");
    if (alpha1.empty() || alpha2.empty() || alpha1.front() != cross0_.arms[0].back() ||
        alpha2.front() != cross0_.arms[1].back() || alpha1.back() != alpha2.back())
        throw std::invalid_argument("cross_deform: connecting curves must run from m_1, m_2 to the target");
    for (auto* alpha : {&alpha1, &alpha2})
        for (int a = 2; a < 4; ++a) {
            auto& arm = cross0_.arms[a];
            for (std::size_t i = 0; i + 1 < alpha->size(); ++i)
                for (std::size_t j = 0; j + 1 < arm.size(); ++j)
                    if (auto r = segments_intersect((*alpha)[i], (*alpha)[i + 1], arm[j], arm[j + 1]);
                        r.kind != SegRelation::disjoint &&
                        !(r.kind == SegRelation::endpoint_touch && r.point == cross0_.center))
                        throw std::invalid_argument("cross_deform: connecting curves meet arms 3 or 4");
        }
    PolyLine psi0 = reversed(cross0_.arms[0]);
    psi0.insert(psi0.end(), cross0_.arms[1].begin() + 1, cross0_.arms[1].end());
    PolyLine psi1 = alpha1;
    auto back = reversed(alpha2);
    psi1.insert(psi1.end(), back.begin() + 1, back.end());
    psi0 = dedupe(psi0);
    psi1 = dedupe(psi1);
    if (simplify_path(psi0) == simplify_path(psi1) && alpha1.back() == cross0_.center) {
        constant_ = true;
        return;
    }
    curves_ = std::make_shared<HalfFixedCurves>(psi0, psi1, epsilon);
    frac0_ = polyline_length(cross0_.arms[0]) / polyline_length(psi0);
    frac1_ = polyline_length(alpha1) / polyline_length(psi1);

    PolyLine path;
    std::vector<double> times;
    for (int i = 0; i <= samples; ++i) {
        double t = double(i) / samples;
        Point2 p = center_path(t);
        if (path.empty() || p != path.back()) {
            path.push_back(p);
            times.push_back(t);
        }
    }
    if (path.size() < 2) {
        constant_ = true;
        return;
    }
    // drop straight-through samples
    PolyLine keep{path.front()};
    std::vector<double> keep_t{times.front()};
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        Point2 a = keep.back(), b = path[i], c = path[i + 1];
        if (orient2d(a, b, c) == 0 && dot(b - a, c - b) > 0) continue;
        keep.push_back(b);
        keep_t.push_back(times[i]);
    }
    keep.push_back(path.back());
    opened_.base.assign(keep.begin(), keep.end() - 1);
    opened_.times.assign(keep_t.begin(), keep_t.end());
    for (std::size_t i = 0; i < opened_.base.size(); ++i) {
        Point2 out = left_normal(keep[i + 1] - keep[i]);
        Point2 n = out;
        if (i > 0) {
            Point2 s = left_normal(keep[i] - keep[i - 1]) + out;
            if (norm(s) > 1e-12) n = s / norm(s);
        }
        opened_.normal.push_back(n);
    }
    Point2 dir = keep[1] - keep[0];
    plus_for_third_ = cross(dir, cross0_.arms[1][1] - cross0_.center) > 0;
    if (side > 0) {
        opened_.side = side;
        return;
    }
    // clearance of every vertex from the non-incident parts of Psi and the outer arms
    double clear = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < keep.size(); ++i) {
        clear = std::min(clear, dist(keep[i], keep[i + 1]));
        for (std::size_t j = 0; j + 1 < keep.size(); ++j)
            if (j + 1 < i || j > i) clear = std::min(clear, point_segment_distance(keep[i], keep[j], keep[j + 1]));
        if (i == 0) continue;
        for (int a = 2; a < 4; ++a) {
            auto& arm = cross0_.arms[a];
            for (std::size_t j = 0; j + 1 < arm.size(); ++j)
                clear = std::min(clear, point_segment_distance(keep[i], arm[j], arm[j + 1]));
        }
    }
    opened_.side = clear / 8;
    for (int it = 0; it < 12 && first_failure(16) >= 0; ++it) opened_.side /= 2;
}

Point2 CrossDeformation::center_path(double t) const {
    if (constant_) return cross0_.center;
    return eval_fraction((*curves_)(t), (1 - t) * frac0_ + t * frac1_);
}

Cross CrossDeformation::operator()(double t) const {
    if (constant_) return cross0_;
    t = std::clamp(t, 0.0, 1.0);
    PolyLine l = (*curves_)(t);
    double c = (1 - t) * frac0_ + t * frac1_;
    Cross out;
    out.center = eval_fraction(l, c);
    out.arms[0] = reversed(sub_polyline(l, 0, c));
    out.arms[1] = sub_polyline(l, c, 1);
    out.arms[0].front() = out.center;
    out.arms[1].front() = out.center;
    for (int a = 2; a < 4; ++a) {
        bool plus = (a == 2) == plus_for_third_;
        PolyLine arm = reversed(opened_.opened(t, out.center, plus));
        arm.insert(arm.end(), cross0_.arms[a].begin() + 1, cross0_.arms[a].end());
        out.arms[a] = dedupe(arm);
    }
    for (auto& arm : out.arms) arm = dedupe(arm);
    return out;
}

double CrossDeformation::first_failure(int samples) const {
    if (constant_) return -1;
    for (int i = 0; i <= samples; ++i) {
        double t = double(i) / samples;
        if (!(*this)(t).simple()) return t;
    }
    return -1;
}

Cross cross_deform(const Cross& cross0, Point2 target, const PolyLine& alpha1, const PolyLine& alpha2, double t) {
    if (alpha1.empty() || alpha1.back() != target) throw std::invalid_argument("cross_deform: alpha1 must end at target");
    CrossDeformation d(cross0, alpha1, alpha2);
    double bad = d.first_failure();
    if (bad >= 0) {
        std::ostringstream os;
        os << "cross_deform: intermediate cross not simple at t = " << bad;
        throw geometry_error(os.str());
    }
    return d(t);
}

namespace {

// nearest boundary point direction: inner normal of the closest edge or vertex
Point2 inward_at(const JordanPolygon& poly, Point2 p, double* distance) {
    std::size_t n = poly.size();
    double best = std::numeric_limits<double>::infinity();
    Point2 dir;
    for (std::size_t e = 0; e < n; ++e) {
        Point2 a = poly[e], b = poly[(e + 1) % n];
        Point2 d = b - a;
        double u = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
        double dd = dist(p, a + d * u);
        if (dd < best) {
            best = dd;
            if (u <= 0) dir = inner_normal(poly, e);
            else if (u >= 1) dir = inner_normal(poly, (e + 1) % n);
            else dir = left_normal(d);
        }
    }
    if (distance) *distance = best;
    return dir;
}

}  // namespace

Cross nudge_cross(const Cross& cross, const JordanPolygon& poly, double gap) {
    if (!(gap > 0)) throw std::invalid_argument("nudge_cross: gap must be positive");
    for (int attempt = 0; attempt < 40; ++attempt, gap /= 2) {
        Cross out = cross;
        double d = 0;
        Point2 dir = inward_at(poly, cross.center, &d);
        if (d < gap) out.center = cross.center + dir * gap;
        for (auto& arm : out.arms) {
            arm.front() = out.center;
            for (std::size_t j = 1; j + 1 < arm.size(); ++j) {
                Point2 v = inward_at(poly, arm[j], &d);
                if (d < gap) arm[j] = arm[j] + v * gap;
            }
        }
        if (out.simple() && out.clear_of(poly)) return out;
    }
    throw geometry_error("nudge_cross: no gap clears the boundary");
}

std::array<int, 4> cross_contacts(const Cross& a, const Cross& b) {
    std::array<int, 4> out{};
    std::vector<Point2> pts = a.arms[0];
    for (auto& arm : b.arms) pts.insert(pts.end(), arm.begin(), arm.end());
    double tol = 1e-12 * scale_of(pts);
    for (int i = 0; i < 4; ++i) {
        std::vector<Point2> found;
        auto& p = a.arms[i];
        for (int j = 0; j < 4; ++j) {
            auto& q = b.arms[j];
            for (std::size_t s = 0; s + 1 < p.size(); ++s)
                for (std::size_t r = 0; r + 1 < q.size(); ++r) {
                    auto x = segments_intersect(p[s], p[s + 1], q[r], q[r + 1]);
                    if (x.kind == SegRelation::disjoint) continue;
                    Point2 pt = x.kind == SegRelation::overlap ? p[s] : x.point;
                    if (dist(pt, p.back()) <= tol && dist(pt, q.back()) <= tol) continue;
                    bool dup = false;
                    for (auto& f : found) dup = dup || dist(f, pt) <= tol;
                    if (!dup) found.push_back(pt);
                }
        }
        out[i] = static_cast<int>(found.size());
    }
    return out;
}

TFixReport build_t_fix(const Cross& t1, const Cross& t2, const JordanPolygon& poly, Point2 corner) {
    auto ends = t1.ends();
    double tol = 1e-12 * scale_of(poly.vertices);
    for (int i = 0; i < 4; ++i)
        if (dist(ends[i], t2.ends()[i]) > tol) throw std::invalid_argument("build_t_fix: crosses have different ends");
    std::vector<Point2> ring = poly.vertices;
    auto place = [&](Point2 p) {
        for (std::size_t i = 0; i < ring.size(); ++i)
            if (dist(ring[i], p) <= tol) return;
        for (std::size_t i = 0; i < ring.size(); ++i)
            if (point_segment_distance(p, ring[i], ring[(i + 1) % ring.size()]) <= tol) {
                ring.insert(ring.begin() + static_cast<long>(i) + 1, p);
                return;
            }
        throw std::invalid_argument("build_t_fix: end point not on the boundary");
    };
    for (auto e : ends) place(e);
    place(corner);
    JordanPolygon ccw{ring};
    std::size_t n = ring.size();
    auto index_of = [&](Point2 p) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (dist(ring[i], p) < dist(ring[best], p)) best = i;
        return best;
    };
    std::array<std::size_t, 4> im;
    for (int i = 0; i < 4; ++i) im[i] = index_of(ends[i]);
    std::size_t ic = index_of(corner);
    // traversal direction in which the ends appear as m1, corner, m2, m3, m4
    int dir = 0;
    for (int d : {+1, -1}) {
        auto pos = [&](std::size_t i) { return ((long(i) - long(im[0])) * d % long(n) + long(n)) % long(n); };
        if (pos(ic) > 0 && pos(ic) < pos(im[1]) && pos(im[1]) < pos(im[2]) && pos(im[2]) < pos(im[3])) {
            dir = d;
            break;
        }
    }
    if (dir == 0) throw std::invalid_argument("build_t_fix: corner must lie between m_1 and m_2");
    auto step = [&](std::size_t i, int d) { return (i + n + static_cast<std::size_t>(d + static_cast<int>(n))) % n; };
    auto edge_normal = [&](std::size_t a, std::size_t b) {
        // inner normal of the boundary edge between ring[a], ring[b] (in either order)
        if ((a + 1) % n == b) return left_normal(ring[b] - ring[a]);
        return left_normal(ring[a] - ring[b]);
    };
    auto miter = [&](std::size_t i) {
        Point2 nb = inner_normal(ccw, i);
        Point2 e = edge_normal(i, (i + 1) % n);
        return nb / std::max(0.25, dot(nb, e));
    };
    auto offset = [&](std::size_t i, double d) { return ring[i] + miter(i) * d; };
    double diam = scale_of(ring);
    double depth = 0.05 * diam;
    for (int attempt = 0; attempt < 40; ++attempt, depth /= 2) {
        std::size_t nr = step(ic, dir), nl = step(ic, -dir);
        double eta = std::min({3 * depth, 0.3 * dist(ring[ic], ring[nr]), 0.3 * dist(ring[ic], ring[nl])});
        Point2 cr = ring[ic] + (ring[nr] - ring[ic]) / dist(ring[nr], ring[ic]) * eta;
        Point2 cl = ring[ic] + (ring[nl] - ring[ic]) / dist(ring[nl], ring[ic]) * eta;
        Point2 ncr = edge_normal(ic, nr), ncl = edge_normal(ic, nl);
        Cross fix;
        fix.center = offset(ic, 1.5 * depth);
        auto route = [&](Point2 start, int d, std::size_t stop, double dep) {
            PolyLine arm{fix.center, start};
            for (std::size_t i = step(ic, d); i != stop; i = step(i, d)) arm.push_back(offset(i, dep));
            arm.push_back(ring[stop]);
            return dedupe(arm);
        };
        fix.arms[0] = route(cl + ncl * depth, -dir, im[0], depth);
        fix.arms[1] = route(cr + ncr * depth, dir, im[1], depth);
        fix.arms[2] = route(cr + ncr * (2 * depth), dir, im[2], 2 * depth);
        fix.arms[3] = route(cl + ncl * (2 * depth), -dir, im[3], 2 * depth);
        for (int i = 0; i < 4; ++i) fix.arms[i].back() = ends[i];
        if (!fix.simple() || !fix.clear_of(ccw)) continue;
        auto c1 = cross_contacts(fix, t1), c2 = cross_contacts(fix, t2);
        std::array<int, 4> want{0, 0, 1, 1};
        if (c1 != want || c2 != want) continue;
        return {fix, depth, c1, c2};
    }
    std::ostringstream os;
    os << "build_t_fix: cannot route; smallest depth tried " << depth * 2;
    throw geometry_error(os.str());
}

TFixReport build_t_fix(const Cross& t1, const Cross& t2, const JordanPolygon& poly) {
    auto ends = t1.ends();
    double tol = 1e-12 * scale_of(poly.vertices);
    // ring with the ends marked: -1 for polygon vertices, arm index otherwise
    std::vector<std::pair<Point2, int>> ring;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point2 p = poly[i], q = poly[(i + 1) % n];
        int mark = -1;
        for (int k = 0; k < 4; ++k)
            if (dist(ends[k], p) <= tol) mark = k;
        ring.push_back({p, mark});
        std::vector<std::pair<double, int>> inside;
        for (int k = 0; k < 4; ++k) {
            double u = dot(ends[k] - p, q - p) / dot(q - p, q - p);
            if (dist(ends[k], p) > tol && dist(ends[k], q) > tol && point_segment_distance(ends[k], p, q) <= tol)
                inside.push_back({u, k});
        }
        std::sort(inside.begin(), inside.end());
        for (auto& [u, k] : inside) ring.push_back({ends[k], k});
    }
    std::size_t m = ring.size(), start = m;
    for (std::size_t i = 0; i < m; ++i)
        if (ring[i].second == 0) start = i;
    if (start == m) throw std::invalid_argument("build_t_fix: m_1 not on the boundary");
    for (int d : {+1, -1}) {
        std::optional<Point2> corner;
        for (std::size_t k = 1; k < m; ++k) {
            auto& [p, mark] = ring[(start + m + static_cast<std::size_t>(d) * k) % m];
            if (mark < 0) {
                if (!corner) corner = p;
                continue;
            }
            if (mark == 1 && corner) return build_t_fix(t1, t2, poly, *corner);
            break;
        }
    }
    throw std::invalid_argument("build_t_fix: no polygon corner between m_1 and m_2");
}

// ---------------------------------------------------------------- grid level

namespace {

std::vector<Point2> rotate_to(const std::vector<Point2>& ring, std::size_t start) {
    std::vector<Point2> r(ring.begin() + static_cast<long>(start), ring.end());
    r.insert(r.end(), ring.begin(), ring.begin() + static_cast<long>(start));
    return r;
}

std::size_t index_of_point(const std::vector<Point2>& ring, Point2 p) {
    for (std::size_t i = 0; i < ring.size(); ++i)
        if (ring[i] == p) return i;
    throw geometry_error("grid_level_homotopy: lost a corner");
}

// insert the arc-length midpoint of ring[a .. b] (cyclic) and return its point
Point2 insert_midpoint(std::vector<Point2>& ring, Point2 from, Point2 to) {
    std::size_t a = index_of_point(ring, from);
    auto r = rotate_to(ring, a);
    std::size_t b = index_of_point(r, to);
    PolyLine chain(r.begin(), r.begin() + static_cast<long>(b) + 1);
    Point2 m = eval_fraction(chain, 0.5);
    for (auto& p : chain)
        if (p == m) return m;
    double total = polyline_length(chain), acc = 0;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        double l = dist(chain[i], chain[i + 1]);
        if (acc + l >= total / 2) {
            r.insert(r.begin() + static_cast<long>(i) + 1, m);
            break;
        }
        acc += l;
    }
    ring = r;
    return m;
}

}  // namespace

GridLevelHomotopy::GridLevelHomotopy(std::vector<Point2> gamma, std::array<int, 4> corners, std::vector<Point2> target,
                                     std::array<int, 4> target_corners, double epsilon)
    : initial_(gamma), final_(target) {
    std::array<Point2, 4> cur, goal;
    for (int i = 0; i < 4; ++i) {
        cur[i] = gamma.at(static_cast<std::size_t>(corners[i]));
        goal[i] = target.at(static_cast<std::size_t>(target_corners[i]));
    }
    auto make_stage = [&](std::vector<Point2>& ring, Point2 from, Point2 to, PolyLine replacement) {
        Stage st;
        st.before = rotate_to(ring, index_of_point(ring, from));
        st.lo = 0;
        st.hi = index_of_point(st.before, to);
        PolyLine chain(st.before.begin(), st.before.begin() + static_cast<long>(st.hi) + 1);
        std::vector<Point2> rest(st.before.begin() + static_cast<long>(st.hi) + 1, st.before.end());
        std::vector<Point2> after = replacement;
        after.insert(after.end(), rest.begin(), rest.end());
        if (simplify_path(chain) == simplify_path(replacement)) {
            st.kind = "constant";
        } else {
            bool done = false;
            try {
                auto curves = std::make_shared<HalfFixedCurves>(chain, replacement, epsilon);
                bool ok = is_simple(after);
                for (auto& p : rest) ok = ok && point_in_polygon(curves->region(), p) == -1;
                st.curves = curves;
                st.kind = "half-fixed";
                for (int i = 1; ok && i < 16; ++i) ok = is_simple(evaluate(st, i / 16.0));
                done = ok;
            } catch (const geometry_error&) {
            }
            if (!done) {
                st.curves.reset();
                auto f0 = arc_fractions(chain), f1 = arc_fractions(replacement);
                std::vector<double> u(f0.begin(), f0.end());
                u.insert(u.end(), f1.begin(), f1.end());
                std::sort(u.begin(), u.end());
                u.erase(std::unique(u.begin(), u.end()), u.end());
                for (double x : u) {
                    st.from.push_back(eval_fraction(chain, x));
                    st.to.push_back(eval_fraction(replacement, x));
                }
                st.from.front() = st.to.front() = chain.front();
                st.from.back() = st.to.back() = chain.back();
                MovingChain mc;
                mc.from = st.from;
                mc.to = st.to;
                mc.from.insert(mc.from.end(), rest.begin(), rest.end());
                mc.to.insert(mc.to.end(), rest.begin(), rest.end());
                mc.closed = true;
                auto cert = certify_linear_motion({mc});
                if (!cert.ok) {
                    std::ostringstream os;
                    os << "grid_level_homotopy: stage " << stages_.size() << " cannot be certified (" << cert.what
                       << " at lambda " << cert.lambda << ")";
                    throw geometry_error(os.str());
                }
                st.kind = "linear";
            }
        }
        stages_.push_back(st);
        ring = after;
    };
    std::vector<Point2> ring = gamma;
    for (int i = 0; i < 4; ++i) {
        Point2 mb = insert_midpoint(ring, cur[(i + 3) % 4], cur[i]);
        Point2 ma = insert_midpoint(ring, cur[i], cur[(i + 1) % 4]);
        if (goal[i] == cur[i]) {
            Stage st;
            st.before = ring;
            st.kind = "constant";
            stages_.push_back(st);
            continue;
        }
        make_stage(ring, mb, ma, {mb, goal[i], ma});
        cur[i] = goal[i];
    }
    for (int i = 0; i < 4; ++i) {
        auto r = rotate_to(target, static_cast<std::size_t>(target_corners[i]));
        std::size_t b = index_of_point(r, goal[(i + 1) % 4]);
        PolyLine side(r.begin(), r.begin() + static_cast<long>(b) + 1);
        make_stage(ring, goal[i], goal[(i + 1) % 4], side);
    }
}

std::vector<Point2> GridLevelHomotopy::evaluate(const Stage& s, double tau) const {
    if (s.kind == "constant") return s.before;
    std::vector<Point2> rest(s.before.begin() + static_cast<long>(s.hi) + 1, s.before.end());
    std::vector<Point2> out;
    if (s.kind == "half-fixed") {
        out = (*s.curves)(tau);
    } else {
        for (std::size_t i = 0; i < s.from.size(); ++i) out.push_back(lerp(s.from[i], s.to[i], tau));
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

std::vector<Point2> GridLevelHomotopy::operator()(double t) const {
    if (t <= 0) return initial_;
    if (t >= 1) return final_;
    std::size_t k = std::min<std::size_t>(stages_.size() - 1, static_cast<std::size_t>(t * 8));
    return evaluate(stages_[k], t * 8 - double(k));
}

std::vector<std::string> GridLevelHomotopy::stage_kinds() const {
    std::vector<std::string> out;
    for (auto& s : stages_) out.push_back(s.kind);
    return out;
}

std::vector<Point2> grid_level_homotopy(const std::vector<Point2>& gamma, std::array<int, 4> corners,
                                        const std::vector<Point2>& target, std::array<int, 4> target_corners,
                                        double t) {
    return GridLevelHomotopy(gamma, corners, target, target_corners)(t);
}

}  // namespace sobext
