#include "sobext/injectivizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sobext/parallel.hpp"

namespace sobext {

double f_star(double x, double flat, double fx) {
    if (x <= 0) return 0;
    if (flat > 0 && x <= flat) return x / (2 * flat);
    return (fx + 1) / 2;
}

MonotoneReparam MonotoneReparam::from_samples(std::vector<double> x, std::vector<double> f) {
    if (x.size() != f.size() || x.size() < 2) throw std::invalid_argument("MonotoneReparam: need matching samples");
    if (x.front() != 0 || x.back() != 1) throw std::invalid_argument("MonotoneReparam: domain must be [0,1]");
    if (f.front() != 0 || f.back() != 1) throw std::invalid_argument("MonotoneReparam: range must be [0,1]");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) throw std::invalid_argument("MonotoneReparam: samples must increase");
        if (f[i] < f[i - 1]) throw std::invalid_argument("MonotoneReparam: not monotone");
    }
    return {std::move(x), std::move(f)};
}

double MonotoneReparam::flat() const {
    double a = 0;
    for (std::size_t i = 0; i < x.size() && f[i] == 0; ++i) a = x[i];
    return a;
}

double MonotoneReparam::operator()(double s) const {
    if (s <= x.front()) return f.front();
    if (s >= x.back()) return f.back();
    auto it = std::upper_bound(x.begin(), x.end(), s);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    double u = (s - x[i]) / (x[i + 1] - x[i]);
    return f[i] + u * (f[i + 1] - f[i]);
}

double MonotoneReparam::star(double s) const { return f_star(s, flat(), (*this)(s)); }

std::vector<NormalSegment> normal_segments(const JordanPolygon& poly, double epsilon) {
    if (!(epsilon >= 0 && epsilon < 1)) throw std::invalid_argument("normal_segments: epsilon must lie in [0,1)");
    double D = 0;
    if (poly.size() >= 4) {
        D = min_nonadjacent_side_distance(poly);
    } else {  // triangle: every vertex against the opposite side
        D = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < poly.size(); ++i)
            D = std::min(D, point_segment_distance(poly[i], poly.at_wrap(long(i) + 1), poly.at_wrap(long(i) + 2)));
    }
    std::vector<NormalSegment> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        NormalSegment s;
        s.index = i;
        s.vertex = poly[i];
        s.tip = poly[i] + inner_normal(poly, i) * (epsilon * D / 3);
        s.epsilon = epsilon;
        s.D = D;
        out.push_back(s);
    }
    return out;
}

namespace {

double bbox_scale(const JordanPolygon& p) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto& v : p.vertices) {
        x0 = std::min(x0, v.x), x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
    }
    return std::max(x1 - x0, y1 - y0);
}

enum class HitKind { miss, through, cross };

struct Hit {
    HitKind kind = HitKind::miss;
    double d = 0;
    int vertex = -1;   // through: vertex at P; cross: vertex equal to X, if any
    int segment = -1;  // cross: segment containing X
    int count = 0;
    Point2 point;
};

Hit probe(const PolyLine& l, const NormalSegment& seg, double tol) {
    Hit h;
    for (std::size_t i = 0; i < l.size(); ++i)
        if (dist(l[i], seg.vertex) <= tol) {
            h.kind = HitKind::through;
            h.vertex = static_cast<int>(i);
            h.point = seg.vertex;
            h.count = 1;
            return h;
        }
    std::vector<Point2> found;
    for (std::size_t i = 0; i + 1 < l.size(); ++i) {
        auto r = segments_intersect(l[i], l[i + 1], seg.vertex, seg.tip);
        if (r.kind == SegRelation::disjoint) continue;
        Point2 x = r.point;
        if (r.kind == SegRelation::overlap) x = dist(l[i], seg.vertex) < dist(l[i + 1], seg.vertex) ? l[i] : l[i + 1];
        if (dist(x, seg.vertex) <= tol) continue;
        bool dup = false;
        for (auto& q : found) dup = dup || dist(q, x) <= tol;
        if (dup) continue;
        found.push_back(x);
        if (h.kind == HitKind::miss) {
            h.kind = HitKind::cross;
            h.point = x;
            h.d = dist(x, seg.vertex);
            h.segment = static_cast<int>(i);
            if (dist(x, l[i]) <= tol) h.vertex = static_cast<int>(i);
            else if (dist(x, l[i + 1]) <= tol) h.vertex = static_cast<int>(i + 1);
        }
    }
    h.count = static_cast<int>(found.size());
    return h;
}

}  // namespace

ModifiedFamily::ModifiedFamily(CurveFamily family, JordanPolygon region,
                               const std::vector<std::optional<double>>& anchors, const ModifyOptions& opt)
    : family_(std::move(family)), region_(std::move(region)) {
    if (anchors.size() != region_.size()) throw std::invalid_argument("modify: one anchor slot per vertex");
    if (opt.scan < 4) throw std::invalid_argument("modify: scan too coarse");
    auto segs = normal_segments(region_, opt.epsilon);
    double tol = 1e-12 * bbox_scale(region_);
    double range = family_.hi - family_.lo;
    double step = range / opt.scan, nudge = 1e-7 * range;
    auto inside = [&](double s) { return s >= family_.lo && s <= family_.hi; };
    auto status = [&](std::size_t v, double s) { return probe(family_.curve(s), segs[v], tol); };

    for (std::size_t v = 0; v < region_.size(); ++v) {
        VertexPlan plan;
        plan.seg = segs[v];
        if (!anchors[v] || opt.epsilon == 0) {
            plans_.push_back(plan);
            continue;
        }
        double a = std::clamp(*anchors[v], family_.lo, family_.hi);
        plan.anchor = plan.flat_end = plan.reach = a;
        int dir = 0;
        for (int d : {+1, -1}) {
            double s = a + d * nudge;
            if (inside(s) && status(v, s).kind == HitKind::through) {
                dir = d;
                break;
            }
        }
        if (dir == 0) {  // no flat part: the curves already cross PV_P injectively
            plans_.push_back(plan);
            continue;
        }
        // walk away from the anchor: through ... cross ... miss
        double last_through = a + dir * nudge, last_hit = last_through;
        double first_cross = std::numeric_limits<double>::quiet_NaN(), first_miss = first_cross;
        for (int i = 1;; ++i) {
            double s = a + dir * step * i;
            if (!inside(s)) s = dir > 0 ? family_.hi : family_.lo;
            auto h = status(v, s);
            if (h.kind == HitKind::cross && h.count > 1) {
                std::ostringstream os;
                os << "modify: curve " << s << " crosses the normal segment at vertex " << v << " " << h.count << " times";
                throw geometry_error(os.str());
            }
            if (h.kind == HitKind::through) {
                if (!std::isnan(first_cross)) throw geometry_error("modify: curve returns to a vertex after leaving it");
                last_through = last_hit = s;
            } else if (h.kind == HitKind::cross) {
                if (std::isnan(first_cross)) first_cross = s;
                last_hit = s;
            } else {
                first_miss = s;
                break;
            }
            if (s == family_.lo || s == family_.hi) break;
        }
        auto bisect = [&](double good, double bad, auto pred) {
            for (int it = 0; it < 60 && good != bad; ++it) {
                double mid = 0.5 * (good + bad);
                if (mid == good || mid == bad) break;
                (pred(mid) ? good : bad) = mid;
            }
            return good;
        };
        double bad_flat = !std::isnan(first_cross) ? first_cross : first_miss;
        plan.flat_end = std::isnan(bad_flat)
                            ? last_through
                            : bisect(last_through, bad_flat, [&](double s) { return status(v, s).kind == HitKind::through; });
        plan.reach = std::isnan(first_miss)
                         ? last_hit
                         : bisect(last_hit, first_miss, [&](double s) { return status(v, s).kind != HitKind::miss; });
        plan.active = plan.reach != plan.anchor;
        plans_.push_back(plan);
    }
}

double ModifiedFamily::offset(std::size_t i, double s) const {
    auto& p = plans_.at(i);
    if (!p.active) return -1;
    double span = p.reach - p.anchor;
    double x = (s - p.anchor) / span;
    if (x < 0 || x > 1) return -1;
    double tol = 1e-12 * bbox_scale(region_);
    auto h = probe(family_.curve(s), p.seg, tol);
    if (h.kind == HitKind::miss) return -1;
    double len = p.seg.length();
    double f = std::clamp(h.d / len, 0.0, 1.0);
    return f_star(x, (p.flat_end - p.anchor) / span, f) * len;
}

PolyLine ModifiedFamily::operator()(double s) const {
    PolyLine l = family_.curve(s);
    double tol = 1e-12 * bbox_scale(region_);
    std::vector<std::pair<int, Point2>> replace, insert;
    for (auto& p : plans_) {
        if (!p.active) continue;
        double span = p.reach - p.anchor;
        double x = (s - p.anchor) / span;
        if (x <= 0 || x > 1) continue;
        auto h = probe(l, p.seg, tol);
        if (h.kind == HitKind::miss) continue;
        double len = p.seg.length();
        double f = std::clamp(h.d / len, 0.0, 1.0);
        double r = f_star(x, (p.flat_end - p.anchor) / span, f);
        Point2 moved = p.seg.vertex + (p.seg.tip - p.seg.vertex) * r;
        if (dist(moved, h.point) <= tol) continue;
        if (h.vertex >= 0)
            replace.push_back({h.vertex, moved});
        else
            insert.push_back({h.segment, moved});
    }
    for (auto& [i, q] : replace) l[static_cast<std::size_t>(i)] = q;
    std::sort(insert.begin(), insert.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (auto& [i, q] : insert) l.insert(l.begin() + i + 1, q);
    return l;
}

CurveFamily ModifiedFamily::modified() const {
    auto self = std::make_shared<ModifiedFamily>(*this);
    return {[self](double s) { return (*self)(s); }, family_.lo, family_.hi};
}

ModifiedFamily modify_curves(const ShortestCurveExtension& ext, const ModifyOptions& opt) {
    const auto& poly = ext.domain().polygon();
    const auto& bm = ext.boundary();
    std::vector<std::optional<double>> anchors(poly.size());
    for (std::size_t v = 0; v < poly.size(); ++v)
        for (std::size_t j = 0; j < bm.knots.size(); ++j)
            if (bm.images[j] == poly[v]) {
                Point2 uv = square_point(bm.knots[j]);
                anchors[v] = uv.y - uv.x;
                break;
            }
    CurveFamily fam{[ext](double s) { return ext.leaf(s); }, -1, 1};
    return ModifiedFamily(fam, poly, anchors, opt);
}

nlohmann::json Violation::to_json() const {
    return {{"type", type}, {"s_values", s_values}, {"location", {location.x, location.y}}};
}

nlohmann::json InjectivityReport::to_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (auto& x : violations) v.push_back(x.to_json());
    return {{"clean", clean()}, {"curves", curves}, {"pairs", pairs}, {"violations", v}};
}

namespace {

struct BBox {
    double x0, y0, x1, y1;
    static BBox of(Point2 a, Point2 b) {
        return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
    }
    bool meets(const BBox& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
};

std::optional<Point2> boundary_contact(const PolyLine& l, const JordanPolygon& poly, double tol) {
    std::size_t n = poly.size();
    for (std::size_t i = 0; i + 1 < l.size(); ++i) {
        auto bi = BBox::of(l[i], l[i + 1]);
        for (std::size_t e = 0; e < n; ++e) {
            Point2 p = poly[e], q = poly[(e + 1) % n];
            if (!bi.meets(BBox::of(p, q))) continue;
            auto r = segments_intersect(l[i], l[i + 1], p, q);
            if (r.kind == SegRelation::disjoint) continue;
            if (r.kind != SegRelation::overlap) {
                if (i == 0 && dist(r.point, l.front()) <= tol) continue;
                if (i + 2 == l.size() && dist(r.point, l.back()) <= tol) continue;
            }
            return r.kind == SegRelation::overlap ? l[i + 1] : r.point;
        }
    }
    return std::nullopt;
}

std::optional<Point2> curve_contact(const PolyLine& a, const PolyLine& b) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        auto ba = BBox::of(a[i], a[i + 1]);
        for (std::size_t j = 0; j + 1 < b.size(); ++j) {
            if (!ba.meets(BBox::of(b[j], b[j + 1]))) continue;
            auto r = segments_intersect(a[i], a[i + 1], b[j], b[j + 1]);
            if (r.kind == SegRelation::disjoint) continue;
            return r.kind == SegRelation::overlap ? a[i] : r.point;
        }
    }
    if (a.size() == 1 && b.size() == 1 && a[0] == b[0]) return a[0];
    return std::nullopt;
}

}  // namespace

InjectivityReport verify_injective(const CurveFamily& family, const JordanPolygon& region, int pairs,
                                   std::uint64_t seed, int max_violations) {
    InjectivityReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(family.lo, family.hi);
    double tol = 1e-12 * bbox_scale(region);
    std::vector<double> s1(static_cast<std::size_t>(pairs)), s2(s1.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        s1[i] = uni(rng);
        do s2[i] = uni(rng);
        while (s2[i] == s1[i]);
    }
    std::vector<std::vector<Violation>> found(s1.size());
    parallel_for(s1.size(), [&](std::size_t i) {
        auto a = family.curve(s1[i]), b = family.curve(s2[i]);
        if (auto p = boundary_contact(a, region, tol)) found[i].push_back({"boundary", {s1[i]}, *p});
        if (auto p = boundary_contact(b, region, tol)) found[i].push_back({"boundary", {s2[i]}, *p});
        if (auto p = curve_contact(a, b)) found[i].push_back({"crossing", {s1[i], s2[i]}, *p});
    });
    rep.curves = 2 * pairs;
    rep.pairs = pairs;
    for (auto& f : found)
        for (auto& v : f)
            if (static_cast<int>(rep.violations.size()) < max_violations) rep.violations.push_back(v);
    return rep;
}

double Schedule::operator()(double s) const {
    if (t.empty() || s <= t.front() || s >= t.back()) return 0;
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    if (t[i + 1] == t[i]) return value[i + 1];
    double u = (s - t[i]) / (t[i + 1] - t[i]);
    return value[i] + u * (value[i + 1] - value[i]);
}

double lower_bound_D(const std::function<double(double)>& D, double t0, double t1, int resolution_exp) {
    double step = std::ldexp(1.0, -resolution_exp);
    double best = std::min(D(t0), D(t1));
    for (double t = std::ceil(t0 / step) * step; t < t1; t += step) best = std::min(best, D(t));
    return 0.9 * best;
}

Schedule vertex_schedule(const std::vector<std::pair<double, double>>& alive,
                         const std::function<double(double)>& D, double delta0, double ramp) {
    auto iv = alive;
    std::sort(iv.begin(), iv.end());
    Schedule s;
    for (auto [b, d] : iv) {
        if (!(d > b)) throw std::invalid_argument("vertex_schedule: empty life interval");
        if (!s.t.empty() && b < s.t.back()) throw std::invalid_argument("vertex_schedule: overlapping intervals");
        double level = delta0 * lower_bound_D(D, b, d);
        double r = std::min(ramp, (d - b) / 2);
        s.t.insert(s.t.end(), {b, b + r, d - r, d});
        s.value.insert(s.value.end(), {0, level, level, 0});
    }
    return s;
}

PLMap2 square_mesh(int n) {
    if (n < 1) throw std::invalid_argument("square_mesh: n >= 1");
    PLMap2 m;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) m.domain.push_back({double(i) / n, double(j) / n});
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    m.image = m.domain;
    return m;
}

PLMap2 sample_slice(const std::function<Point2(Point2)>& h, int n) {
    auto m = square_mesh(n);
    for (auto& p : m.image) p = h(p);
    return m;
}

BlendReport blend_check(const PLMap2& a, const PLMap2& b) {
    if (a.domain.size() != b.domain.size() || a.triangles.size() != b.triangles.size())
        throw std::invalid_argument("blend: meshes differ");
    BlendReport rep;
    rep.min_det = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < a.triangles.size(); ++f) {
        auto [i0, i1, i2] = a.triangles[f];
        double area = cross(a.domain[i1] - a.domain[i0], a.domain[i2] - a.domain[i0]);
        Point2 a1 = a.image[i1] - a.image[i0], a2 = a.image[i2] - a.image[i0];
        Point2 b1 = b.image[i1] - b.image[i0], b2 = b.image[i2] - b.image[i0];
        // det((1-tau) A + tau B) is quadratic in tau
        double c0 = cross(a1, a2), c1 = cross(b1, b2), m = cross(a1, b2) + cross(b1, a2);
        double lin = m - 2 * c0, quad = c0 - m + c1;
        std::vector<double> taus{0, 1};
        if (quad != 0) {
            double v = -lin / (2 * quad);
            if (v > 0 && v < 1) taus.push_back(v);
        }
        for (double t : taus) {
            double d = (c0 + t * (lin + t * quad)) / area;
            if (d < rep.min_det) {
                rep.min_det = d;
                rep.tau = t;
                rep.facet = static_cast<int>(f);
            }
        }
    }
    rep.ok = rep.min_det > 0;
    return rep;
}

PLMap2 blend_levels(const PLMap2& a, const PLMap2& b, double tau) {
    auto rep = blend_check(a, b);
    if (!rep.ok) {
        std::ostringstream os;
        os << "blend_levels: facet " << rep.facet << " reaches determinant " << rep.min_det << " at tau " << rep.tau;
        throw geometry_error(os.str());
    }
    for (std::size_t i = 0; i < a.domain.size(); ++i) {
        Point2 d = a.domain[i];
        bool edge = d.x == 0 || d.y == 0 || d.x == 1 || d.y == 1;
        if (edge && dist(a.image[i], b.image[i]) > 1e-9) throw std::invalid_argument("blend_levels: boundary values differ");
    }
    PLMap2 out = a;
    for (std::size_t i = 0; i < out.image.size(); ++i) out.image[i] = lerp(a.image[i], b.image[i], tau);
    return out;
}

double rescale_interval(double t, double lo, double hi) {
    double mid = 0.5 * (lo + hi);
    return mid + (t - lo) / (hi - lo) * (hi - mid);
}

double select_tk_star(const std::function<PLMap2(double)>& slice, double tk, int max_m) {
    auto base = slice(tk);
    for (int m = 1; m <= max_m; ++m) {
        double cand = tk - std::ldexp(1.0, -m);
        if (blend_check(base, slice(cand)).ok) return cand;
    }
    throw geometry_error("select_tk_star: no certified blend partner");
}

}  // namespace sobext
