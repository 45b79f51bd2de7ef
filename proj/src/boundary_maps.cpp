#include "sobext/boundary_maps.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <fstream>

namespace sobext {

double op_norm(const Mat2& m) {
    double a = m[0][0], b = m[0][1], c = m[1][0], d = m[1][1];
    double s = 0.5 * (a * a + b * b + c * c + d * d);
    double det = a * d - b * c;
    return std::sqrt(s + std::sqrt(std::max(0.0, s * s - det * det)));
}

Point2 BoundaryMap::eval(Point2 x) const {
    if (!domain().contains(x, 1e-12)) throw geometry_error(name() + ": point outside the domain");
    return eval_unchecked(x);
}

Mat2 BoundaryMap::jacobian(Point2 x) const {
    const double h = 1e-6;
    Box d = domain();
    auto diff = [&](Point2 dir) {
        Point2 p = x + dir * h, m = x - dir * h;
        double span = 2 * h;
        if (!d.contains(p)) { p = x; span = h; }
        if (!d.contains(m)) { m = x; span = h; }
        return (eval_unchecked(p) - eval_unchecked(m)) / span;
    };
    Point2 dx = diff({1, 0}), dy = diff({0, 1});
    return {{{dx.x, dy.x}, {dx.y, dy.y}}};
}

nlohmann::json AffineMap::to_json() const {
    return {{"type", "affine"},
            {"A", {{a_[0][0], a_[0][1]}, {a_[1][0], a_[1][1]}}},
            {"b", {b_.x, b_.y}}};
}

namespace {

// fractional part of |x| * 10^n, exact up to the final rounding
double frac_scaled(double x, int n) {
    using boost::multiprecision::cpp_int;
    x = std::abs(x);
    if (x == 0) return 0;
    int e;
    double m = std::frexp(x, &e);
    auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
    int exp2 = e - 53 + n;  // x * 10^n = mant * 5^n * 2^exp2
    double frac;
    if (exp2 >= 0) {
        frac = 0;
    } else if (-exp2 <= 64) {
        int bits = -exp2;
        std::uint64_t p = mant;
        for (int i = 0; i < n; ++i) p *= 5u;  // wraps mod 2^64
        if (bits < 64) p &= (std::uint64_t{1} << bits) - 1;
        frac = std::ldexp(static_cast<double>(p), -bits);
    } else {
        int bits = -exp2;
        cpp_int p = cpp_int(mant) * boost::multiprecision::pow(cpp_int(5), n);
        cpp_int mod = cpp_int(1) << bits;
        p %= mod;
        frac = std::ldexp(p.convert_to<double>(), -bits);
    }
    return frac;
}

}  // namespace

double saw_scaled(double x, int n) {
    double frac = frac_scaled(x, n);
    return frac <= 0.5 ? 2 * frac : 2 - 2 * frac;
}

std::vector<int> SawShear::frequencies_for(int truncation, double q) {
    if (truncation < 1) throw std::invalid_argument("saw: truncation must be >= 1");
    if (q <= 1) throw std::invalid_argument("saw: exponent must exceed 1");
    std::vector<int> n;
    const double l2 = std::log10(2.0), l8 = std::log10(8.0);
    for (int k = 1; k <= truncation; ++k) {
        int cand = n.empty() ? 1 : n.back() + 1;
        for (;; ++cand) {
            bool first = -k * q + (q - 1) * 0.5 * cand >= k * l2 - 1e-12;
            bool second = true;
            if (!n.empty()) {
                double s = 0;
                for (std::size_t j = 0; j < n.size(); ++j)
                    s += 2 * std::pow(10.0, n[j] - static_cast<double>(j + 1));
                second = std::log10(s) - 0.5 * cand <= -k - l8 + 1e-12;
            }
            if (first && second) break;
        }
        n.push_back(cand);
    }
    return n;
}

SawShear::SawShear(int truncation, double q) : n_(frequencies_for(truncation, q)), q_(q) {}

double SawShear::shear(double x1) const {
    double s = 0;
    for (std::size_t j = 0; j < n_.size(); ++j)
        s += std::pow(10.0, -static_cast<double>(j + 1)) * saw_scaled(x1, n_[j]);
    return s;
}

Point2 SawShear::eval_unchecked(Point2 x) const { return {x.x, x.y + shear(x.x)}; }

Mat2 SawShear::jacobian(Point2 x) const {
    double d = 0;
    for (std::size_t j = 0; j < n_.size(); ++j) {
        // the saw rises on the first half of each period
        bool rising = frac_scaled(x.x, n_[j]) < 0.5;
        double slope = 2 * std::pow(10.0, n_[j] - static_cast<double>(j + 1));
        if (x.x < 0) rising = !rising;
        d += rising ? slope : -slope;
    }
    return {{{1, 0}, {d, 1}}};
}

std::vector<double> SawShear::kinks_x(double lo, double hi) const {
    double step = 0.5 * std::pow(10.0, -n_.back());
    double count = (hi - lo) / step;
    if (!(count < 4e6)) return {};
    std::vector<double> out;
    for (double k = std::ceil(lo / step); k * step <= hi; k += 1) out.push_back(k * step);
    return out;
}

nlohmann::json SawShear::to_json() const {
    return {{"type", "saw"}, {"J", truncation()}, {"q", q_}, {"frequencies", n_}};
}

Point2 RadialPower::eval_unchecked(Point2 x) const {
    Point2 v = x - c_;
    double r = norm(v);
    if (r == 0) return c_;
    return c_ + v * std::pow(r, alpha_ - 1);
}

Mat2 RadialPower::jacobian(Point2 x) const {
    Point2 v = x - c_;
    double r = norm(v);
    if (r == 0) return {{{INFINITY, 0}, {0, INFINITY}}};
    double f = std::pow(r, alpha_ - 1);
    Point2 u = v / r;
    double g = alpha_ - 1;
    return {{{f * (1 + g * u.x * u.x), f * g * u.x * u.y}, {f * g * u.x * u.y, f * (1 + g * u.y * u.y)}}};
}

nlohmann::json RadialPower::to_json() const {
    return {{"type", "radial"}, {"alpha", alpha_}, {"centre", {c_.x, c_.y}}};
}

CantorShear::CantorShear(int k, int depth) : k_(k), depth_(depth) {
    if (k < 2) throw std::invalid_argument("cantor: ratio parameter must be >= 2");
    if (depth < 1) throw std::invalid_argument("cantor: depth must be >= 1");
    piece_ = (1.0 - 1.0 / k) / 2;
}

double CantorShear::cantor(double x) const {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    double value = 0, scale = 1;
    for (int d = 0; d < depth_; ++d) {
        if (x < piece_) {
            x /= piece_;
        } else if (x > 1 - piece_) {
            value += scale / 2;
            x = (x - (1 - piece_)) / piece_;
        } else {
            return value + scale / 2;
        }
        scale /= 2;
    }
    return value + scale * x;
}

double CantorShear::holder_exponent() const { return std::log(0.5) / std::log(piece_); }

nlohmann::json CantorShear::to_json() const {
    return {{"type", "cantor"}, {"k", k_}, {"depth", depth_}};
}

SampledMap::SampledMap(int resolution, std::vector<Point2> images)
    : res_(resolution), img_(std::move(images)) {
    if (res_ < 1) throw std::invalid_argument("sampled: resolution must be >= 1");
    if (img_.size() != static_cast<std::size_t>((res_ + 1) * (res_ + 1)))
        throw std::invalid_argument("sampled: expected (resolution+1)^2 vertex images");
    auto sorted = img_;
    std::sort(sorted.begin(), sorted.end(),
              [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("sampled: vertex images must be distinct");
}

Point2 SampledMap::eval_unchecked(Point2 x) const {
    Point2 c{std::clamp(x.x, 0.0, 1.0), std::clamp(x.y, 0.0, 1.0)};
    // outside the unit square: the nearest boundary value, translated along with the point
    if (c != x) return eval_unchecked(c) + (x - c);
    double u = c.x * res_, w = c.y * res_;
    int ix = std::min(static_cast<int>(u), res_ - 1), iy = std::min(static_cast<int>(w), res_ - 1);
    double fx = u - ix, fy = w - iy;
    auto at = [&](int i, int j) { return img_[static_cast<std::size_t>(j * (res_ + 1) + i)]; };
    Point2 p00 = at(ix, iy), p10 = at(ix + 1, iy), p11 = at(ix + 1, iy + 1), p01 = at(ix, iy + 1);
    if (fx >= fy) return p00 + (p10 - p00) * fx + (p11 - p10) * fy;
    return p00 + (p01 - p00) * fy + (p11 - p01) * fx;
}

Mat2 SampledMap::jacobian(Point2 x) const {
    double u = std::clamp(x.x, 0.0, 1.0) * res_, w = std::clamp(x.y, 0.0, 1.0) * res_;
    int ix = std::min(static_cast<int>(u), res_ - 1), iy = std::min(static_cast<int>(w), res_ - 1);
    double fx = u - ix, fy = w - iy;
    auto at = [&](int i, int j) { return img_[static_cast<std::size_t>(j * (res_ + 1) + i)]; };
    Point2 p00 = at(ix, iy), p10 = at(ix + 1, iy), p11 = at(ix + 1, iy + 1), p01 = at(ix, iy + 1);
    Point2 dx, dy;
    if (fx >= fy) { dx = p10 - p00; dy = p11 - p10; }
    else { dx = p11 - p01; dy = p01 - p00; }
    dx = dx * res_;
    dy = dy * res_;
    return {{{dx.x, dy.x}, {dx.y, dy.y}}};
}

nlohmann::json SampledMap::to_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (auto p : img_) v.push_back({p.x, p.y});
    return {{"type", "sampled"}, {"resolution", res_}, {"vertex_images", v}};
}

SampledMap SampledMap::from_map(const BoundaryMap& m, int r) {
    std::vector<Point2> img;
    for (int j = 0; j <= r; ++j)
        for (int i = 0; i <= r; ++i) img.push_back(m.eval({double(i) / r, double(j) / r}));
    return SampledMap(r, std::move(img));
}

Point2 SmoothMap::eval_unchecked(Point2 x) const {
    return {x.x + a_ * std::sin(M_PI * x.x) * std::sin(M_PI * x.y), x.y};
}

Mat2 SmoothMap::jacobian(Point2 x) const {
    return {{{1 + a_ * M_PI * std::cos(M_PI * x.x) * std::sin(M_PI * x.y),
              a_ * M_PI * std::sin(M_PI * x.x) * std::cos(M_PI * x.y)},
             {0, 1}}};
}

nlohmann::json TranslatedMap::to_json() const {
    return {{"type", "translated"}, {"shift", {shift_.x, shift_.y}}, {"base", base_->to_json()}};
}

MapPtr make_map(const nlohmann::json& spec) {
    std::string t = spec.at("type").get<std::string>();
    if (t == "identity") return std::make_shared<IdentityMap>();
    if (t == "affine") {
        auto A = spec.at("A");
        auto b = spec.value("b", nlohmann::json::array({0.0, 0.0}));
        Mat2 a{{{A[0][0].get<double>(), A[0][1].get<double>()},
                {A[1][0].get<double>(), A[1][1].get<double>()}}};
        return std::make_shared<AffineMap>(a, Point2{b[0].get<double>(), b[1].get<double>()});
    }
    if (t == "saw") return std::make_shared<SawShear>(spec.value("J", 4), spec.value("q", 2.0));
    if (t == "radial") {
        double alpha = spec.value("alpha", 0.5);
        if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("radial: alpha must lie in (0,1)");
        Point2 c{0, 0};
        if (spec.contains("centre")) c = {spec["centre"][0].get<double>(), spec["centre"][1].get<double>()};
        return std::make_shared<RadialPower>(alpha, c);
    }
    if (t == "cantor") return std::make_shared<CantorShear>(spec.value("k", 3), spec.value("depth", 24));
    if (t == "smooth") return std::make_shared<SmoothMap>(spec.value("amplitude", 0.1));
    if (t == "translated") {
        auto s = spec.at("shift");
        return std::make_shared<TranslatedMap>(make_map(spec.at("base")),
                                               Point2{s[0].get<double>(), s[1].get<double>()});
    }
    if (t == "sampled") {
        nlohmann::json body = spec;
        if (spec.contains("file")) {
            std::ifstream in(spec["file"].get<std::string>());
            if (!in) throw std::invalid_argument("sampled: cannot open " + spec["file"].get<std::string>());
            body = nlohmann::json::parse(in);
        }
        std::vector<Point2> img;
        for (auto& p : body.at("vertex_images")) img.push_back({p[0].get<double>(), p[1].get<double>()});
        return std::make_shared<SampledMap>(body.at("resolution").get<int>(), std::move(img));
    }
    throw std::invalid_argument("unknown map type: " + t);
}

std::vector<Point2> quad_boundary_samples(const std::array<Point2, 4>& q, int per_side) {
    std::vector<Point2> out;
    out.reserve(static_cast<std::size_t>(4 * per_side));
    for (int s = 0; s < 4; ++s)
        for (int k = 0; k < per_side; ++k) out.push_back(lerp(q[s], q[(s + 1) % 4], double(k) / per_side));
    return out;
}

namespace {

double point_set_diameter(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 2) return 0;
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && orient2d(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && orient2d(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
    double best = 0;
    for (std::size_t i = 0; i < hull.size(); ++i)
        for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, dist(hull[i], hull[j]));
    return best;
}

}  // namespace

double image_diameter(const BoundaryMap& m, const std::array<Point2, 4>& quad, int n) {
    int per_side = std::max(2, n / 4);
    double prev = -1;
    for (;;) {
        std::vector<Point2> img;
        for (auto p : quad_boundary_samples(quad, per_side)) img.push_back(m.eval(p));
        double d = point_set_diameter(std::move(img));
        if (prev >= 0 && (d - prev) <= 1e-3 * d) return d;
        if (per_side >= 4096) return d;
        prev = d;
        per_side *= 2;
    }
}

double image_boundary_length(const BoundaryMap& m, const std::array<Point2, 4>& quad, int n,
                             int max_per_side) {
    int per_side = std::max(4, n / 4);
    // kink parameters on horizontal sides are always sampled
    std::array<std::vector<double>, 4> extra;
    for (int s = 0; s < 4; ++s) {
        Point2 a = quad[s], b = quad[(s + 1) % 4];
        if (a.y != b.y) continue;
        for (double x : m.kinks_x(std::min(a.x, b.x), std::max(a.x, b.x))) extra[s].push_back((x - a.x) / (b.x - a.x));
    }
    double prev = -1;
    for (;;) {
        double len = 0;
        for (int s = 0; s < 4; ++s) {
            Point2 a = quad[s], b = quad[(s + 1) % 4];
            std::vector<double> ts;
            ts.reserve(per_side + 1 + extra[s].size());
            for (int k = 0; k <= per_side; ++k) ts.push_back(double(k) / per_side);
            for (double t : extra[s])
                if (t > 0 && t < 1) ts.push_back(t);
            std::sort(ts.begin(), ts.end());
            Point2 last = m.eval(a);
            for (std::size_t k = 1; k < ts.size(); ++k) {
                Point2 cur = m.eval(k + 1 == ts.size() ? b : lerp(a, b, ts[k]));
                len += dist(last, cur);
                last = cur;
            }
        }
        if (prev >= 0 && (len - prev) <= 1e-3 * len) return len;
        if (per_side >= max_per_side) return len;
        prev = len;
        per_side *= 2;
    }
}

std::array<Point2, 4> square_quad(Point2 ll, double side) {
    return {ll, ll + Point2{side, 0}, ll + Point2{side, side}, ll + Point2{0, side}};
}

}  // namespace sobext
