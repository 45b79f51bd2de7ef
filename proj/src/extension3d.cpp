#include "sobext/extension3d.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "sobext/analysis.hpp"
#include "sobext/parallel.hpp"

namespace sobext {

namespace {

const Point2 centre{0.5, 0.5};
const std::array<Point2, 4> child_origin{Point2{0, 0}, Point2{0.5, 0}, Point2{0.5, 0.5}, Point2{0, 0.5}};

bool on_unit_boundary(Point2 p) { return p.x == 0 || p.x == 1 || p.y == 0 || p.y == 1; }

// which arm runs along the segment between two points of the parent square, or -1
int arm_between(Point2 a, Point2 b) {
    for (int i = 0; i < 4; ++i) {
        Point2 e = arm_end(i);
        if ((a == centre && b == e) || (a == e && b == centre)) return i;
    }
    return -1;
}

double arm_parameter(Point2 p) { return 2 * std::max(std::abs(p.x - 0.5), std::abs(p.y - 0.5)); }

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    // parameters from different grids differ by rounding only
    a.erase(std::unique(a.begin(), a.end(), [](double x, double y) { return y - x < 1e-9; }), a.end());
    return a;
}

MovingChain arm_motion(const ArmParam& a, const ArmParam& b) {
    MovingChain c;
    for (double u : merged(a.u, b.u)) {
        c.from.push_back(a.at(u));
        c.to.push_back(b.at(u));
    }
    return c;
}

MotionCertificate certify_cross_motion(const CrossParam& a, const CrossParam& b, const std::vector<Point2>& ring) {
    std::vector<MovingChain> chains{{ring, ring, true}};
    for (int i = 0; i < 4; ++i) chains.push_back(arm_motion(a[i], b[i]));
    return certify_linear_motion(chains);
}

CrossParam from_cross(const Cross& c) {
    CrossParam out;
    for (int i = 0; i < 4; ++i) {
        out[i].pts = c.arms[i];
        out[i].u = arc_fractions(c.arms[i]);
    }
    return out;
}

Point2 sce_at(const ShortestCurveExtension& s, Point2 uv) {
    uv.x = std::clamp(uv.x, 0.0, 1.0);
    uv.y = std::clamp(uv.y, 0.0, 1.0);
    return s(uv);
}

}  // namespace

CubeCell CubeCell::make(int k, int j) {
    CubeCell c;
    int n = 1 << k;
    if (k < 1 || j < 0 || j >= n * n) throw std::invalid_argument("CubeCell: index out of range");
    c.k = k;
    c.j = j;
    c.ix = j % n;
    c.iy = j / n;
    c.side = std::ldexp(1.0, -k);
    c.lower_left = {c.ix * c.side, c.iy * c.side};
    c.top = std::ldexp(1.0, -(k - 1));
    c.bot = std::ldexp(1.0, -k);
    c.mid = c.bot + std::ldexp(1.0, -k - 1);
    return c;
}

Point2 ArmParam::at(double s) const {
    if (pts.empty()) throw std::logic_error("ArmParam: empty arm");
    if (s <= u.front()) return pts.front();
    if (s >= u.back()) return pts.back();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(u.begin(), u.end(), s) - u.begin());
    double f = (s - u[i - 1]) / (u[i] - u[i - 1]);
    return lerp(pts[i - 1], pts[i], f);
}

Point2 arm_end(int arm) {
    static const std::array<Point2, 4> ends{Point2{0, 0.5}, Point2{0.5, 1}, Point2{1, 0.5}, Point2{0.5, 0}};
    return ends.at(static_cast<std::size_t>(arm));
}

Cross to_cross(const CrossParam& c) {
    Cross x;
    x.center = c[0].pts.front();
    for (int i = 0; i < 4; ++i) {
        PolyLine a;
        for (auto p : c[i].pts)
            if (a.empty() || a.back() != p) a.push_back(p);
        a.front() = x.center;
        x.arms[i] = a;
    }
    return x;
}

CrossParam lerp_cross(const CrossParam& a, const CrossParam& b, double lambda) {
    if (lambda <= 0) return a;
    if (lambda >= 1) return b;
    CrossParam out;
    for (int i = 0; i < 4; ++i) {
        out[i].u = merged(a[i].u, b[i].u);
        for (double u : out[i].u) out[i].pts.push_back(lerp(a[i].at(u), b[i].at(u), lambda));
    }
    return out;
}

SquareBoundaryMap lerp_boundary(const SquareBoundaryMap& a, const SquareBoundaryMap& b, double lambda) {
    if (lambda <= 0) return a;
    if (lambda >= 1) return b;
    SquareBoundaryMap m;
    m.knots = merged(a.knots, b.knots);
    for (double th : m.knots) m.images.push_back(lerp(a.at_theta(th), b.at_theta(th), lambda));
    return m;
}

cell_error::cell_error(int k_, int j_, const std::string& what)
    : geometry_error("cell (" + std::to_string(k_) + ", " + std::to_string(j_) + "): " + what), k(k_), j(j_) {}

// ---------------------------------------------------------------- one cell

CellSlices::CellSlices(int k, int j, const PLGrid& level, const PLGrid& next, int arm_samples)
    : data_(std::make_shared<CylCell>()), cache_(std::make_shared<Cache>()) {
    auto& d = *data_;
    d.cell = CubeCell::make(k, j);
    if (level.level != k || next.level != k + 1) throw std::invalid_argument("CellSlices: grids must be levels k, k+1");
    try {
        d.phi_top = level.param(j);
        d.top_curve = level.ring(j);
        int n2 = 2 << k;
        for (int c = 0; c < 4; ++c) {
            int cx = 2 * d.cell.ix + (c == 1 || c == 2), cy = 2 * d.cell.iy + (c >= 2);
            d.child_index[c] = cy * n2 + cx;
            d.child_params[c] = next.param(d.child_index[c]);
            d.children[c] = next.ring(d.child_index[c]);
        }
        // outer boundary values from the children
        std::vector<std::pair<double, Point2>> outer;
        for (int c = 0; c < 4; ++c) {
            auto& pc = d.child_params[c];
            for (std::size_t i = 0; i < pc.knots.size(); ++i) {
                Point2 p = child_origin[c] + square_point(pc.knots[i]) * 0.5;
                if (on_unit_boundary(p)) outer.push_back({square_theta(p), pc.images[i]});
            }
        }
        std::sort(outer.begin(), outer.end(), [](auto& x, auto& y) { return x.first < y.first; });
        outer.erase(std::unique(outer.begin(), outer.end(),
                                [](auto& x, auto& y) { return y.first - x.first < 1e-9; }),
                    outer.end());
        d.phi_mid = boundary_map_from_knots(outer);
        d.bottom_curve = d.phi_mid.ring();

        // T_bot from the children's inner sides
        for (int a = 0; a < 4; ++a) {
            bool done = false;
            for (int c = 0; c < 4 && !done; ++c)
                for (int s = 0; s < 4 && !done; ++s) {
                    Point2 p0 = child_origin[c] + square_point(s) * 0.5;
                    Point2 p1 = child_origin[c] + square_point(s + 1) * 0.5;
                    if (arm_between(p0, p1) != a) continue;
                    auto& pc = d.child_params[c];
                    std::vector<std::pair<double, Point2>> pts;
                    for (double th : {double(s), double(s + 1)})
                        pts.push_back({arm_parameter(child_origin[c] + square_point(th) * 0.5), pc.at_theta(th)});
                    for (std::size_t i = 0; i < pc.knots.size(); ++i)
                        if (pc.knots[i] > s && pc.knots[i] < s + 1)
                            pts.push_back({arm_parameter(child_origin[c] + square_point(pc.knots[i]) * 0.5),
                                           pc.images[i]});
                    std::sort(pts.begin(), pts.end(), [](auto& x, auto& y) { return x.first < y.first; });
                    for (auto& [u, q] : pts) {
                        d.t_bot[a].u.push_back(u);
                        d.t_bot[a].pts.push_back(q);
                    }
                    done = true;
                }
        }

        // T_mid: the whole-square extension of phi_mid sampled along the arms
        ShortestCurveExtension whole(d.phi_mid);
        for (int a = 0; a < 4; ++a) {
            for (int i = 0; i <= arm_samples; ++i) {
                double u = double(i) / arm_samples;
                Point2 p = i == arm_samples ? d.phi_mid.at_theta(square_theta(arm_end(a)))
                                            : sce_at(whole, lerp(centre, arm_end(a), u));
                d.t_mid[a].u.push_back(u);
                d.t_mid[a].pts.push_back(p);
            }
        }

        auto poly = make_polygon(d.bottom_curve);
        double diam = 0;
        for (auto& p : d.bottom_curve)
            for (auto& q : d.bottom_curve) diam = std::max(diam, dist(p, q));
        Cross tm = to_cross(d.t_mid);
        d.t_mid_star = d.t_mid;
        if (!(tm.simple() && tm.clear_of(poly))) {
            Cross nudged = nudge_cross(tm, poly, 1e-4 * diam);
            // nudging keeps the vertex count of every deduplicated arm; map back by position
            for (int a = 0; a < 4; ++a) {
                auto& arm = d.t_mid_star[a];
                std::size_t idx = 0;
                for (std::size_t i = 0; i < arm.pts.size(); ++i) {
                    while (idx + 1 < tm.arms[a].size() && tm.arms[a][idx] != arm.pts[i]) ++idx;
                    arm.pts[i] = nudged.arms[a][idx];
                }
            }
        }

        std::vector<Point2> ring_pts = d.bottom_curve;
        auto direct = certify_cross_motion(d.t_mid_star, d.t_bot, ring_pts);
        if (direct.ok) {
            d.lower_route = "direct";
        } else {
            auto fix = build_t_fix(to_cross(d.t_mid_star), to_cross(d.t_bot), poly);
            d.t_fix = from_cross(fix.cross);
            auto c1 = certify_cross_motion(d.t_mid_star, *d.t_fix, ring_pts);
            auto c2 = certify_cross_motion(*d.t_fix, d.t_bot, ring_pts);
            if (!c1.ok || !c2.ok) {
                std::ostringstream os;
                os << "cross homotopy through the fixing cross not certified (" << (c1.ok ? c2.what : c1.what) << ")";
                throw geometry_error(os.str());
            }
            d.lower_route = "t-fix";
        }

        // upper boundary homotopy
        SquareBoundaryMap probe = lerp_boundary(d.phi_top, d.phi_mid, 0.5);
        MovingChain ring;
        for (double th : probe.knots) {
            ring.from.push_back(d.phi_top.at_theta(th));
            ring.to.push_back(d.phi_mid.at_theta(th));
        }
        ring.closed = true;
        auto up = certify_linear_motion({ring});
        if (!up.ok) {
            std::ostringstream os;
            os << "boundary homotopy not certified (" << up.what << " at lambda " << up.lambda << ")";
            throw geometry_error(os.str());
        }
    } catch (const cell_error&) {
        throw;
    } catch (const std::exception& e) {
        throw cell_error(k, j, e.what());
    }
}

SquareBoundaryMap CellSlices::boundary(double t) const {
    auto& c = data_->cell;
    if (t <= c.mid) return data_->phi_mid;
    return lerp_boundary(data_->phi_top, data_->phi_mid, (c.top - t) / (c.top - c.mid));
}

CrossParam CellSlices::cross(double t) const {
    auto& d = *data_;
    auto& c = d.cell;
    double s = std::clamp((c.mid - t) / (c.mid - c.bot), 0.0, 1.0);
    if (s <= 1.0 / 3) return lerp_cross(d.t_mid, d.t_mid_star, 3 * s);
    if (!d.t_fix) return lerp_cross(d.t_mid_star, d.t_bot, (s - 1.0 / 3) * 1.5);
    if (s <= 2.0 / 3) return lerp_cross(d.t_mid_star, *d.t_fix, 3 * s - 1);
    return lerp_cross(*d.t_fix, d.t_bot, 3 * s - 2);
}

SquareBoundaryMap CellSlices::child_map(int c, const CrossParam& x) const {
    auto& d = *data_;
    std::vector<std::pair<double, Point2>> knots;
    for (int s = 0; s < 4; ++s) {
        Point2 p0 = child_origin[c] + square_point(s) * 0.5;
        Point2 p1 = child_origin[c] + square_point(s + 1) * 0.5;
        auto image_of = [&](Point2 p) { return p == centre ? x[0].pts.front() : d.phi_mid(p); };
        knots.push_back({double(s), image_of(p0)});
        int a = arm_between(p0, p1);
        if (a >= 0) {
            bool outward = p0 == centre;
            for (std::size_t i = 0; i < x[a].u.size(); ++i) {
                double u = x[a].u[i];
                if (u <= 0 || u >= 1) continue;
                knots.push_back({s + (outward ? u : 1 - u), x[a].pts[i]});
            }
        } else {
            double th0 = square_theta(p0), th1 = square_theta(p1);
            if (th1 <= th0) th1 += 4;
            for (std::size_t i = 0; i < d.phi_mid.knots.size(); ++i)
                for (double th : {d.phi_mid.knots[i], d.phi_mid.knots[i] + 4})
                    if (th > th0 && th < th1) knots.push_back({s + (th - th0) / (th1 - th0), d.phi_mid.images[i]});
        }
    }
    return boundary_map_from_knots(knots);
}

SquareBoundaryMap CellSlices::child_boundary(int c, double t) const {
    if (t <= data_->cell.bot) return data_->child_params[c];
    return child_map(c, cross(t));
}

std::shared_ptr<const CellSlices::Slice> CellSlices::slice(double t) const {
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto it = cache_->slices.find(t);
        if (it != cache_->slices.end()) return it->second;
    }
    auto& c = data_->cell;
    auto s = std::make_shared<Slice>();
    try {
        if (t >= c.mid) {
            s->whole = std::make_shared<ShortestCurveExtension>(boundary(t));
        } else {
            for (int ch = 0; ch < 4; ++ch)
                s->child[ch] = std::make_shared<ShortestCurveExtension>(child_boundary(ch, t));
        }
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << "slice at t = " << t << ": " << e.what();
        throw cell_error(c.k, c.j, os.str());
    }
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (cache_->slices.size() > 512) cache_->slices.clear();
    cache_->slices.emplace(t, s);
    return s;
}

void CellSlices::clear_cache() const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    cache_->slices.clear();
}

Point2 CellSlices::map(Point2 uv, double t) const {
    auto s = slice(t);
    if (s->whole) return sce_at(*s->whole, uv);
    uv.x = std::clamp(uv.x, 0.0, 1.0);
    uv.y = std::clamp(uv.y, 0.0, 1.0);
    int c = uv.y < 0.5 ? (uv.x < 0.5 ? 0 : 1) : (uv.x < 0.5 ? 3 : 2);
    return sce_at(*s->child[c], (uv - child_origin[c]) * 2.0);
}

// ---------------------------------------------------------------- the field

ExtensionField::ExtensionField(MapPtr phi, const ExtensionOptions& opt) : phi_(std::move(phi)), opt_(opt) {
    if (opt.levels < 1) throw std::invalid_argument("ExtensionField: levels must be >= 1");
    auto grids = good_grid_family(*phi_, opt.p, opt.levels + 1, opt.grid_candidates, opt.key_rule);
    grids_ = build_pl_grids(phi_, grids, opt.linearizer);
    levels_ = opt.levels;
    build(opt);
}

ExtensionField::ExtensionField(MapPtr phi, std::vector<PLGrid> pl_grids, const ExtensionOptions& opt)
    : phi_(std::move(phi)), grids_(std::move(pl_grids)), opt_(opt) {
    if (grids_.size() < 2) throw std::invalid_argument("ExtensionField: need PL grids for at least two levels");
    levels_ = static_cast<int>(grids_.size()) - 1;
    opt_.levels = levels_;
    build(opt_);
}

void ExtensionField::build(const ExtensionOptions& opt) {
    cells_.assign(static_cast<std::size_t>(levels_), {});
    for (int k = 1; k <= levels_; ++k) {
        int count = cell_count(k);
        auto& row = cells_[static_cast<std::size_t>(k - 1)];
        row.assign(static_cast<std::size_t>(count), nullptr);
        std::vector<std::string> errors(static_cast<std::size_t>(count));
        const PLGrid& a = grids_[static_cast<std::size_t>(k - 1)];
        const PLGrid& b = grids_[static_cast<std::size_t>(k)];
        parallel_for(static_cast<std::size_t>(count), [&](std::size_t j) {
            try {
                row[j] = std::make_shared<CellSlices>(k, static_cast<int>(j), a, b, opt.arm_samples);
            } catch (const std::exception& e) {
                errors[j] = e.what();
            }
        });
        for (int j = 0; j < count; ++j)
            if (!errors[static_cast<std::size_t>(j)].empty()) {
                const std::string& w = errors[static_cast<std::size_t>(j)];
                if (w.rfind("cell (", 0) == 0) throw geometry_error(w);
                throw cell_error(k, j, w);
            }
    }
}

const CellSlices& ExtensionField::cell(int k, int j) const {
    if (k < 1 || k > levels_) throw std::out_of_range("level " + std::to_string(k) + " not built");
    return *cells_.at(static_cast<std::size_t>(k - 1)).at(static_cast<std::size_t>(j));
}

int ExtensionField::locate(int k, double x, double y) const {
    int n = 1 << k;
    int ix = std::clamp(static_cast<int>(std::floor(x * n)), 0, n - 1);
    int iy = std::clamp(static_cast<int>(std::floor(y * n)), 0, n - 1);
    return iy * n + ix;
}

int ExtensionField::level_of(double t) const {
    if (!(t <= 1) || t < min_t()) {
        std::ostringstream os;
        os << "t = " << t << " outside the built range [" << min_t() << ", 1]; level " << levels_ + 1
           << " not yet built";
        throw std::out_of_range(os.str());
    }
    // t in (2^-k, 2^-(k-1)]
    int k = 1;
    while (k < levels_ && t <= std::ldexp(1.0, -k)) ++k;
    return k;
}

Point3 ExtensionField::eval(double x, double y, double t) const {
    int k = level_of(t);
    return eval_cell(k, locate(k, x, y), x, y, t);
}

Point3 ExtensionField::eval_cell(int k, int j, double x, double y, double t) const {
    auto& c = cell(k, j);
    auto& cc = c.cell();
    if (t < cc.bot || t > cc.top) throw std::out_of_range("eval_cell: t outside the cell");
    Point2 p = c.map(cc.to_unit(x, y), t);
    return {p.x, p.y, t};
}

nlohmann::json ExtensionField::config() const {
    return {{"map", phi_->to_json()},
            {"levels", levels_},
            {"p", opt_.p},
            {"grid_candidates", opt_.grid_candidates},
            {"arm_samples", opt_.arm_samples}};
}

// ---------------------------------------------------------------- diagnostics

double operator_norm3(const std::array<std::array<double, 3>, 3>& m) {
    Eigen::Matrix3d a;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a(r, c) = m[r][c];
    return Eigen::JacobiSVD<Eigen::Matrix3d>(a).singularValues()(0);
}

nlohmann::json ExtensionEnergy::to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (auto& c : cells) cs.push_back({{"k", c.k}, {"j", c.j}, {"energy", c.energy}, {"max_norm", c.max_norm}});
    return {{"q", q}, {"resolution", resolution}, {"total", total}, {"volume", volume}, {"per_level", per_level},
            {"cells", cs}};
}

ExtensionEnergy energy_estimate(const ExtensionField& h, double q, int resolution) {
    if (q < 1) throw std::invalid_argument("energy_estimate: q must be >= 1");
    if (resolution < 8) throw std::invalid_argument("energy_estimate: resolution must be >= 8");
    ExtensionEnergy out;
    out.q = q;
    out.resolution = resolution;
    std::vector<std::pair<int, int>> ids;
    for (int k = 1; k <= h.levels(); ++k)
        for (int j = 0; j < h.cell_count(k); ++j) ids.push_back({k, j});
    out.cells.resize(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        auto [k, j] = ids[i];
        auto& cell = h.cell(k, j);
        auto& cc = cell.cell();
        double step = cc.side / 64, dz = cc.side / resolution, vol = dz * dz * dz;
        CellEnergy ce{k, j, 0, 0};
        for (int a = 0; a < resolution; ++a) {
            double t = cc.bot + (a + 0.5) * dz;
            for (int b = 0; b < resolution; ++b)
                for (int c = 0; c < resolution; ++c) {
                    double x = cc.lower_left.x + (c + 0.5) * dz, y = cc.lower_left.y + (b + 0.5) * dz;
                    auto f = [&](double xx, double yy, double tt) { return cell.map(cc.to_unit(xx, yy), tt); };
                    Point2 dx = (f(x + step, y, t) - f(x - step, y, t)) / (2 * step);
                    Point2 dy = (f(x, y + step, t) - f(x, y - step, t)) / (2 * step);
                    Point2 dt = (f(x, y, t + step) - f(x, y, t - step)) / (2 * step);
                    double nrm = operator_norm3({{{dx.x, dy.x, dt.x}, {dx.y, dy.y, dt.y}, {0, 0, 1}}});
                    ce.max_norm = std::max(ce.max_norm, nrm);
                    ce.energy += std::pow(nrm, q) * vol;
                }
        }
        out.cells[i] = ce;
        cell.clear_cache();
    });
    out.per_level.assign(static_cast<std::size_t>(h.levels()), 0);
    for (auto& c : out.cells) {
        out.per_level[static_cast<std::size_t>(c.k - 1)] += c.energy;
        out.total += c.energy;
        out.volume += std::ldexp(1.0, -3 * c.k);
    }
    return out;
}

nlohmann::json GoalReport::to_json() const {
    return {{"k", k},       {"j", j},         {"lipschitz", lipschitz}, {"own", own}, {"with_neighbors", with_neighbors},
            {"ratio", ratio}, {"ratio_own", ratio_own}};
}

GoalReport goal_check(const ExtensionField& h, int k, int j, int resolution) {
    auto& cell = h.cell(k, j);
    auto& cc = cell.cell();
    int r = std::max(resolution, 1), m = r + 1;
    std::vector<Point3> img(static_cast<std::size_t>(m * m * m));
    auto id = [m](int a, int b, int c) { return static_cast<std::size_t>((a * m + b) * m + c); };
    double dz = cc.side / r;
    for (int a = 0; a < m; ++a) {
        double t = cc.bot + a * dz;
        if (a == r) t = cc.top;
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                Point2 p = cell.map({double(c) / r, double(b) / r}, t);
                img[id(a, b, c)] = {p.x, p.y, t};
            }
    }
    double lip = 0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int da = 0; da <= 1; ++da)
                    for (int db = -1; db <= 1; ++db)
                        for (int dc = -1; dc <= 1; ++dc) {
                            if (da == 0 && (db < 0 || (db == 0 && dc <= 0))) continue;
                            int a2 = a + da, b2 = b + db, c2 = c + dc;
                            if (a2 >= m || b2 < 0 || b2 >= m || c2 < 0 || c2 >= m) continue;
                            auto& p = img[id(a, b, c)];
                            auto& q = img[id(a2, b2, c2)];
                            double num = std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) +
                                                   (p.z - q.z) * (p.z - q.z));
                            double den = dz * std::sqrt(double(da * da + db * db + dc * dc));
                            lip = std::max(lip, num / den);
                        }
    cell.clear_cache();
    // consecutive knots of the PL boundary data are sample pairs too; they catch slopes finer than the lattice
    auto knot_slope = [&lip](const SquareBoundaryMap& m, double unit) {
        for (std::size_t i = 0; i < m.knots.size(); ++i) {
            double t0 = m.knots[i], t1 = i + 1 < m.knots.size() ? m.knots[i + 1] : 4.0;
            Point2 a = m.images[i], b = i + 1 < m.knots.size() ? m.images[i + 1] : m.images.front();
            if (t1 > t0) lip = std::max(lip, dist(a, b) / ((t1 - t0) * unit));
        }
    };
    auto& d = cell.data();
    knot_slope(d.phi_top, cc.side);
    knot_slope(d.phi_mid, cc.side);
    for (auto& pc : d.child_params) knot_slope(pc, cc.side / 2);
    auto own = [&](int kk, int jj) {
        auto& d = h.cell(kk, jj).data();
        double len = polyline_length([&] {
            auto r2 = d.top_curve;
            r2.push_back(r2.front());
            return r2;
        }());
        for (auto& ch : d.children) {
            auto r2 = ch;
            r2.push_back(r2.front());
            len += polyline_length(r2);
        }
        return std::ldexp(len, kk);
    };
    GoalReport g;
    g.k = k;
    g.j = j;
    g.lipschitz = lip;
    g.own = own(k, j);
    g.with_neighbors = g.own;
    int n = 1 << k;
    for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        int x = cc.ix + dx, y = cc.iy + dy;
        if (x >= 0 && x < n && y >= 0 && y < n) g.with_neighbors += own(k, y * n + x);
    }
    g.ratio = lip / g.with_neighbors;
    g.ratio_own = lip / g.own;
    return g;
}

SliceInjectivity slice_injectivity(const ExtensionField& h, int k, int j, int n, int slices, double tol) {
    auto& cell = h.cell(k, j);
    auto& cc = cell.cell();
    SliceInjectivity out;
    out.slices = slices;
    out.points = n * n;
    out.min_separation = std::numeric_limits<double>::infinity();
    for (int s = 0; s < slices; ++s) {
        double t = slices > 1 ? cc.bot + (cc.top - cc.bot) * s / (slices - 1) : cc.top;
        std::vector<Point2> pts;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) pts.push_back(cell.map({double(c) / (n - 1), double(b) / (n - 1)}, t));
        std::sort(pts.begin(), pts.end(), [](Point2 p, Point2 q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t m = i + 1; m < pts.size() && pts[m].x - pts[i].x <= out.min_separation; ++m) {
                double d = dist(pts[i], pts[m]);
                if (d < out.min_separation) {
                    out.min_separation = d;
                    out.worst_t = t;
                }
                if (d <= tol) ++out.collisions;
            }
    }
    cell.clear_cache();
    return out;
}

std::string export_obj(const ExtensionField& h, int per_cell) {
    std::ostringstream os;
    os.precision(12);
    os << "# slice boundaries of the extension, z = t\n";
    long next = 1;
    auto line = [&](const std::vector<Point2>& pts, double t, bool closed) {
        if (pts.size() < 2) return;
        long first = next;
        for (auto& p : pts) os << "v " << p.x << ' ' << p.y << ' ' << t << '\n';
        os << 'l';
        for (std::size_t i = 0; i < pts.size(); ++i) os << ' ' << first + static_cast<long>(i);
        if (closed) os << ' ' << first;
        os << '\n';
        next += static_cast<long>(pts.size());
    };
    for (int k = 1; k <= h.levels(); ++k)
        for (int j = 0; j < h.cell_count(k); ++j) {
            auto& cell = h.cell(k, j);
            auto& cc = cell.cell();
            os << "o cell_" << k << '_' << j << '\n';
            for (int s = 0; s < per_cell; ++s) {
                double t = per_cell > 1 ? cc.top - (cc.top - cc.bot) * s / (per_cell - 1) : cc.top;
                line(cell.boundary(t).ring(), t, true);
                if (t < cc.mid)
                    for (auto& arm : to_cross(cell.cross(t)).arms) line(arm, t, false);
            }
        }
    return os.str();
}

nlohmann::json sample_json(const ExtensionField& h, int resolution) {
    nlohmann::json pts = nlohmann::json::array();
    std::vector<double> ts;
    for (int k = 1; k <= h.levels(); ++k) {
        auto c = CubeCell::make(k, 0);
        ts.push_back(c.top);
        ts.push_back(c.mid);
    }
    ts.push_back(h.min_t());
    for (double t : ts)
        for (int b = 0; b <= resolution; ++b)
            for (int a = 0; a <= resolution; ++a) {
                double x = double(a) / resolution, y = double(b) / resolution;
                auto p = h.eval(x, y, t);
                pts.push_back({x, y, t, p.x, p.y});
            }
    return {{"resolution", resolution}, {"t_values", ts}, {"points", pts}};
}

}  // namespace sobext
