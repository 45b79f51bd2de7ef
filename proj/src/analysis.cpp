#include "sobext/analysis.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sobext/parallel.hpp"

namespace sobext {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::converging: return "converging";
        case Verdict::diverging: return "diverging";
        default: return "inconclusive";
    }
}

Verdict verdict_for(double slope) {
    if (std::isnan(slope)) return Verdict::inconclusive;
    if (slope < -0.2) return Verdict::converging;
    if (slope > 0.05) return Verdict::diverging;
    return Verdict::inconclusive;
}

double tail_slope(const std::vector<int>& levels, const std::vector<double>& terms) {
    std::size_t n = terms.size(), start = n - (n + 1) / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = start; i < n; ++i) {
        if (!(terms[i] > 0)) continue;
        double x = levels[i], y = std::log2(terms[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++m;
    }
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void EnergyReport::finish() {
    cumulative.clear();
    double acc = 0;
    for (double t : terms) cumulative.push_back(acc += t);
    slope = tail_slope(levels, terms);
    verdict = verdict_for(slope);
}

nlohmann::json EnergyReport::to_json() const {
    nlohmann::json j{{"kind", kind}, {"q", q},        {"levels", levels},
                     {"terms", terms}, {"cumulative", cumulative}, {"verdict", to_string(verdict)}};
    j["slope"] = std::isfinite(slope) ? nlohmann::json(slope) : nlohmann::json(nullptr);
    if (p > 0) j["p"] = p;
    return j;
}

std::string EnergyReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "level,term,cumulative,slope\n";
    for (std::size_t i = 0; i < terms.size(); ++i) {
        os << levels[i] << ',' << terms[i] << ',' << cumulative[i] << ',';
        if (i > 0 && terms[i] > 0 && terms[i - 1] > 0) os << std::log2(terms[i] / terms[i - 1]);
        os << '\n';
    }
    return os.str();
}

DiameterTable diameter_table(const BoundaryMap& phi, int K) {
    if (K < 1) throw std::invalid_argument("diameter_table: K must be >= 1");
    DiameterTable t;
    for (int k = 1; k <= K; ++k) {
        auto squares = standard_decomposition(k);
        std::vector<double> d(squares.size());
        parallel_for(squares.size(), [&](std::size_t j) { d[j] = image_diameter(phi, squares[j].corners()); });
        t.diam.push_back(std::move(d));
    }
    return t;
}

EnergyReport diam_sum(const DiameterTable& table, double q) {
    EnergyReport r;
    r.kind = "diam";
    r.q = q;
    for (std::size_t i = 0; i < table.diam.size(); ++i) {
        int k = static_cast<int>(i) + 1;
        double s = 0;
        for (double d : table.diam[i]) s += std::pow(d, q);
        r.levels.push_back(k);
        r.terms.push_back(std::exp2(k * (q - 3)) * s);
    }
    r.finish();
    return r;
}

EnergyReport diam_sum(const BoundaryMap& phi, double q, int K) {
    if (K < 2) throw std::invalid_argument("diam_sum: K must be >= 2");
    return diam_sum(diameter_table(phi, K), q);
}

GoodGrid standard_grid(int k) {
    GoodGrid g;
    g.level = k;
    g.n = 1 << k;
    for (int iy = 0; iy <= g.n; ++iy)
        for (int ix = 0; ix <= g.n; ++ix) g.vertices.push_back(g.lattice(ix, iy));
    return g;
}

EnergyReport length_sum(const BoundaryMap& phi, double q, int K, const std::vector<GoodGrid>& grids) {
    if (K < 1) throw std::invalid_argument("length_sum: K must be >= 1");
    if (!grids.empty() && static_cast<int>(grids.size()) < K)
        throw std::invalid_argument("length_sum: grid family shorter than K");
    EnergyReport r;
    r.kind = "length";
    r.q = q;
    for (int k = 1; k <= K; ++k) {
        GoodGrid g = grids.empty() ? standard_grid(k) : grids[static_cast<std::size_t>(k - 1)];
        if (g.level != k) throw std::invalid_argument("length_sum: grid level mismatch");
        std::vector<double> len(static_cast<std::size_t>(g.quad_count()));
        parallel_for(len.size(), [&](std::size_t j) {
            len[j] = std::pow(image_boundary_length(phi, g.quad(static_cast<int>(j))), q);
        });
        double s = 0;
        for (double v : len) s += v;
        r.levels.push_back(k);
        r.terms.push_back(std::exp2(k * (q - 3)) * s);
    }
    r.finish();
    return r;
}

std::vector<GoodGrid> good_grid_family(const BoundaryMap& phi, double p, int K, int candidates,
                                       const KeyQuadrature& rule) {
    std::vector<GoodGrid> out;
    for (int k = 1; k <= K; ++k) out.push_back(select_good_grid(phi, k, p, candidates, rule).grid);
    return out;
}

std::string to_string(SeminormMethod m) {
    switch (m) {
        case SeminormMethod::neighbor_pair: return "neighbor-pair-dyadic";
        case SeminormMethod::monte_carlo: return "monte-carlo";
        default: return "saw-split";
    }
}

nlohmann::json SeminormEstimate::to_json() const {
    nlohmann::json j{{"q", q}, {"value", value}, {"method", to_string(method)}};
    j["error"] = std::isfinite(error) ? nlohmann::json(error) : nlohmann::json(nullptr);
    if (!levels.terms.empty()) j["levels"] = levels.to_json();
    return j;
}

namespace {

double pow_half(double d2, double q) {
    if (q == 2) return d2;
    if (q == 4) return d2 * d2;
    if (q == 3) return d2 * std::sqrt(d2);
    return std::pow(d2, 0.5 * q);
}

double pair_cost(int k, int r) { return 27.0 * std::ldexp(1.0, 2 * (k + 1)) * std::ldexp(1.0, 4 * r); }

// contribution of pairs of level-(k+1) squares that are not neighbours but have neighbouring parents
double ring_level(const BoundaryMap& phi, double q, int k, int r, const SeminormOptions& opt) {
    int L = k + 1, n = 1 << L, m = 1 << r, M = n * m;
    double delta = 1.0 / M;
    std::vector<Point2> val(static_cast<std::size_t>(M) * M);
    std::vector<char> in(val.size());
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t jy) {
        for (int ix = 0; ix < M; ++ix) {
            Point2 x{(ix + 0.5) * delta, (jy + 0.5) * delta};
            std::size_t id = jy * M + ix;
            in[id] = opt.region.contains(x);
            if (in[id]) val[id] = phi.eval(x);
        }
    });
    int R = 4 * m - 1, W = 2 * R + 1;
    std::vector<double> kern(static_cast<std::size_t>(W) * W, 0.0);
    for (int di = -R; di <= R; ++di)
        for (int dj = -R; dj <= R; ++dj)
            if (di || dj)
                kern[(di + R) * W + (dj + R)] = std::pow(delta * delta * (di * di + dj * dj), -0.5 * (q + 1));
    double w4 = delta * delta * delta * delta;
    int np = n / 2;
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t sy) {
        int iy = static_cast<int>(sy);
        double acc = 0;
        for (int ix = 0; ix < n; ++ix) {
            int px = ix / 2, py = iy / 2;
            for (int qy = std::max(0, py - 1); qy <= std::min(np - 1, py + 1); ++qy)
                for (int qx = std::max(0, px - 1); qx <= std::min(np - 1, px + 1); ++qx)
                    for (int cy = 2 * qy; cy <= 2 * qy + 1; ++cy)
                        for (int cx = 2 * qx; cx <= 2 * qx + 1; ++cx) {
                            if (std::max(std::abs(cx - ix), std::abs(cy - iy)) < 2) continue;
                            for (int ay = 0; ay < m; ++ay)
                                for (int ax = 0; ax < m; ++ax) {
                                    int gx = ix * m + ax, gy = iy * m + ay;
                                    std::size_t a = static_cast<std::size_t>(gy) * M + gx;
                                    if (!in[a]) continue;
                                    for (int by = 0; by < m; ++by)
                                        for (int bx = 0; bx < m; ++bx) {
                                            int hx = cx * m + bx, hy = cy * m + by;
                                            std::size_t b = static_cast<std::size_t>(hy) * M + hx;
                                            if (!in[b]) continue;
                                            Point2 d = opt.transpose ? val[a] - val[b] : val[b] - val[a];
                                            int di = opt.transpose ? gx - hx : hx - gx;
                                            int dj = opt.transpose ? gy - hy : hy - gy;
                                            acc += pow_half(dot(d, d), q) * kern[(di + R) * W + (dj + R)];
                                        }
                                }
                        }
        }
        row[sy] = acc * w4;
    });
    double s = 0;
    for (double v : row) s += v;
    return s;
}

double mc_level(const BoundaryMap& phi, double q, int k, long long samples, const SeminormOptions& opt,
                double& stderr_out) {
    int L = k + 1, n = 1 << L, np = n / 2;
    double h = std::ldexp(1.0, -L);
    std::mt19937_64 rng(opt.seed + static_cast<unsigned long long>(k) * 1000003ULL);
    std::uniform_real_distribution<double> u(0, 1);
    double s = 0, s2 = 0;
    for (long long i = 0; i < samples; ++i) {
        Point2 x{u(rng), u(rng)};
        int ix = std::min(n - 1, static_cast<int>(x.x * n)), iy = std::min(n - 1, static_cast<int>(x.y * n));
        int px = ix / 2, py = iy / 2;
        int x0 = 2 * std::max(0, px - 1), x1 = 2 * std::min(np - 1, px + 1) + 1;
        int y0 = 2 * std::max(0, py - 1), y1 = 2 * std::min(np - 1, py + 1) + 1;
        int cols = x1 - x0 + 1, rows = y1 - y0 + 1;
        int cx = x0 + std::min(cols - 1, static_cast<int>(u(rng) * cols));
        int cy = y0 + std::min(rows - 1, static_cast<int>(u(rng) * rows));
        Point2 y{(cx + u(rng)) * h, (cy + u(rng)) * h};
        double f = 0;
        if (std::max(std::abs(cx - ix), std::abs(cy - iy)) >= 2 && opt.region.contains(x) &&
            opt.region.contains(y)) {
            Point2 a = opt.transpose ? y : x, b = opt.transpose ? x : y;
            Point2 d = phi.eval(a) - phi.eval(b);
            Point2 e = a - b;
            f = pow_half(dot(d, d), q) / pow_half(dot(e, e), q + 1) * cols * rows * h * h;
        }
        s += f;
        s2 += f * f;
    }
    double mean = s / samples;
    stderr_out = std::sqrt(std::max(0.0, s2 / samples - mean * mean) / samples);
    return mean;
}

void finish_estimate(SeminormEstimate& est) {
    est.levels.finish();
    double partial = est.levels.cumulative.empty() ? 0 : est.levels.cumulative.back();
    if (est.levels.verdict == Verdict::converging && !est.levels.terms.empty()) {
        double rho = std::exp2(est.levels.slope);
        double tail = est.levels.terms.back() * rho / (1 - rho);
        est.value = partial + tail;
        est.error += tail;
    } else {
        est.value = partial;
        est.error = std::numeric_limits<double>::infinity();
    }
}

}  // namespace

double saw_difference_mean(double tau) {
    double t = tau - std::floor(tau);
    if (t > 0.5) t = 1 - t;
    return 4 * t * t - 16.0 / 3 * t * t * t;
}

double shear_kernel(double a) {
    a = std::abs(a);
    double r = std::sqrt(1 + a * a);
    return 2 / (a * a * r) - 2 / a + 2 / r;
}

double saw_energy(int n) {
    double N = std::pow(10.0, n);
    double periods = std::min(64.0, N);
    // near the diagonal, u = N a resolves the saw exactly half-period by half-period
    auto near = [&](double u) {
        double a = u / N, r = std::sqrt(1 + a * a);
        double scaled = 2 / (u * u * r) - 2 / (u * N) + 2 / (N * N * r);
        return (1 - a) * scaled * saw_difference_mean(u);
    };
    double s = 0;
    for (int h = 0; h < static_cast<int>(2 * periods); ++h) s += boost::math::quadrature::gauss<double, 20>::integrate(near, 0.5 * h, 0.5 * (h + 1));
    s *= N;
    double a0 = periods / N;
    if (a0 < 1) {
        // the saw averages to 1/6; the first-order oscillation correction vanishes by symmetry
        auto F = [](double a) {
            double r = std::sqrt(1 + a * a);
            return -2 * r / a + 2 * std::asinh(1 / a) - 2 * std::log(a) + 2 * a + 2 * std::asinh(a) - 2 * r;
        };
        s += (F(1) - F(a0)) / 6;
    }
    return 2 * s;
}

double identity_seminorm_q2() { return 4.0 / 3 * (1 - std::sqrt(2.0)) + 4 * std::log(1 + std::sqrt(2.0)); }

SeminormEstimate gagliardo(const BoundaryMap& phi, double q, const SeminormOptions& opt) {
    if (q < 1) throw std::invalid_argument("gagliardo: q must be >= 1");
    if (opt.budget < 10000) throw std::invalid_argument("gagliardo: budget must be >= 1e4");
    SeminormEstimate est;
    est.q = q;
    est.method = opt.method;
    est.levels.kind = "gagliardo";
    est.levels.q = q;

    if (opt.method == SeminormMethod::saw_split) {
        auto* saw = dynamic_cast<const SawShear*>(&phi);
        if (!saw || q != 2) throw std::invalid_argument("gagliardo: saw-split needs a saw shear and q = 2");
        // |phi(x)-phi(y)|^2 = |x-y|^2 + cross term (odd in x2-y2) + (shear difference)^2;
        // the shear square is diagonal in frequency up to terms of relative size 10^{n_i - n_j}
        const auto& freq = saw->frequencies();
        est.value = identity_seminorm_q2();
        est.error = 0;
        for (std::size_t j = 0; j < freq.size(); ++j) {
            double c2 = std::pow(10.0, -2.0 * (j + 1));
            est.value += c2 * saw_energy(freq[j]);
            est.error += 16 * c2;
            for (std::size_t i = 0; i < j; ++i)
                est.error += 32 * std::pow(10.0, -double(i + 1) - double(j + 1) + freq[i]);
        }
        return est;
    }

    int r = std::max(0, opt.subdivision);
    auto levels_for = [&](int rr) {
        double used = 0;
        int K = 0;
        while (K < opt.max_levels && used + pair_cost(K + 1, rr) <= static_cast<double>(opt.budget))
            used += pair_cost(++K, rr);
        return K;
    };
    if (opt.method == SeminormMethod::neighbor_pair)
        while (r > 0 && levels_for(r) < 7) --r;
    int K = std::max(2, opt.method == SeminormMethod::neighbor_pair ? levels_for(r) : std::min(opt.max_levels, 6));

    est.error = 0;
    for (int k = 1; k <= K; ++k) {
        double term;
        if (opt.method == SeminormMethod::neighbor_pair) {
            term = ring_level(phi, q, k, r, opt);
        } else {
            double se = 0;
            term = mc_level(phi, q, k, std::max<long long>(1000, opt.budget / (2 * K)), opt, se);
            est.error += se;
        }
        est.levels.levels.push_back(k);
        est.levels.terms.push_back(term);
    }
    if (opt.method == SeminormMethod::neighbor_pair) {
        // quadrature indicator: the first ring again at twice the node density, scaled to all levels
        double fine = ring_level(phi, q, 1, r + 1, opt), used = est.levels.terms.front();
        double total = 0;
        for (double t : est.levels.terms) total += t;
        if (fine > 0) est.error += std::abs(fine - used) / fine * total;
    }
    finish_estimate(est);
    return est;
}

nlohmann::json EquivalenceReport::to_json() const {
    return {{"q", q}, {"diam", diam.to_json()}, {"seminorm", seminorm.to_json()}, {"agree", agree}};
}

EquivalenceReport equivalence_check(const BoundaryMap& phi, double q, int K, const SeminormOptions& opt) {
    EquivalenceReport r;
    r.q = q;
    r.diam = diam_sum(phi, q, K);
    r.seminorm = gagliardo(phi, q, opt);
    r.agree = r.diam.verdict == r.seminorm.levels.verdict && r.diam.verdict != Verdict::inconclusive;
    return r;
}

nlohmann::json DecayReport::to_json() const {
    return {{"p", p},
            {"q", q},
            {"predicted_slope", predicted},
            {"terms", terms.to_json()},
            {"local_slopes", local_slopes},
            {"passes", passes}};
}

DecayReport decay_check(const BoundaryMap& phi, double p, double q, int K, int candidates) {
    if (!(q < 1.5 * p)) throw std::invalid_argument("decay_check: needs q < 3p/2");
    DecayReport r;
    r.p = p;
    r.q = q;
    r.predicted = -(3 - 2 * q / p);
    r.terms = length_sum(phi, q, K, good_grid_family(phi, p, K, candidates));
    r.terms.p = p;
    for (std::size_t i = 1; i < r.terms.terms.size(); ++i)
        r.local_slopes.push_back(std::log2(r.terms.terms[i] / r.terms.terms[i - 1]));
    r.passes = r.terms.slope <= r.predicted + 0.5;
    return r;
}

TetMesh cube_tet_mesh(int n) {
    if (n < 1) throw std::invalid_argument("cube_tet_mesh: n must be >= 1");
    TetMesh m;
    auto id = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) m.vertices.push_back({double(i) / n, double(j) / n, double(k) / n});
    // Kuhn subdivision: one tetrahedron per ordering of the axes
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                for (auto& p : perms) {
                    int c[3] = {i, j, k};
                    std::array<int, 4> t;
                    t[0] = id(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[p[s]];
                        t[s + 1] = id(c[0], c[1], c[2]);
                    }
                    m.tets.push_back(t);
                }
    // orient positively
    for (auto& t : m.tets) {
        auto& a = m.vertices[t[0]];
        Eigen::Matrix3d e;
        for (int s = 0; s < 3; ++s) {
            auto& b = m.vertices[t[s + 1]];
            e.col(s) << b.x - a.x, b.y - a.y, b.z - a.z;
        }
        if (e.determinant() < 0) std::swap(t[2], t[3]);
    }
    return m;
}

namespace {

Eigen::Matrix3d edge_matrix(const std::vector<Point3>& v, const std::array<int, 4>& t) {
    Eigen::Matrix3d e;
    for (int s = 0; s < 3; ++s) {
        const Point3 &a = v[t[0]], &b = v[t[s + 1]];
        e.col(s) << b.x - a.x, b.y - a.y, b.z - a.z;
    }
    return e;
}

double spectral_norm(const Eigen::Matrix3d& m) {
    return Eigen::JacobiSVD<Eigen::Matrix3d>(m).singularValues()(0);
}

}  // namespace

DistortionReport inner_distortion_identity(const TetMesh& mesh, const std::vector<Point3>& images) {
    if (images.size() != mesh.vertices.size())
        throw std::invalid_argument("inner_distortion_identity: one image per vertex expected");
    DistortionReport r;
    for (auto& t : mesh.tets) {
        Eigen::Matrix3d e = edge_matrix(mesh.vertices, t), f = edge_matrix(images, t);
        double vol = e.determinant() / 6, ivol = f.determinant() / 6;
        if (!(vol > 0) || !(ivol > 0)) throw geometry_error("inner_distortion_identity: nonpositive Jacobian");
        Eigen::Matrix3d dh = f * e.inverse();
        r.lhs += std::pow(spectral_norm(dh), 3) * vol;
        // inverse map on the image simplex
        Eigen::Matrix3d df = e * f.inverse();
        double jf = df.determinant();
        Eigen::Matrix3d adj = jf * df.inverse().transpose();
        r.rhs += std::pow(spectral_norm(adj), 3) / (jf * jf) * ivol;
        r.volume += vol;
        r.image_volume += ivol;
    }
    return r;
}

}  // namespace sobext
