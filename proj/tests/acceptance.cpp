// One PASS/FAIL line per acceptance criterion.
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "sobext/analysis.hpp"
#include "sobext/dyadic_grid.hpp"
#include "sobext/extension3d.hpp"
#include "sobext/geodesic.hpp"
#include "sobext/injectivizer.hpp"

using namespace sobext;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Point2 random_inside(const JordanPolygon& P, std::mt19937_64& rng) {
    double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
    for (auto& v : P.vertices) x0 = std::min(x0, v.x), y0 = std::min(y0, v.y), x1 = std::max(x1, v.x), y1 = std::max(y1, v.y);
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    for (;;) {
        Point2 p{ux(rng), uy(rng)};
        if (point_in_polygon(P, p) > 0) return p;
    }
}

// corners of the square go to vertices at quarter index spacing
SquareBoundaryMap boundary_onto(const JordanPolygon& P) {
    int n = static_cast<int>(P.size());
    return SquareBoundaryMap::from_marked(P.vertices, {{0, 0.0}, {n / 4, 1.0}, {n / 2, 2.0}, {3 * n / 4, 3.0}});
}

// largest image step over parameter step between consecutive knots
double knot_lipschitz(const SquareBoundaryMap& m) {
    double L = 0;
    for (std::size_t i = 0; i < m.knots.size(); ++i) {
        double t1 = i + 1 < m.knots.size() ? m.knots[i + 1] : 4.0;
        Point2 b = i + 1 < m.knots.size() ? m.images[i + 1] : m.images.front();
        L = std::max(L, dist(m.images[i], b) / (t1 - m.knots[i]));
    }
    return L;
}

JordanPolygon l_shape() { return make_polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}); }

// ---------------------------------------------------------------- criteria

Outcome geodesic_oracle() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> nv(3, 30);
    int length_bad = 0, seq_bad = 0;
    double worst = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        auto P = random_star_polygon(rng, nv(rng));
        Point2 a = random_inside(P, rng), b = random_inside(P, rng);
        auto f = shortest_path(P, a, b), g = shortest_path_oracle(P, a, b);
        double d = std::abs(polyline_length(f) - polyline_length(g));
        worst = std::max(worst, d);
        length_bad += d > 1e-9;
        seq_bad += f != g;
    }
    double t = seconds_since(t0);
    o.detail << "1000 polygons, max length gap " << worst << ", sequence mismatches " << seq_bad << ", " << t << " s";
    o.require(length_bad == 0, "length");
    o.require(seq_bad == 0, "vertex sequence");
    o.require(t < 60, "runtime");
    return o;
}

Outcome identity_extension() {
    Outcome o;
    // the diamond's boundary onto itself: corners at the square midpoints after the change of variables
    auto phi = SquareBoundaryMap::from_function([](Point2 uv) { return square_to_diamond(uv); }, 8);
    ShortestCurveExtension H(phi);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst = 0;
    int n = 0;
    while (n < 10000) {
        Point2 z{u(rng), u(rng)};
        if (std::abs(z.x) + std::abs(z.y) > 1) continue;
        worst = std::max(worst, dist(H.diamond(z), z));
        ++n;
    }
    o.detail << "10^4 diamond points, max |H(z) - z| = " << worst;
    o.require(worst <= 1e-9, "identity");
    return o;
}

Outcome lipschitz_certification() {
    Outcome o;
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> nv(6, 20);
    double c1 = 0, c2 = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto P = random_star_polygon(rng, nv(rng));
        auto phi = boundary_onto(P);
        double L = knot_lipschitz(phi);
        ShortestCurveExtension H(phi);
        SampleRegion sq{{0, 0}, {1, 1}, nullptr};
        auto f = [&](Point2 uv) { return H(uv); };
        c1 = std::max(c1, lipschitz_estimate(f, sq, 10000, 42 + rep) / L);
        c2 = std::max(c2, lipschitz_estimate(f, sq, 20000, 42 + rep) / L);
    }
    double drift = std::abs(c2 - c1) / c1;
    o.detail << "20 maps, C = " << c1 << " (doubled sampling " << c2 << ", drift " << drift * 100 << "%)";
    o.require(std::isfinite(c1) && c1 > 0, "finite C");
    o.require(drift <= 0.1, "stability");
    return o;
}

Outcome noncrossing_foliation() {
    Outcome o;
    std::vector<std::pair<std::string, SquareBoundaryMap>> cases;
    for (auto spec : {nlohmann::json{{"type", "identity"}}, nlohmann::json{{"type", "radial"}, {"alpha", 0.5}},
                      nlohmann::json{{"type", "cantor"}, {"k", 3}}, nlohmann::json{{"type", "smooth"}, {"amplitude", 0.2}}}) {
        auto m = make_map(spec);
        cases.push_back({spec["type"], SquareBoundaryMap::from_function([m](Point2 x) { return m->eval(x); }, 16)});
    }
    cases.push_back({"l-shape", SquareBoundaryMap::from_marked(l_shape().vertices, {{0, 0.0}, {1, 1.0}, {2, 2.0}, {4, 3.0}})});
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 3; ++rep) cases.push_back({"star", boundary_onto(random_star_polygon(rng, 14))});
    int crossings = 0, dirty = 0;
    for (auto& [name, phi] : cases) {
        ShortestCurveExtension H(phi);
        std::vector<PolyLine> leaves;
        for (int i = 0; i < 64; ++i) leaves.push_back(H.leaf(-1 + 2 * (i + 0.5) / 64));
        int c = 0;
        for (std::size_t i = 0; i < leaves.size(); ++i)
            for (std::size_t j = i + 1; j < leaves.size(); ++j) c += polylines_interior_cross(leaves[i], leaves[j]);
        auto mod = modify_curves(H);
        auto rep = verify_injective(mod.modified(), mod.region(), 200, 42);
        crossings += c;
        if (!rep.clean()) {
            ++dirty;
            o.detail << " " << name << ": " << rep.to_json().dump();
        }
    }
    o.detail << cases.size() << " maps, interior crossings " << crossings << ", maps with violations after injectivization "
             << dirty;
    o.require(crossings == 0, "levels cross");
    o.require(dirty == 0, "injectivized curves meet");
    return o;
}

Outcome equivalence() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, MapPtr>> maps{{"identity", std::make_shared<IdentityMap>()}};
    for (double a : {0.1, 0.15, 0.4, 0.6, 0.8})
        maps.push_back({"radial(" + std::to_string(a).substr(0, 4) + ")", std::make_shared<RadialPower>(a)});
    maps.push_back({"cantor(3)", std::make_shared<CantorShear>(3)});
    int agree = 0, total = 0;
    for (auto& [name, m] : maps)
        for (double q : {2.5, 3.0, 4.0}) {
            auto r = equivalence_check(*m, q, 8);
            ++total;
            agree += r.agree;
            if (!r.agree)
                o.detail << " " << name << " q=" << q << ": " << to_string(r.diam.verdict) << " vs "
                         << to_string(r.seminorm.levels.verdict);
        }
    double t = seconds_since(t0);
    o.detail << agree << "/" << total << " verdicts agree, " << t << " s";
    o.require(agree == total, "agreement");
    o.require(t < 600, "runtime");
    return o;
}

Outcome identity_closed_forms() {
    Outcome o;
    IdentityMap id;
    double d = diam_sum(id, 3, 10).cumulative.back(), dw = std::pow(2, 1.5) * (1 - std::ldexp(1.0, -10));
    double l = length_sum(id, 3, 10).cumulative.back(), lw = 64 * (1 - std::ldexp(1.0, -10));
    o.detail << "diam " << d << " (want " << dw << "), length " << l << " (want " << lw << ")";
    o.require(std::abs(d - dw) <= 1e-6, "diam_sum");
    o.require(std::abs(l - lw) <= 1e-3, "length_sum");
    return o;
}

Outcome decay() {
    Outcome o;
    SmoothMap sm(0.1);
    auto r = decay_check(sm, 2, 2, 8);
    o.detail << "local slopes";
    bool ok = true;
    for (std::size_t i = 0; i < r.local_slopes.size(); ++i) {
        int level = static_cast<int>(i) + 2;
        o.detail << " " << level << ":" << r.local_slopes[i];
        if (level >= 6) ok = ok && r.local_slopes[i] <= -0.5;
    }
    o.detail << " (predicted " << r.predicted << ")";
    o.require(ok, "slope by level 6");
    return o;
}

Outcome grid_selection() {
    Outcome o;
    IdentityMap id;
    double worst_id = 0;
    for (int k = 1; k <= 4; ++k) worst_id = std::max(worst_id, std::abs(select_good_grid(id, k, 2, 4, {16, 16}).constant - 1));
    o.require(worst_id <= 1e-9, "identity ratio");
    o.detail << "identity |ratio - 1| <= " << worst_id << ";";
    std::vector<nlohmann::json> specs{{{"type", "identity"}},
                                      {{"type", "affine"}, {"A", {{2, 0.5}, {0, 1}}}},
                                      {{"type", "smooth"}, {"amplitude", 0.1}},
                                      {{"type", "radial"}, {"alpha", 0.5}},
                                      {{"type", "cantor"}, {"k", 3}},
                                      {{"type", "saw"}, {"J", 1}, {"q", 2.0}}};
    int bad_cells = 0;
    for (auto& s : specs) {
        auto m = make_map(s);
        std::vector<GoodGrid> grids;
        double worst = 0;
        for (int k = 1; k <= 5; ++k) {
            auto sel = select_good_grid(*m, k, 2, 4, {16, 16});
            if (k <= 4) worst = std::max(worst, sel.constant);
            grids.push_back(sel.grid);
        }
        o.require(std::isfinite(worst), "finite ratio");
        o.detail << " " << s["type"].get<std::string>() << " " << worst;
        for (int k = 1; k <= 4; ++k) {
            auto& g = grids[static_cast<std::size_t>(k - 1)];
            for (int j = 0; j < g.quad_count(); ++j) {
                auto pc = parent_children(g, grids[static_cast<std::size_t>(k)], j);
                if (pc.crossings.size() != 2 || pc.min_vertex_distance < std::ldexp(1.0, -k) / 40 * (1 - 1e-12)) ++bad_cells;
            }
        }
    }
    o.detail << "; cells violating the two-point rule: " << bad_cells;
    o.require(bad_cells == 0, "parent/child intersections");
    return o;
}

Outcome extension_faithfulness() {
    Outcome o;
    for (auto spec : {nlohmann::json{{"type", "identity"}}, nlohmann::json{{"type", "cantor"}, {"k", 3}}}) {
        ExtensionOptions opt;
        opt.levels = 3;
        ExtensionField h(make_map(spec), opt);
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> u(0, 1);
        bool planes = true;
        for (int i = 0; i < 1000; ++i) {
            double t = h.min_t() + (1 - h.min_t()) * u(rng);
            planes = planes && h.eval(u(rng), u(rng), t).z == t;
        }
        double face = 0;
        for (int i = 0; i < 100; ++i) {
            int k = 1 + i % 2;
            double x = u(rng), y = u(rng);
            auto c = CubeCell::make(k, h.locate(k, x, y));
            auto a = h.eval_cell(k, c.j, x, y, c.bot);
            auto b = h.eval_cell(k + 1, h.locate(k + 1, x, y), x, y, c.bot);
            face = std::max(face, std::hypot(a.x - b.x, a.y - b.y));
        }
        int collisions = 0;
        double sep = INFINITY;
        double r8 = 0, r16 = 0;
        bool finite = true;
        for (int k = 1; k <= 3; ++k)
            for (int j = 0; j < h.cell_count(k); ++j) {
                auto s = slice_injectivity(h, k, j, 33, 17, 1e-12);
                collisions += s.collisions;
                sep = std::min(sep, s.min_separation);
                auto g8 = goal_check(h, k, j, 8), g16 = goal_check(h, k, j, 16);
                finite = finite && std::isfinite(g8.ratio) && std::isfinite(g16.ratio);
                r8 = std::max(r8, g8.ratio);
                r16 = std::max(r16, g16.ratio);
            }
        double drift = std::abs(r16 - r8) / r8;
        std::string name = spec["type"];
        o.detail << name << ": planes " << (planes ? "exact" : "MOVED") << ", face gap " << face << ", collisions "
                 << collisions << " (min separation " << sep << "), goal max " << r8 << " -> " << r16 << "; ";
        o.require(planes, name + " planes");
        o.require(face <= 1e-9, name + " faces");
        o.require(collisions == 0, name + " injectivity");
        o.require(finite && drift <= 0.2, name + " goal stability");
    }
    return o;
}

Outcome inner_distortion() {
    Outcome o;
    auto mesh = cube_tet_mesh(3);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> jitter(-0.04, 0.04), coef(-0.4, 0.4), scale(0.5, 2);
    int done = 0, attempts = 0;
    double worst = 0;
    while (done < 50 && attempts < 1000) {
        ++attempts;
        double a = scale(rng), b = scale(rng), c = scale(rng), s1 = coef(rng), s2 = coef(rng), s3 = coef(rng);
        std::vector<Point3> img;
        for (auto v : mesh.vertices)
            img.push_back({a * v.x + s1 * v.y + jitter(rng), b * v.y + s2 * v.z + jitter(rng),
                           c * v.z + s3 * v.x + jitter(rng)});
        bool positive = true;
        for (auto& t : mesh.tets) {
            auto d = [&](int i) {
                auto p = img[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
                auto q = img[static_cast<std::size_t>(t[0])];
                return Point3{p.x - q.x, p.y - q.y, p.z - q.z};
            };
            Point3 e1 = d(1), e2 = d(2), e3 = d(3);
            double det = e1.x * (e2.y * e3.z - e2.z * e3.y) - e1.y * (e2.x * e3.z - e2.z * e3.x) +
                         e1.z * (e2.x * e3.y - e2.y * e3.x);
            auto dom = [&](int i) {
                auto p = mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
                auto q = mesh.vertices[static_cast<std::size_t>(t[0])];
                return Point3{p.x - q.x, p.y - q.y, p.z - q.z};
            };
            Point3 f1 = dom(1), f2 = dom(2), f3 = dom(3);
            double dd = f1.x * (f2.y * f3.z - f2.z * f3.y) - f1.y * (f2.x * f3.z - f2.z * f3.x) +
                        f1.z * (f2.x * f3.y - f2.y * f3.x);
            positive = positive && det * dd > 0;
        }
        if (!positive) continue;
        auto r = inner_distortion_identity(mesh, img);
        worst = std::max(worst, std::abs(r.lhs - r.rhs) / std::max(1.0, std::abs(r.lhs)));
        ++done;
    }
    o.detail << done << " homeomorphisms, max relative |lhs - rhs| " << worst;
    o.require(done == 50, "enough samples");
    o.require(worst <= 1e-9, "identity");
    return o;
}

Outcome counterexamples() {
    Outcome o;
    SeminormOptions opt;
    opt.method = SeminormMethod::saw_split;
    double prev = 0;
    o.detail << "saw seminorm";
    for (int J = 1; J <= 4; ++J) {
        SawShear s(J, 2.0);
        double v = gagliardo(s, 2, opt).value;
        o.detail << " J=" << J << ":" << v;
        if (J > 1) o.require(v >= 1.5 * prev, "growth at J=" + std::to_string(J));
        prev = v;
    }
    // radial powers in the divergence window q (1 - alpha) > 3
    int window = 0, diverging = 0;
    std::vector<std::pair<double, double>> in_window{{0.1, 4.0}, {0.15, 4.0}};
    for (auto [alpha, q] : in_window) {
        RadialPower rp(alpha);
        auto r = equivalence_check(rp, q, 8);
        ++window;
        diverging += r.diam.verdict == Verdict::diverging && r.seminorm.levels.verdict == Verdict::diverging;
    }
    o.detail << "; radial in window: " << diverging << "/" << window << " diverging";
    o.require(diverging == window, "radial divergence");
    return o;
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"geodesic oracle equivalence", geodesic_oracle},
        {"shortest-curve extension of the identity", identity_extension},
        {"Lipschitz certification", lipschitz_certification},
        {"non-crossing foliation and injectivization", noncrossing_foliation},
        {"diameter/seminorm equivalence", equivalence},
        {"identity closed forms", identity_closed_forms},
        {"decay of the good-grid sums", decay},
        {"good grid selection", grid_selection},
        {"3D extension faithfulness", extension_faithfulness},
        {"inner distortion identity", inner_distortion},
        {"counterexample behaviour", counterexamples},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail.str()
                  << " (" << seconds_since(t0) << " s)" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
