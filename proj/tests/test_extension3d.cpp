#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sobext/extension3d.hpp"

using namespace sobext;

namespace {

ExtensionOptions depth(int levels) {
    ExtensionOptions o;
    o.levels = levels;
    return o;
}

const ExtensionField& identity_field() {
    static ExtensionField h(std::make_shared<IdentityMap>(), depth(3));
    return h;
}

const ExtensionField& cantor_field() {
    static ExtensionField h(std::make_shared<CantorShear>(3), depth(3));
    return h;
}

// uniform shift of the level-k grid off the dyadic lattice
Point2 grid_shift(const ExtensionField& h, int k) {
    auto& g = h.pl_grids()[static_cast<std::size_t>(k - 1)].grid;
    return g.vertex(0, 0) - g.lattice(0, 0);
}

// independent model of the identity extension: the shift moves linearly from the
// level-k value at the top to the level-(k+1) value at mid and stays there below
Point2 identity_oracle(const ExtensionField& h, double x, double y, double t) {
    int k = h.level_of(t);
    auto c = CubeCell::make(k, h.locate(k, x, y));
    Point2 top = grid_shift(h, k), low = grid_shift(h, k + 1);
    double s = t >= c.mid ? (c.top - t) / (c.top - c.mid) : 1;
    Point2 o = top + (low - top) * s;
    return {x + o.x, y + o.y};
}

}  // namespace

TEST_SUITE("extension3d") {

TEST_CASE("cube cells") {
    auto c = CubeCell::make(2, 6);
    CHECK(c.ix == 2);
    CHECK(c.iy == 1);
    CHECK(c.side == 0.25);
    CHECK(c.top == 0.5);
    CHECK(c.mid == 0.375);
    CHECK(c.bot == 0.25);
    CHECK(c.to_unit(0.625, 0.375) == Point2{0.5, 0.5});
    CHECK_THROWS_AS(CubeCell::make(2, 16), std::invalid_argument);
}

TEST_CASE("arm and boundary interpolation") {
    ArmParam a{{0, 0.5, 1}, {{0, 0}, {1, 1}, {2, 0}}};
    CHECK(a.at(0.25) == Point2{0.5, 0.5});
    CHECK(a.at(2) == Point2{2, 0});
    SquareBoundaryMap m0 = SquareBoundaryMap::from_marked({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    SquareBoundaryMap m1 = SquareBoundaryMap::from_marked({{0, 0}, {2, 0}, {2, 2}, {0, 2}}, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    auto half = lerp_boundary(m0, m1, 0.5);
    CHECK(dist(half.at_theta(2), {1.5, 1.5}) < 1e-15);
    CHECK(lerp_boundary(m0, m1, 0).images == m0.images);
}

TEST_CASE("identity: slices are the interpolated grid shift") {
    auto& h = identity_field();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0, 1), tt(0.125, 1);
    double worst = 0;
    for (int i = 0; i < 2000; ++i) {
        double x = u(rng), y = u(rng), t = tt(rng);
        auto p = h.eval(x, y, t);
        worst = std::max(worst, dist({p.x, p.y}, identity_oracle(h, x, y, t)));
    }
    CHECK(worst <= 1e-9);
    for (int k = 1; k <= 3; ++k) CHECK(h.cell(k, 0).data().lower_route == "direct");
}

TEST_CASE("horizontal planes are preserved exactly") {
    auto& h = cantor_field();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1), tt(0.125, 1);
    for (int i = 0; i < 300; ++i) {
        double t = tt(rng);
        CHECK(h.eval(u(rng), u(rng), t).z == t);
    }
}

TEST_CASE("cell faces agree") {
    for (auto* h : {&identity_field(), &cantor_field()}) {
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> u(0, 1);
        double worst = 0;
        for (int i = 0; i < 100; ++i) {
            int k = 1 + i % 2;
            double x = u(rng), y = u(rng);
            auto c = CubeCell::make(k, h->locate(k, x, y));
            auto a = h->eval_cell(k, c.j, x, y, c.bot);
            auto b = h->eval_cell(k + 1, h->locate(k + 1, x, y), x, y, c.bot);
            worst = std::max(worst, std::hypot(a.x - b.x, a.y - b.y));
        }
        CHECK(worst <= 1e-9);
        // neighbouring cells share side faces
        double side = 0;
        for (int i = 0; i < 50; ++i) {
            double y = u(rng), t = 0.5 + 0.5 * u(rng);
            auto a = h->eval_cell(1, 0, 0.5, std::min(y, 0.5), t);
            auto b = h->eval_cell(1, 1, 0.5, std::min(y, 0.5), t);
            side = std::max(side, std::hypot(a.x - b.x, a.y - b.y));
        }
        CHECK(side <= 1e-9);
    }
}

TEST_CASE("top face follows the grid parametrization") {
    auto& h = cantor_field();
    auto& pl = h.pl_grids()[1];
    for (int j : {0, 5, 15}) {
        auto par = pl.param(j);
        auto c = CubeCell::make(2, j);
        for (double th : {0.0, 0.3, 1.5, 2.25, 3.9}) {
            Point2 uv = square_point(th);
            Point2 p = h.cell(2, j).map(uv, c.top);
            CHECK(dist(p, par.at_theta(th)) <= 1e-9);
        }
    }
}

TEST_CASE("slices of the Cantor shear are injective") {
    auto& h = cantor_field();
    for (int j : {0, 5, 10, 15}) {
        auto r = slice_injectivity(h, 2, j);
        CHECK(r.points == 33 * 33);
        CHECK(r.slices == 17);
        CHECK(r.collisions == 0);
        CHECK(r.min_separation > 1e-12);
    }
}

TEST_CASE("energy of linear maps") {
    auto& id = identity_field();
    auto e = energy_estimate(id, 3, 8);
    CHECK(e.volume == doctest::Approx(0.5 + 0.25 + 0.125));
    // the shift moves in t on the upper half of each cell, the lower half is a translation
    double want = 0;
    for (int k = 1; k <= 3; ++k) {
        auto c = CubeCell::make(k, 0);
        Point2 v = (grid_shift(id, k + 1) - grid_shift(id, k)) / (c.top - c.mid);
        double upper = operator_norm3({{{1, 0, -v.x}, {0, 1, -v.y}, {0, 0, 1}}});
        want += std::ldexp(1.0, -k) / 2 * (std::pow(upper, 3) + 1);
    }
    CHECK(e.total == doctest::Approx(want).epsilon(1e-6));
    CHECK(e.per_level.size() == 3);

    Mat2 a{{{2, 0}, {0, 1}}};
    ExtensionField h(std::make_shared<AffineMap>(a, Point2{0, 0}), depth(2));
    for (double q : {1.0, 2.0}) {
        auto ea = energy_estimate(h, q, 8);
        CHECK(ea.total == doctest::Approx(std::pow(2.0, q) * ea.volume).epsilon(0.02));
    }
    CHECK_THROWS_AS(energy_estimate(h, 0.5, 8), std::invalid_argument);
    CHECK_THROWS_AS(energy_estimate(h, 2, 4), std::invalid_argument);
    CHECK(operator_norm3({{{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}}) == doctest::Approx(2));
}

TEST_CASE("goal ratios") {
    auto& id = identity_field();
    for (int k = 1; k <= 3; ++k) {
        auto g = goal_check(id, k, 0);
        CHECK(std::isfinite(g.ratio));
        CHECK(g.lipschitz == doctest::Approx(1).epsilon(0.05));
        // own lengths near 4 + 4 * 2 in cell units
        CHECK(g.own == doctest::Approx(12).epsilon(0.1));
        CHECK(g.ratio <= g.ratio_own);
    }
    // homogeneity under scaling of the map
    Mat2 a{{{1, 0.3}, {0, 1}}}, b{{{3, 0.9}, {0, 3}}};
    ExtensionField ha(std::make_shared<AffineMap>(a, Point2{0, 0}), depth(2));
    ExtensionField hb(std::make_shared<AffineMap>(b, Point2{0, 0}), depth(2));
    auto ga = goal_check(ha, 2, 5), gb = goal_check(hb, 2, 5);
    CHECK(gb.own == doctest::Approx(3 * ga.own));
    // the t direction keeps unit speed, so the scaled Lipschitz constant is at most 3 times
    CHECK(gb.lipschitz <= 3 * ga.lipschitz + 1e-9);
    CHECK(gb.lipschitz >= 2.9 * ga.lipschitz);

    auto& c = cantor_field();
    double r8 = 0, r16 = 0;
    for (int j = 0; j < 16; ++j) {
        r8 = std::max(r8, goal_check(c, 2, j, 8).ratio);
        r16 = std::max(r16, goal_check(c, 2, j, 16).ratio);
    }
    CHECK(std::abs(r16 - r8) <= 0.2 * r8);
}

TEST_CASE("evaluation range") {
    auto& h = identity_field();
    CHECK(h.min_t() == 0.125);
    CHECK_NOTHROW(h.eval(0.5, 0.5, 0.125));
    CHECK_THROWS_AS(h.eval(0.5, 0.5, 0.1), std::out_of_range);
    CHECK_THROWS_AS(h.eval(0.5, 0.5, 1.5), std::out_of_range);
    CHECK(h.level_of(1) == 1);
    CHECK(h.level_of(0.5) == 2);
    CHECK(h.level_of(0.3) == 2);
    CHECK(h.level_of(0.125) == 3);
}

TEST_CASE("exports") {
    ExtensionField h(std::make_shared<IdentityMap>(), depth(1));
    std::istringstream obj(export_obj(h, 3));
    std::string line;
    int v = 0, l = 0;
    while (std::getline(obj, line)) {
        if (line.rfind("v ", 0) == 0) {
            ++v;
            std::istringstream ls(line.substr(2));
            double x, y, z;
            CHECK(static_cast<bool>(ls >> x >> y >> z));
        } else if (line.rfind("l ", 0) == 0) {
            ++l;
        }
    }
    CHECK(v > 0);
    CHECK(l >= 4 * 3);
    auto js = sample_json(h, 4);
    CHECK(js["resolution"] == 4);
    CHECK(js["points"].size() == 3 * 25);
    for (auto& p : js["points"]) CHECK(p.size() == 5);
    CHECK(h.config()["levels"] == 1);
}

TEST_CASE("construction failures name the cell") {
    cell_error e(2, 7, "boom");
    CHECK(e.k == 2);
    CHECK(e.j == 7);
    CHECK(std::string(e.what()).find("cell (2, 7)") != std::string::npos);
}

}  // TEST_SUITE
