#include <cmath>

#include "doctest.h"
#include "sobext/homotopy.hpp"

using namespace sobext;

namespace {

// two curves meet only at their common last point
bool meet_only_at_end(const PolyLine& a, const PolyLine& b) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        for (std::size_t j = 0; j + 1 < b.size(); ++j) {
            auto r = segments_intersect(a[i], a[i + 1], b[j], b[j + 1]);
            if (r.kind == SegRelation::disjoint) continue;
            if (r.kind == SegRelation::endpoint_touch && r.point == a.back() && r.point == b.back()) continue;
            return false;
        }
    return true;
}

Cross plus_cross(Point2 c = {0, 0}) {
    Cross x;
    x.center = c;
    x.arms[0] = {c, {-1, c.y}};
    x.arms[1] = {c, {c.x, 1}};
    x.arms[2] = {c, {1, c.y}};
    x.arms[3] = {c, {c.x, -1}};
    return x;
}

}  // namespace

TEST_SUITE("homotopy") {

TEST_CASE("linear motion certificate") {
    MovingChain a{{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
    MovingChain b{{{0, 2}, {1, 2}}, {{0, 3}, {1, 3}}};
    CHECK(certify_linear_motion({a, b}).ok);
    // a rises through a static segment
    MovingChain wall{{{0.5, 0.5}, {2, 0.5}}, {{0.5, 0.5}, {2, 0.5}}};
    auto c = certify_linear_motion({a, wall});
    CHECK_FALSE(c.ok);
    CHECK(c.lambda == doctest::Approx(0.5));
    // shared fixed endpoint is not a contact
    MovingChain hinge{{{0, 0}, {1, 0}, {1, 1}}, {{0, 0}, {1, 0.2}, {1, 1}}};
    CHECK(certify_linear_motion({hinge}).ok);
    // a closed ring whose vertex sweeps across the opposite side
    MovingChain tri{{{0, 0}, {1, 0}, {0.5, 1}}, {{0, 0}, {1, 0}, {0.5, -1}}, true};
    CHECK_FALSE(certify_linear_motion({tri}).ok);
}

TEST_CASE("arc fractions") {
    auto f = arc_fractions({{0, 0}, {1, 0}, {1, 3}});
    CHECK(f[0] == 0);
    CHECK(f[1] == doctest::Approx(0.25));
    CHECK(f[2] == 1);
}

TEST_CASE("half-fixed family between identical curves is constant") {
    PolyLine g{{0, 0}, {1, 1}, {2, 0}};
    HalfFixedCurves h(g, g);
    CHECK(h.trivial());
    for (double t : {0.0, 0.3, 1.0}) CHECK(h(t) == g);
}

TEST_CASE("half-fixed family across a convex lens") {
    PolyLine g0{{0, 0}, {1, -1}, {2, 0}}, g1{{0, 0}, {1, 1}, {2, 0}};
    HalfFixedCurves h(g0, g1);
    CHECK(h(0) == g0);
    CHECK(h(1) == g1);
    auto mid = h(0.5);
    REQUIRE(mid.size() == 2);
    CHECK(mid.front() == Point2{0, 0});
    CHECK(mid.back() == Point2{2, 0});
    for (int i = 0; i <= 32; ++i) {
        auto c = h(i / 32.0);
        CHECK(c.front() == g0.front());
        CHECK(c.back() == g0.back());
        CHECK(polyline_is_simple(c));
    }
}

TEST_CASE("half-fixed family on a quadrilateral sweeps disjoint curves") {
    PolyLine g0{{1, 0}, {0.6, 0.8}, {0, 0.5}}, g1{{1, 0}, {0.5, 1.4}, {0, 0.5}};
    HalfFixedCurves h(g0, g1);
    // past the split point the curves are pairwise disjoint up to B
    const int n = 48;
    std::vector<PolyLine> free;
    for (int i = 1; i < n; ++i) {
        auto c = h(i / double(n));
        CHECK(polyline_is_simple(c));
        auto s = h.split(i / double(n));
        free.emplace_back(c.begin() + static_cast<long>(s.index), c.end());
    }
    for (std::size_t i = 0; i < free.size(); ++i)
        for (std::size_t j = i + 1; j < free.size(); ++j) CHECK(meet_only_at_end(free[i], free[j]));
    // continuity: nearby times give nearby curves
    double worst = 0;
    for (int i = 0; i < 256; ++i) {
        double t = i / 256.0, dt = 1 / 256.0;
        auto a = h(t), b = h(t + dt);
        for (int k = 0; k <= 16; ++k)
            worst = std::max(worst, dist(eval_fraction(a, k / 16.0), eval_fraction(b, k / 16.0)) / dt);
    }
    MESSAGE("time-Lipschitz estimate " << worst);
    CHECK(worst < 1e3);
    CHECK_THROWS_AS(HalfFixedCurves(g0, PolyLine{{1, 0}, {0.2, 0.6}, {0, 0.5}}), geometry_error);
}

TEST_CASE("half-fixed boundary homotopy leaves the rest of the map alone") {
    std::vector<Point2> ring0{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<Point2> ring1{{0, 0}, {1, 0}, {1, 1}, {0.5, 1.5}, {0, 1}};
    auto phi0 = SquareBoundaryMap::from_marked(ring0, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    auto phi1 = SquareBoundaryMap::from_marked(ring1, {{0, 0}, {1, 1}, {2, 2}, {4, 3}});
    HalfFixedHomotopy hom(phi0, phi1, 2, 3);
    CHECK(hom.arc_length() == doctest::Approx(1));
    for (int i = 0; i <= 16; ++i) {
        auto m = hom(i / 16.0);
        for (double th : {0.0, 0.5, 1.0, 1.7, 2.0, 3.0, 3.5})
            CHECK(dist(m.at_theta(th), phi0.at_theta(th)) < 1e-12);
        CHECK(is_simple(m.ring()));
    }
    for (double th : {2.25, 2.5, 2.75}) CHECK(dist(hom(1).at_theta(th), phi1.at_theta(th)) < 1e-12);
    CHECK_THROWS_AS(HalfFixedHomotopy(phi0, phi1, 2.5, 3), std::invalid_argument);
}

TEST_CASE("opened curve proportions") {
    OpenedCurve oc;
    oc.base = {{0, 0}, {1, 0}};
    oc.times = {0, 0.5};
    oc.normal = {{0, 1}, {0, 1}};
    oc.side = 0.2;
    CHECK(oc.split_point(1, 0.5, true) == Point2{1, 0});
    CHECK(dist(oc.split_point(1, 0.75, true), {1, 0.1}) < 1e-15);
    CHECK(dist(oc.split_point(1, 1, false), {1, -0.2}) < 1e-15);
    auto op = oc.opened(0.3, {2, 0}, true);
    REQUIRE(op.size() == 2);
    CHECK(dist(op[0], {0, 0.06}) < 1e-15);
    CHECK(oc.opened(1, {2, 0}, true).size() == 3);
}

TEST_CASE("cross centre migrates with simple intermediates") {
    Cross c0 = plus_cross();
    Point2 target{-0.4, 0.4};
    PolyLine a1{{-1, 0}, target}, a2{{0, 1}, target};
    auto across = [&] { CrossDeformation(c0, {{-1, 0}, {0.4, -0.4}}, {{0, 1}, {0.4, -0.4}}); };
    CHECK_THROWS_AS(across(), std::invalid_argument);
    CrossDeformation def(c0, a1, a2);
    CHECK_FALSE(def.constant());
    CHECK(def.first_failure() < 0);
    auto start = def(0);
    CHECK(start.center == c0.center);
    for (int i = 0; i < 4; ++i) CHECK(simplify_path(start.arms[i]) == simplify_path(c0.arms[i]));
    auto end = def(1);
    CHECK(dist(end.center, target) < 1e-12);
    CHECK(end.ends() == c0.ends());
    for (int i = 0; i <= 32; ++i) {
        auto x = def(i / 32.0);
        CHECK(x.simple());
        CHECK(x.ends() == c0.ends());
    }
    CHECK(cross_deform(c0, target, a1, a2, 1).center == end.center);

    CrossDeformation still(c0, {{-1, 0}, {0, 0}}, {{0, 1}, {0, 0}});
    CHECK(still.constant());
    CHECK(still(0.7).center == c0.center);
}

TEST_CASE("nudging pulls arms off the boundary") {
    auto sq = make_polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
    Cross c = plus_cross();
    c.arms[0] = {{0, 0}, {-0.5, 0}, {-0.5, -1}, {-1, -1}, {-1, 0}};
    CHECK_FALSE(c.clear_of(sq));
    auto n = nudge_cross(c, sq, 0.05);
    CHECK(n.simple());
    CHECK(n.clear_of(sq));
    CHECK(n.ends() == c.ends());
}

TEST_CASE("T-fix crosses meet both crosses only through arms 3 and 4") {
    auto sq = make_polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
    Cross t1 = plus_cross(), t2 = t1;
    t2.center = {0.3, -0.2};
    for (auto& arm : t2.arms) arm.front() = t2.center;
    auto rep = build_t_fix(t1, t2, sq);
    std::array<int, 4> want{0, 0, 1, 1};
    CHECK(rep.counts1 == want);
    CHECK(rep.counts2 == want);
    CHECK(rep.cross.simple());
    CHECK(rep.cross.clear_of(sq));
    CHECK(rep.cross.ends() == t1.ends());
    CHECK(dist(rep.cross.center, {-1, 1}) < 0.3);

    auto hex = make_polygon({{0, -1}, {1, -0.5}, {1, 0.5}, {0, 1}, {-1, 0.5}, {-1, -0.5}});
    Cross h;
    h.center = {0, 0};
    h.arms = {PolyLine{{0, 0}, {-1, 0}}, PolyLine{{0, 0}, {0, 1}}, PolyLine{{0, 0}, {1, 0}},
              PolyLine{{0, 0}, {0, -1}}};
    auto hr = build_t_fix(h, h, hex);
    CHECK(hr.counts1 == want);
    CHECK(hr.cross.simple());
}

TEST_CASE("grid-level homotopy") {
    std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    GridLevelHomotopy same(sq, {0, 1, 2, 3}, sq, {0, 1, 2, 3});
    for (double t : {0.0, 0.3, 1.0}) CHECK(is_simple(same(t)));
    CHECK(same(1) == sq);

    // inner square grows to the outer one
    std::vector<Point2> big{{-1, -1}, {2, -1}, {2, 2}, {-1, 2}};
    GridLevelHomotopy grow(sq, {0, 1, 2, 3}, big, {0, 1, 2, 3});
    CHECK(grow(0) == sq);
    CHECK(grow(1) == big);
    CHECK(grow.stage_kinds().size() == 8);
    for (int i = 0; i <= 64; ++i) CHECK(is_simple(grow(i / 64.0)));

    // refined ring (extra side vertices) onto a bent target
    std::vector<Point2> fine{{0, 0}, {0.5, 0}, {1, 0}, {1, 0.5}, {1, 1}, {0.5, 1}, {0, 1}, {0, 0.5}};
    std::vector<Point2> bent{{0, 0}, {0.5, 0.2}, {1, 0}, {1.2, 0.5}, {1, 1}, {0.5, 0.8}, {0, 1}, {0.2, 0.5}};
    GridLevelHomotopy g(fine, {0, 2, 4, 6}, bent, {0, 2, 4, 6});
    for (int i = 0; i <= 32; ++i) CHECK(is_simple(g(i / 32.0)));
    CHECK(g(1) == bent);
    CHECK(grid_level_homotopy(fine, {0, 2, 4, 6}, bent, {0, 2, 4, 6}, 0) == fine);
}

}  // TEST_SUITE
