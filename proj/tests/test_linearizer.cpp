#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sobext/linearizer.hpp"

using namespace sobext;

namespace {

std::vector<GoodGrid> shifted_grids(int levels) {
    std::vector<GoodGrid> g;
    for (int k = 1; k <= levels; ++k) g.push_back(uniform_shift_grid(k, 0.5 * (shift_window_lo(k) + shift_window_hi(k))));
    return g;
}

bool on_polyline(Point2 p, const PolyLine& pl) {
    for (std::size_t i = 0; i + 1 < pl.size(); ++i)
        if (on_segment(p, pl[i], pl[i + 1])) return true;
    return false;
}

// outer boundary of the 2x2 children of coarse cell j, counterclockwise
std::vector<Point2> children_outer(const PLGrid& fine, int j, int coarse_n) {
    int ix = j % coarse_n, iy = j / coarse_n;
    std::vector<Point2> r;
    auto add = [&](const PolyLine& l, bool fwd) {
        if (fwd)
            r.insert(r.end(), l.begin(), l.end() - 1);
        else
            r.insert(r.end(), l.rbegin(), l.rend() - 1);
    };
    int x0 = 2 * ix, y0 = 2 * iy;
    add(fine.edges[fine.horizontal_id(x0, y0)].line, true);
    add(fine.edges[fine.horizontal_id(x0 + 1, y0)].line, true);
    add(fine.edges[fine.vertical_id(x0 + 2, y0)].line, true);
    add(fine.edges[fine.vertical_id(x0 + 2, y0 + 1)].line, true);
    add(fine.edges[fine.horizontal_id(x0 + 1, y0 + 2)].line, false);
    add(fine.edges[fine.horizontal_id(x0, y0 + 2)].line, false);
    add(fine.edges[fine.vertical_id(x0, y0 + 1)].line, false);
    add(fine.edges[fine.vertical_id(x0, y0)].line, false);
    return r;
}

std::vector<Point2> ring_contacts(std::vector<Point2> a, std::vector<Point2> b) {
    std::vector<Point2> out;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            auto r = segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]);
            if (r.kind == SegRelation::disjoint) continue;
            bool dup = false;
            for (auto q : out) dup = dup || q == r.point;
            if (!dup) out.push_back(r.point);
        }
    return out;
}

}  // namespace

TEST_SUITE("linearizer") {

TEST_CASE("untangle keeps simple polylines and shortens tangled ones") {
    PolyLine straight{{0, 0}, {1, 0}, {2, 0.5}, {3, 0}};
    CHECK(untangle_polyline(straight) == straight);

    // an inscribed quarter circle is already simple and shorter than the arc
    PolyLine arc;
    for (int i = 0; i <= 64; ++i) {
        double a = std::numbers::pi / 2 * i / 64;
        arc.push_back({std::cos(a), std::sin(a)});
    }
    CHECK(untangle_polyline(arc) == arc);
    CHECK(polyline_length(arc) < std::numbers::pi / 2);

    // a loop: the path crosses itself once
    PolyLine loop{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, -1}, {3, -1}};
    REQUIRE_FALSE(polyline_is_simple(loop));
    auto u = untangle_polyline(loop);
    CHECK(polyline_is_simple(u));
    CHECK(u.front() == loop.front());
    CHECK(u.back() == loop.back());
    CHECK(polyline_length(u) < polyline_length(loop));
    // the shortcut goes through the crossing (1,0)
    CHECK(on_polyline({1, 0}, u));

    // overlapping back-and-forth
    PolyLine back{{0, 0}, {2, 0}, {1, 0}, {1, 1}};
    auto v = untangle_polyline(back);
    CHECK(polyline_is_simple(v));
    CHECK(polyline_length(v) == doctest::Approx(2.0));
}

TEST_CASE("identity grids stay straight") {
    auto phi = std::make_shared<IdentityMap>();
    auto grids = shifted_grids(3);
    auto raw = image_grid(phi, grids[1], &grids[0], &grids[2], 1e-3);
    auto lin = linearize_vertices(raw, {0.001, 0.001, 0.001});
    // PL grid with straight incidences is reproduced
    for (std::size_t e = 0; e < raw.edges.size(); ++e)
        for (std::size_t m = 0; m < raw.edges[e].pieces.size(); ++m) {
            auto& a = raw.edges[e].pieces[m].pts;
            auto& b = lin.edges[e].pieces[m].pts;
            CHECK(a.front() == b.front());
            CHECK(a.back() == b.back());
            for (auto p : b) CHECK(on_segment(p, a.front(), a.back()));
        }
    auto pls = build_pl_grids(phi, grids);
    REQUIRE(pls.size() == 3);
    for (auto& g : pls) {
        CHECK(verify_level(g).empty());
        for (auto& e : g.edges) {
            // only the marks survive
            CHECK(e.line.size() == e.marks.size());
        }
        for (int j = 0; j < g.grid.quad_count(); ++j) {
            auto q = g.grid.quad(j);
            auto r = g.ring(j);
            CHECK(r.front() == q[0]);
            CHECK(g.cell_length(j) == doctest::Approx(4 * g.grid.side()));
        }
    }
}

TEST_CASE("vertex images, shared sides and the parametrization") {
    auto phi = std::make_shared<SmoothMap>(0.15);
    auto grids = shifted_grids(3);
    auto pls = build_pl_grids(phi, grids);
    for (auto& g : pls) {
        int n = g.n();
        for (int iy = 0; iy <= n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                auto& l = g.edges[g.horizontal_id(ix, iy)].line;
                CHECK(l.front() == (*phi)(g.grid.vertex(ix, iy)));
                CHECK(l.back() == (*phi)(g.grid.vertex(ix + 1, iy)));
            }
        // neighbouring cells traverse the shared side in opposite directions, vertex for vertex
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix + 1 < n; ++ix) {
                auto left = g.param(iy * n + ix), right = g.param(iy * n + ix + 1);
                for (int s = 0; s <= 16; ++s) {
                    double u = s / 16.0;
                    CHECK(dist(left.at_theta(1 + u), right.at_theta(4 - u)) < 1e-13);
                }
            }
        for (int j = 0; j < g.grid.quad_count(); ++j) {
            auto rep = parametrize(g.ring(j), g.cell_marks(j), g.level);
            CHECK(rep.pieces <= 16);
            CHECK(rep.constant <= 40);
            // marks agree with phi at the corners
            auto q = g.grid.quad(j);
            for (int c = 0; c < 4; ++c) CHECK(dist(rep.map.at_theta(c), (*phi)(q[c])) < 1e-15);
        }
        CHECK(verify_level(g).empty());
    }
}

TEST_CASE("identity speed constant at level 3") {
    auto phi = std::make_shared<IdentityMap>();
    auto pls = build_pl_grids(phi, shifted_grids(4));
    auto& g = pls[2];
    double worst = 0;
    for (int j = 0; j < g.grid.quad_count(); ++j) worst = std::max(worst, parametrize(g.ring(j), g.cell_marks(j), 3).constant);
    CHECK(worst == doctest::Approx(0.25));
    CHECK(worst <= 14);

    std::vector<Point2> sq{{0, 0}, {0.125, 0}, {0.125, 0.125}, {0, 0.125}};
    auto rep = parametrize(sq, {{0, 0}, {1, 1}, {2, 2}, {3, 3}}, 3);
    CHECK(rep.pieces == 4);
    CHECK(rep.max_speed == doctest::Approx(1));
    CHECK_THROWS_AS(parametrize(sq, {{0, 0}, {7, 1}}, 3), geometry_error);
}

TEST_CASE("cross-level contacts are exactly the marked points") {
    auto grids = shifted_grids(3);
    auto id = std::make_shared<IdentityMap>();
    auto ipl = build_pl_grids(id, grids);
    int expected = 0;
    for (auto& e : ipl[1].edges)
        for (auto k : e.kinds) expected += k == MarkKind::finer;
    CHECK(preserve_cross_level(ipl[1], ipl[2]) == expected);

    auto aff = std::make_shared<AffineMap>(Mat2{{{1.3, 0.4}, {-0.2, 0.9}}}, Point2{0.1, -0.3});
    auto apl = build_pl_grids(aff, grids);
    CHECK(preserve_cross_level(apl[1], apl[2]) == expected);
    CHECK(preserve_cross_level(apl[0], apl[1]) == preserve_cross_level(ipl[0], ipl[1]));

    auto cantor = std::make_shared<CantorShear>(3);
    auto cpl = build_pl_grids(cantor, grids);
    CHECK(preserve_cross_level(cpl[1], cpl[2]) == expected);
    for (auto& g : cpl) CHECK(verify_level(g).empty());

    // parent boundary meets the children's outer boundary in exactly two points
    for (auto* pl : {&ipl, &cpl}) {
        auto& coarse = (*pl)[1];
        auto& fine = (*pl)[2];
        for (int j = 0; j < coarse.grid.quad_count(); ++j) {
            auto c = ring_contacts(coarse.ring(j), children_outer(fine, j, coarse.n()));
            CHECK(c.size() == 2);
        }
    }
    CHECK_THROWS_AS(preserve_cross_level(ipl[0], ipl[2]), std::invalid_argument);
}

TEST_CASE("curved maps: spokes, distance and length properties") {
    auto phi = std::make_shared<RadialPower>(0.6, Point2{0.3, 0.2});
    auto grids = shifted_grids(3);
    auto pls = build_pl_grids(phi, grids);
    for (std::size_t i = 0; i < pls.size(); ++i) {
        auto raw = image_grid(phi, grids[i], i ? &grids[i - 1] : nullptr, i + 1 < grids.size() ? &grids[i + 1] : nullptr,
                              pls[i].tolerance);
        CHECK(verify_level(pls[i]).empty());
        for (auto& e : pls[i].edges) CHECK(polyline_length(e.line) <= e.measured_length * (1 + 1e-12));
        (void)raw;
    }
    for (std::size_t i = 0; i + 1 < pls.size(); ++i) CHECK(preserve_cross_level(pls[i], pls[i + 1]) > 0);
    auto j = pls[1].to_json();
    CHECK(j["edges"].size() == pls[1].edges.size());
    CHECK(j["breakpoints"].size() == 16);
}

TEST_CASE("overlapping balls are rejected") {
    auto phi = std::make_shared<IdentityMap>();
    auto grids = shifted_grids(2);
    auto raw = image_grid(phi, grids[1], &grids[0], nullptr, 1e-3);
    CHECK_THROWS_AS(linearize_vertices(raw, {0.2, 0.2, 0.2}), geometry_error);
    GoodGrid skew = grids[1];
    skew.vertices[5].x += 1e-3;
    CHECK_THROWS_AS(image_grid(phi, skew, nullptr, nullptr, 1e-3), std::invalid_argument);
}

}  // TEST_SUITE
