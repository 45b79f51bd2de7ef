#include <cmath>
#include <random>

#include "doctest.h"
#include "sobext/injectivizer.hpp"

using namespace sobext;

namespace {

ShortestCurveExtension extension_onto(const std::vector<Point2>& ring, std::array<int, 4> corners) {
    return ShortestCurveExtension(
        SquareBoundaryMap::from_marked(ring, {{corners[0], 0}, {corners[1], 1}, {corners[2], 2}, {corners[3], 3}}));
}

// L-shape; the top side of the square wraps around the reflex corner (1,1)
std::vector<Point2> l_ring() { return {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}; }

}  // namespace

TEST_SUITE("injectivizer") {

TEST_CASE("f_star formula") {
    // empty flat part
    for (int i = 1; i <= 10; ++i) {
        double x = i / 10.0;
        CHECK(f_star(x, 0, x) == doctest::Approx((x + 1) / 2));
    }
    CHECK(f_star(0, 0, 0) == 0);
    // flat on [0, 1/2], then linear to 1
    auto f = MonotoneReparam::from_samples({0, 0.5, 1}, {0, 0, 1});
    CHECK(f.flat() == 0.5);
    CHECK(f.star(0.25) == doctest::Approx(0.25));
    CHECK(f.star(0.5) == doctest::Approx(0.5));
    CHECK(f.star(0.75) == doctest::Approx(0.75));
    CHECK(f.star(1) == doctest::Approx(1));
    double prev = -1;
    for (int i = 0; i <= 100; ++i) {
        double v = f.star(i / 100.0);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(f.star_mirrored(1) == 0);
    CHECK_THROWS_AS(MonotoneReparam::from_samples({0, 0.5, 1}, {0, 0.7, 0.6}), std::invalid_argument);
}

TEST_CASE("normal segments stay inside and apart") {
    std::mt19937_64 rng(7);
    std::vector<JordanPolygon> polys{make_polygon(l_ring())};
    for (int i = 0; i < 5; ++i) polys.push_back(random_star_polygon(rng, 12));
    for (auto& poly : polys) {
        auto segs = normal_segments(poly, 0.1);
        std::size_t n = poly.size();
        for (auto& s : segs) {
            CHECK(s.length() == doctest::Approx(0.1 * s.D / 3));
            CHECK(point_in_polygon(poly, s.tip) == 1);
            for (std::size_t e = 0; e < n; ++e) {
                auto r = segments_intersect(s.vertex, s.tip, poly[e], poly[(e + 1) % n]);
                if (r.kind != SegRelation::disjoint) CHECK(r.point == s.vertex);
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                CHECK(segments_intersect(segs[i].vertex, segs[i].tip, segs[j].vertex, segs[j].tip).kind ==
                      SegRelation::disjoint);
    }
    CHECK_THROWS_AS(normal_segments(polys[0], 1.0), std::invalid_argument);
}

TEST_CASE("convex targets are left alone") {
    auto ext = extension_onto({{0, 0}, {1, 0}, {1.2, 0.9}, {0.1, 1.1}}, {0, 1, 2, 3});
    auto mod = modify_curves(ext);
    for (auto& p : mod.plans()) CHECK_FALSE(p.active);
    for (int i = 0; i <= 20; ++i) {
        double s = -1 + i / 10.0;
        CHECK(mod(s) == ext.leaf(s));
    }
    CHECK(verify_injective(mod.modified(), mod.region()).clean());
}

TEST_CASE("reflex fan is spread along the normal segment") {
    auto ext = extension_onto(l_ring(), {0, 1, 2, 4});
    CurveFamily raw{[ext](double s) { return ext.leaf(s); }, -1, 1};
    auto before = verify_injective(raw, ext.domain().polygon());
    CHECK_FALSE(before.clean());

    for (double eps : {0.1, 0.01}) {
        auto mod = modify_curves(ext, {eps, 512});
        int active = 0;
        for (std::size_t i = 0; i < mod.plans().size(); ++i) {
            auto& p = mod.plans()[i];
            if (!p.active) continue;
            ++active;
            CHECK(p.seg.vertex == Point2{1, 1});
            // strictly monotone offsets over the plan's range
            double prev = -1;
            for (int k = 1; k <= 100; ++k) {
                double s = p.anchor + (p.reach - p.anchor) * k / 101.0;
                double o = mod.offset(i, s);
                CHECK(o > prev);
                CHECK(o <= p.seg.length() * (1 + 1e-12));
                prev = o;
            }
            // the anchor and reach curves are unchanged
            CHECK(mod(p.anchor) == ext.leaf(p.anchor));
            CHECK(mod(p.reach) == ext.leaf(p.reach));
        }
        CHECK(active == 1);
        auto after = verify_injective(mod.modified(), mod.region());
        CHECK(after.clean());
        if (!after.clean()) MESSAGE(after.to_json().dump());
        // closeness: every modified curve lies within eps D/3 of the original
        double bound = mod.plans()[0].seg.length();
        for (int k = 0; k <= 64; ++k) {
            double s = -1 + k / 32.0;
            auto a = mod(s), b = ext.leaf(s);
            for (auto q : a) {
                double d = 1e300;
                for (std::size_t j = 0; j + 1 < b.size(); ++j) d = std::min(d, point_segment_distance(q, b[j], b[j + 1]));
                if (b.size() == 1) d = dist(q, b[0]);
                CHECK(d <= bound * (1 + 1e-9));
            }
        }
    }
}

TEST_CASE("random 12-gons: non-crossing leaves and disjoint modified curves") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 4; ++trial) {
        auto poly = random_star_polygon(rng, 12);
        auto ext = extension_onto(poly.vertices, {0, 3, 6, 9});
        for (int i = 0; i < 64; ++i)
            for (int j = i + 1; j < 64; ++j)
                CHECK_FALSE(polylines_interior_cross(ext.leaf(-1 + (i + 0.5) / 32), ext.leaf(-1 + (j + 0.5) / 32)));
        auto mod = modify_curves(ext);
        auto rep = verify_injective(mod.modified(), mod.region(), 200);
        CHECK(rep.pairs == 200);
        CHECK(rep.clean());
        if (!rep.clean()) MESSAGE(rep.to_json().dump());
    }
}

TEST_CASE("violation report format") {
    Violation v{"crossing", {0.1, 0.2}, {1, 2}};
    auto j = v.to_json();
    CHECK(j["type"] == "crossing");
    CHECK(j["s_values"].size() == 2);
    CHECK(j["location"][1] == 2);
}

TEST_CASE("schedules vanish at birth and death and are continuous") {
    auto D = [](double t) { return 1 + 0.5 * std::sin(7 * t); };
    auto sch = vertex_schedule({{0.1, 0.4}, {0.6, 0.62}}, D, 0.1, 0.05);
    CHECK(sch(0.1) == 0);
    CHECK(sch(0.4) == 0);
    CHECK(sch(0.6) == 0);
    CHECK(sch(0.5) == 0);
    CHECK(sch(0.25) == doctest::Approx(0.1 * lower_bound_D(D, 0.1, 0.4)));
    CHECK(sch(0.25) > 0);
    double slope = 0.1 * 1.5 / 0.01 + 1;
    double step = std::ldexp(1.0, -12);
    for (double t = 0; t + step <= 1; t += step) CHECK(std::abs(sch(t + step) - sch(t)) <= slope * step);
    CHECK(lower_bound_D(D, 0, 1) <= 0.9 * 0.5 + 1e-3);
}

TEST_CASE("blending slice maps") {
    auto id = sample_slice([](Point2 p) { return p; }, 8);
    auto rep = blend_check(id, id);
    CHECK(rep.ok);
    CHECK(rep.min_det == doctest::Approx(1));
    auto same = blend_levels(id, id, 0.3);
    CHECK(same.image == id.image);

    // two affine maps agreeing on the boundary is too strong; use boundary-fixed interior bumps
    auto bump = [](double a) {
        return [a](Point2 p) { return Point2{p.x + a * p.x * (1 - p.x) * p.y * (1 - p.y), p.y}; };
    };
    auto b1 = sample_slice(bump(0.5), 8), b2 = sample_slice(bump(-0.5), 8);
    CHECK(blend_check(b1, b2).ok);
    auto mid = blend_levels(b1, b2, 0.5);
    for (std::size_t i = 0; i < mid.image.size(); ++i) CHECK(dist(mid.image[i], id.image[i]) < 1e-15);

    // affine maps with positive determinants along the segment
    auto a1 = sample_slice([](Point2 p) { return Point2{2 * p.x + 0.3 * p.y, p.y}; }, 4);
    auto a2 = sample_slice([](Point2 p) { return Point2{p.x, 0.5 * p.x + 3 * p.y}; }, 4);
    CHECK(blend_check(a1, a2).ok);

    // reflection pair folds somewhere in between
    auto refl = sample_slice([](Point2 p) { return Point2{1 - p.x, p.y}; }, 8);
    auto bad = blend_check(id, refl);
    CHECK_FALSE(bad.ok);
    CHECK(bad.facet >= 0);
    CHECK(bad.min_det == doctest::Approx(-1));
    CHECK_THROWS_AS(blend_levels(id, refl, 0.2), geometry_error);

    CHECK(rescale_interval(0.25, 0.25, 0.5) == doctest::Approx(0.375));
    CHECK(rescale_interval(0.5, 0.25, 0.5) == doctest::Approx(0.5));

    // slices that twist further as t decreases: only close partners blend
    auto twist = [](double t) {
        return sample_slice(
            [t](Point2 p) {
                double a = 6 * (1 - t) * p.x * (1 - p.x) * p.y * (1 - p.y) * 16;
                Point2 c{0.5, 0.5}, d = p - c;
                return c + Point2{std::cos(a) * d.x - std::sin(a) * d.y, std::sin(a) * d.x + std::cos(a) * d.y};
            },
            8);
    };
    double star = select_tk_star(twist, 1.0);
    CHECK(star < 1);
    CHECK(blend_check(twist(1.0), twist(star)).ok);
}

}  // TEST_SUITE
