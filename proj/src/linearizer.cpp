#include "sobext/linearizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "sobext/parallel.hpp"

namespace sobext {

namespace {

struct CrossSource {
    const GoodGrid* grid;
    MarkKind kind;
};

// crossings of the axis-aligned edge a-b with the perpendicular edges of `other`
void add_crossings(Point2 a, Point2 b, bool horizontal, const GoodGrid& other, MarkKind kind,
                   std::vector<std::pair<double, Point2>>& out, std::vector<MarkKind>& kinds) {
    int n = other.n;
    for (int i = 0; i <= n; ++i) {
        if (horizontal) {
            Point2 lo = other.vertex(i, 0), hi = other.vertex(i, n);
            double x = lo.x;
            if (!(x > a.x && x < b.x)) continue;
            if (!(a.y > lo.y && a.y < hi.y)) continue;
            out.push_back({(x - a.x) / (b.x - a.x), Point2{x, a.y}});
        } else {
            Point2 lo = other.vertex(0, i), hi = other.vertex(n, i);
            double y = lo.y;
            if (!(y > a.y && y < b.y)) continue;
            if (!(a.x > lo.x && a.x < hi.x)) continue;
            out.push_back({(y - a.y) / (b.y - a.y), Point2{a.x, y}});
        }
        kinds.push_back(kind);
    }
}

void check_axis_aligned(const GoodGrid& g) {
    for (int iy = 0; iy <= g.n; ++iy)
        for (int ix = 0; ix <= g.n; ++ix) {
            if (ix < g.n && g.vertex(ix, iy).y != g.vertex(ix + 1, iy).y)
                throw std::invalid_argument("image_grid: grid lines must be axis aligned (uniform shifts)");
            if (iy < g.n && g.vertex(ix, iy).x != g.vertex(ix, iy + 1).x)
                throw std::invalid_argument("image_grid: grid lines must be axis aligned (uniform shifts)");
        }
}

// adaptive inscribed sampling of phi on [u0, u1] of the edge a-b, endpoints excluded
void refine(const BoundaryMap& phi, Point2 a, Point2 b, double u0, Point2 p0, double u1, Point2 p1, double tol,
            int depth, std::vector<double>& us, std::vector<Point2>& ps) {
    double um = 0.5 * (u0 + u1);
    Point2 pm = phi(lerp(a, b, um));
    if (depth > 0 && point_segment_distance(pm, p0, p1) > tol) {
        refine(phi, a, b, u0, p0, um, pm, tol, depth - 1, us, ps);
        us.push_back(um);
        ps.push_back(pm);
        refine(phi, a, b, um, pm, u1, p1, tol, depth - 1, us, ps);
    }
}

ImagePiece sample_piece(const BoundaryMap& phi, Point2 a, Point2 b, double u0, Point2 p0, double u1, Point2 p1,
                        double tol, int initial) {
    ImagePiece pc;
    pc.u.push_back(u0);
    pc.pts.push_back(p0);
    double prev_u = u0;
    Point2 prev_p = p0;
    for (int i = 1; i <= initial; ++i) {
        double u = i == initial ? u1 : u0 + (u1 - u0) * i / initial;
        Point2 p = i == initial ? p1 : phi(lerp(a, b, u));
        refine(phi, a, b, prev_u, prev_p, u, p, tol, 14, pc.u, pc.pts);
        pc.u.push_back(u);
        pc.pts.push_back(p);
        prev_u = u;
        prev_p = p;
    }
    return pc;
}

double closest_pair(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2 p, Point2 q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double best = INFINITY;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size() && pts[j].x - pts[i].x < best; ++j)
            best = std::min(best, dist(pts[i], pts[j]));
    return best;
}

// u in (lo, hi) with |phi - c| = r, lo inside, hi outside
std::pair<double, Point2> ball_crossing(const BoundaryMap& phi, Point2 a, Point2 b, double lo, double hi,
                                        Point2 hi_pt, Point2 c, double r) {
    for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
        double m = 0.5 * (lo + hi);
        Point2 pm = phi(lerp(a, b, m));
        if (dist(pm, c) < r)
            lo = m;
        else {
            hi = m;
            hi_pt = pm;
        }
    }
    return {hi, hi_pt};
}

struct Seg {
    Point2 p, q;
    int owner;  // edge id (or level-tagged id)
    int index;  // segment index within the owner
};

// every pair of segments whose boxes share a hash cell, each pair once
template <class F>
void for_candidate_pairs(const std::vector<Seg>& segs, F&& f) {
    if (segs.empty()) return;
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    for (auto& s : segs) {
        x0 = std::min({x0, s.p.x, s.q.x});
        x1 = std::max({x1, s.p.x, s.q.x});
        y0 = std::min({y0, s.p.y, s.q.y});
        y1 = std::max({y1, s.p.y, s.q.y});
    }
    int g = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(segs.size()))), 1, 2048);
    double w = std::max(x1 - x0, y1 - y0) * (1 + 1e-9) + 1e-300;
    double cs = w / g;
    auto cell = [&](double v, double o) { return std::clamp(static_cast<int>((v - o) / cs), 0, g - 1); };
    std::vector<std::array<int, 4>> range(segs.size());
    std::vector<std::vector<int>> bins(static_cast<std::size_t>(g) * g);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        auto& s = segs[i];
        std::array<int, 4> r{cell(std::min(s.p.x, s.q.x), x0), cell(std::max(s.p.x, s.q.x), x0),
                             cell(std::min(s.p.y, s.q.y), y0), cell(std::max(s.p.y, s.q.y), y0)};
        range[i] = r;
        for (int cy = r[2]; cy <= r[3]; ++cy)
            for (int cx = r[0]; cx <= r[1]; ++cx) bins[static_cast<std::size_t>(cy) * g + cx].push_back(static_cast<int>(i));
    }
    for (int cy = 0; cy < g; ++cy)
        for (int cx = 0; cx < g; ++cx) {
            auto& b = bins[static_cast<std::size_t>(cy) * g + cx];
            for (std::size_t i = 0; i < b.size(); ++i)
                for (std::size_t j = i + 1; j < b.size(); ++j) {
                    auto& ra = range[b[i]];
                    auto& rb = range[b[j]];
                    // report only in the first common cell
                    int fx = std::max(ra[0], rb[0]), fy = std::max(ra[2], rb[2]);
                    if (fx > std::min(ra[1], rb[1]) || fy > std::min(ra[3], rb[3])) continue;
                    if (fx != cx || fy != cy) continue;
                    f(segs[b[i]], segs[b[j]]);
                }
        }
}

std::vector<Seg> edge_segments(const PLGrid& g, int tag_offset = 0) {
    std::vector<Seg> segs;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto& l = g.edges[e].line;
        for (std::size_t i = 0; i + 1 < l.size(); ++i)
            segs.push_back({l[i], l[i + 1], static_cast<int>(e) + tag_offset, static_cast<int>(i)});
    }
    return segs;
}

}  // namespace

ImageGrid image_grid(MapPtr phi, const GoodGrid& grid, const GoodGrid* coarser, const GoodGrid* finer,
                     double tolerance, int initial_samples) {
    if (!phi) throw std::invalid_argument("image_grid: no map");
    if (!(tolerance > 0)) throw std::invalid_argument("image_grid: tolerance must be positive");
    check_axis_aligned(grid);
    if (coarser) check_axis_aligned(*coarser);
    if (finer) check_axis_aligned(*finer);
    ImageGrid out;
    out.phi = phi;
    out.grid = grid;
    int n = grid.n;
    std::size_t count = static_cast<std::size_t>(2 * n * (n + 1));
    out.edges.resize(count);
    parallel_for(count, [&](std::size_t id) {
        bool horizontal = static_cast<int>(id) < n * (n + 1);
        int ix, iy;
        Point2 a, b;
        if (horizontal) {
            ix = static_cast<int>(id) % n;
            iy = static_cast<int>(id) / n;
            a = grid.vertex(ix, iy);
            b = grid.vertex(ix + 1, iy);
        } else {
            int r = static_cast<int>(id) - n * (n + 1);
            ix = r % (n + 1);
            iy = r / (n + 1);
            a = grid.vertex(ix, iy);
            b = grid.vertex(ix, iy + 1);
        }
        std::vector<std::pair<double, Point2>> cr;
        std::vector<MarkKind> ck;
        if (finer) add_crossings(a, b, horizontal, *finer, MarkKind::finer, cr, ck);
        if (coarser) add_crossings(a, b, horizontal, *coarser, MarkKind::coarser, cr, ck);
        std::vector<std::size_t> order(cr.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return cr[x].first < cr[y].first; });
        ImageEdge& e = out.edges[id];
        e.a = a;
        e.b = b;
        std::vector<Point2> dom{a};
        e.marks.push_back(0);
        e.kinds.push_back(MarkKind::vertex);
        for (auto i : order) {
            e.marks.push_back(cr[i].first);
            e.kinds.push_back(ck[i]);
            dom.push_back(cr[i].second);
        }
        e.marks.push_back(1);
        e.kinds.push_back(MarkKind::vertex);
        dom.push_back(b);
        for (auto p : dom) e.mark_images.push_back((*phi)(p));
        for (std::size_t m = 0; m + 1 < e.marks.size(); ++m) {
            e.pieces.push_back(sample_piece(*phi, a, b, e.marks[m], e.mark_images[m], e.marks[m + 1],
                                            e.mark_images[m + 1], tolerance, initial_samples));
            e.measured_length += polyline_length(e.pieces.back().pts);
        }
    });
    return out;
}

ImageGrid linearize_vertices(const ImageGrid& grid, const MarkRadii& radii) {
    auto radius = [&](MarkKind k) {
        return k == MarkKind::vertex ? radii.vertex : k == MarkKind::finer ? radii.finer : radii.coarser;
    };
    // balls B(M, 2r) pairwise disjoint
    std::vector<std::pair<Point2, double>> balls;
    for (auto& e : grid.edges)
        for (std::size_t m = 0; m < e.marks.size(); ++m) {
            double r = radius(e.kinds[m]);
            if (!(r > 0)) throw geometry_error("linearize_vertices: radius must be positive");
            balls.push_back({e.mark_images[m], r});
        }
    std::sort(balls.begin(), balls.end(), [](auto& p, auto& q) {
        return p.first.x < q.first.x || (p.first.x == q.first.x && p.first.y < q.first.y);
    });
    double rmax = 0;
    for (auto& b : balls) rmax = std::max(rmax, b.second);
    for (std::size_t i = 0; i < balls.size(); ++i)
        for (std::size_t j = i + 1; j < balls.size() && balls[j].first.x - balls[i].first.x < 4 * rmax; ++j) {
            if (balls[i].first == balls[j].first) continue;
            if (dist(balls[i].first, balls[j].first) < 2 * (balls[i].second + balls[j].second))
                throw geometry_error("linearize_vertices: balls around marked points overlap");
        }

    ImageGrid out = grid;
    const BoundaryMap& phi = *grid.phi;
    std::size_t count = grid.edges.size();
    std::vector<std::string> errors(count);
    parallel_for(count, [&](std::size_t id) {
        const ImageEdge& e = grid.edges[id];
        ImageEdge& o = out.edges[id];
        o.raw = e.raw.empty() ? e.pieces : e.raw;
        for (std::size_t m = 0; m < e.pieces.size(); ++m) {
            const ImagePiece& pc = e.pieces[m];
            Point2 c0 = e.mark_images[m], c1 = e.mark_images[m + 1];
            double r0 = radius(e.kinds[m]), r1 = radius(e.kinds[m + 1]);
            std::size_t last = pc.pts.size() - 1;
            std::size_t j = 0;
            for (std::size_t i = 0; i <= last; ++i)
                if (dist(pc.pts[i], c0) < r0) j = i;
            if (j == last) {
                errors[id] = "piece stays inside the ball of its first mark";
                return;
            }
            auto [ue, pe] = ball_crossing(phi, e.a, e.b, pc.u[j], pc.u[j + 1], pc.pts[j + 1], c0, r0);
            std::size_t i1 = j + 1;
            while (dist(pc.pts[i1], c1) >= r1) ++i1;
            double lo = i1 == j + 1 ? ue : pc.u[i1 - 1];
            Point2 lo_pt = i1 == j + 1 ? pe : pc.pts[i1 - 1];
            // bisection from the inside of the second ball
            double a = pc.u[i1], b = lo;
            Point2 pf = lo_pt;
            for (int it = 0; it < 60 && std::abs(b - a) > 1e-15; ++it) {
                double mid = 0.5 * (a + b);
                Point2 pm = phi(lerp(e.a, e.b, mid));
                if (dist(pm, c1) < r1)
                    a = mid;
                else {
                    b = mid;
                    pf = pm;
                }
            }
            double uf = b;
            ImagePiece np;
            np.u = {pc.u.front(), ue};
            np.pts = {c0, pe};
            for (std::size_t i = j + 1; i < i1; ++i)
                if (pc.u[i] > ue && pc.u[i] < uf) {
                    np.u.push_back(pc.u[i]);
                    np.pts.push_back(pc.pts[i]);
                }
            if (uf > ue) {
                np.u.push_back(uf);
                np.pts.push_back(pf);
            }
            np.u.push_back(pc.u.back());
            np.pts.push_back(c1);
            o.pieces[m] = std::move(np);
        }
    });
    for (auto& s : errors)
        if (!s.empty()) throw geometry_error("linearize_vertices: " + s);
    return out;
}

PolyLine untangle_polyline(const PolyLine& pl) {
    std::size_t m = pl.size();
    if (m < 4) return pl;
    std::size_t ns = m - 1;
    std::vector<std::vector<std::pair<double, Point2>>> cuts(ns);
    bool tangled = false;
    std::vector<std::size_t> order(ns);
    for (std::size_t i = 0; i < ns; ++i) order[i] = i;
    auto minx = [&](std::size_t i) { return std::min(pl[i].x, pl[i + 1].x); };
    auto maxx = [&](std::size_t i) { return std::max(pl[i].x, pl[i + 1].x); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return minx(a) < minx(b); });
    auto param = [&](std::size_t i, Point2 p) {
        Point2 d = pl[i + 1] - pl[i];
        double l2 = dot(d, d);
        return l2 > 0 ? std::clamp(dot(p - pl[i], d) / l2, 0.0, 1.0) : 0.0;
    };
    for (std::size_t a = 0; a < ns; ++a)
        for (std::size_t b = a + 1; b < ns && minx(order[b]) <= maxx(order[a]); ++b) {
            std::size_t i = std::min(order[a], order[b]), j = std::max(order[a], order[b]);
            auto r = segments_intersect(pl[i], pl[i + 1], pl[j], pl[j + 1]);
            if (r.kind == SegRelation::disjoint) continue;
            if (j == i + 1 && r.kind == SegRelation::endpoint_touch && r.point == pl[j]) continue;
            tangled = true;
            if (r.kind == SegRelation::overlap) {
                for (Point2 p : {pl[j], pl[j + 1]})
                    if (on_segment(p, pl[i], pl[i + 1])) cuts[i].push_back({param(i, p), p});
                for (Point2 p : {pl[i], pl[i + 1]})
                    if (on_segment(p, pl[j], pl[j + 1])) cuts[j].push_back({param(j, p), p});
            } else {
                cuts[i].push_back({param(i, r.point), r.point});
                cuts[j].push_back({param(j, r.point), r.point});
            }
        }
    if (!tangled) return pl;
    // arrangement graph
    std::vector<Point2> nodes;
    auto node_of = [&](Point2 p) {
        for (std::size_t k = 0; k < nodes.size(); ++k)
            if (dist(nodes[k], p) <= 1e-15) return static_cast<int>(k);
        nodes.push_back(p);
        return static_cast<int>(nodes.size() - 1);
    };
    std::vector<std::vector<std::pair<int, double>>> adj;
    auto link = [&](int a, int b) {
        if (a == b) return;
        if (static_cast<std::size_t>(std::max(a, b)) >= adj.size()) adj.resize(static_cast<std::size_t>(std::max(a, b)) + 1);
        double w = dist(nodes[a], nodes[b]);
        adj[a].push_back({b, w});
        adj[b].push_back({a, w});
    };
    int start = node_of(pl.front());
    for (std::size_t i = 0; i < ns; ++i) {
        auto c = cuts[i];
        c.push_back({0.0, pl[i]});
        c.push_back({1.0, pl[i + 1]});
        std::sort(c.begin(), c.end(), [](auto& x, auto& y) { return x.first < y.first; });
        int prev = -1;
        for (auto& [t, p] : c) {
            int id = node_of(p);
            if (prev >= 0) link(prev, id);
            prev = id;
        }
    }
    int goal = node_of(pl.back());
    adj.resize(nodes.size());
    std::vector<double> d(nodes.size(), INFINITY);
    std::vector<int> from(nodes.size(), -1);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    d[start] = 0;
    pq.push({0, start});
    while (!pq.empty()) {
        auto [dv, v] = pq.top();
        pq.pop();
        if (dv > d[v]) continue;
        if (v == goal) break;
        for (auto [w, len] : adj[v])
            if (dv + len < d[w]) {
                d[w] = dv + len;
                from[w] = v;
                pq.push({d[w], w});
            }
    }
    if (!std::isfinite(d[goal])) throw geometry_error("untangle_polyline: endpoints not connected");
    PolyLine out;
    for (int v = goal; v >= 0; v = from[v]) out.push_back(nodes[v]);
    std::reverse(out.begin(), out.end());
    return out;
}

PLGrid linearize_sides(const ImageGrid& grid, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("linearize_sides: delta must be positive");
    PLGrid out;
    out.level = grid.grid.level;
    out.grid = grid.grid;
    out.tolerance = delta;
    out.edges.resize(grid.edges.size());
    const BoundaryMap& phi = *grid.phi;
    parallel_for(grid.edges.size(), [&](std::size_t id) {
        const ImageEdge& e = grid.edges[id];
        PolyLine line;
        std::vector<bool> keep;
        double measured = 0;
        for (std::size_t m = 0; m < e.pieces.size(); ++m) {
            const ImagePiece& pc = e.pieces[m];
            std::vector<std::pair<double, Point2>> all;
            for (std::size_t i = 0; i < pc.u.size(); ++i) all.push_back({pc.u[i], pc.pts[i]});
            if (!e.raw.empty())
                for (std::size_t i = 0; i < e.raw[m].u.size(); ++i) all.push_back({e.raw[m].u[i], e.raw[m].pts[i]});
            // inner part between the spokes, refined to the clearance
            PolyLine inner;
            std::vector<double> us;
            std::size_t n = pc.pts.size();
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (!inner.empty()) {
                    std::vector<double> su;
                    std::vector<Point2> sp;
                    refine(phi, e.a, e.b, us.back(), inner.back(), pc.u[i], pc.pts[i], delta, 14, su, sp);
                    for (std::size_t k = 0; k < su.size(); ++k) all.push_back({su[k], sp[k]});
                    inner.insert(inner.end(), sp.begin(), sp.end());
                    us.insert(us.end(), su.begin(), su.end());
                }
                inner.push_back(pc.pts[i]);
                us.push_back(pc.u[i]);
            }
            std::sort(all.begin(), all.end(), [](auto& x, auto& y) { return x.first < y.first; });
            for (std::size_t i = 0; i + 1 < all.size(); ++i) measured += dist(all[i].second, all[i + 1].second);
            inner = untangle_polyline(inner);
            if (m == 0) {
                line.push_back(pc.pts.front());
                keep.push_back(true);
            }
            for (auto p : inner) {
                line.push_back(p);
                keep.push_back(false);
            }
            line.push_back(pc.pts.back());
            keep.push_back(true);
        }
        PLEdge& o = out.edges[id];
        o.line = normalize_collinear(line, false, &keep);
        o.marks = e.marks;
        o.kinds = e.kinds;
        o.measured_length = measured;
        std::size_t pos = 0;
        for (auto mp : e.mark_images) {
            while (pos < o.line.size() && o.line[pos] != mp) ++pos;
            if (pos == o.line.size()) throw geometry_error("linearize_sides: lost a marked point");
            o.mark_at.push_back(static_cast<int>(pos));
        }
    });
    return out;
}

std::vector<Point2> PLGrid::ring(int j) const {
    int nn = grid.n, ix = j % nn, iy = j / nn;
    std::vector<Point2> r;
    auto add = [&](const PolyLine& l, bool fwd) {
        if (fwd)
            r.insert(r.end(), l.begin(), l.end() - 1);
        else
            r.insert(r.end(), l.rbegin(), l.rend() - 1);
    };
    add(edges[horizontal_id(ix, iy)].line, true);
    add(edges[vertical_id(ix + 1, iy)].line, true);
    add(edges[horizontal_id(ix, iy + 1)].line, false);
    add(edges[vertical_id(ix, iy)].line, false);
    return r;
}

std::vector<std::pair<int, double>> PLGrid::cell_marks(int j) const {
    int nn = grid.n, ix = j % nn, iy = j / nn;
    std::vector<std::pair<int, double>> out;
    int offset = 0;
    auto add = [&](const PLEdge& e, int side, bool fwd) {
        int len = static_cast<int>(e.line.size());
        int mm = static_cast<int>(e.marks.size());
        if (fwd) {
            for (int m = 0; m + 1 < mm; ++m) out.push_back({offset + e.mark_at[m], side + e.marks[m]});
        } else {
            for (int m = mm - 1; m >= 1; --m) out.push_back({offset + (len - 1 - e.mark_at[m]), side + (1 - e.marks[m])});
        }
        offset += len - 1;
    };
    add(edges[horizontal_id(ix, iy)], 0, true);
    add(edges[vertical_id(ix + 1, iy)], 1, true);
    add(edges[horizontal_id(ix, iy + 1)], 2, false);
    add(edges[vertical_id(ix, iy)], 3, false);
    return out;
}

SquareBoundaryMap PLGrid::param(int j) const { return SquareBoundaryMap::from_marked(ring(j), cell_marks(j)); }

double PLGrid::cell_length(int j) const {
    auto r = ring(j);
    r.push_back(r.front());
    return polyline_length(r);
}

nlohmann::json PLGrid::to_json() const {
    nlohmann::json es = nlohmann::json::array();
    for (auto& e : edges) {
        nlohmann::json line = nlohmann::json::array(), kinds = nlohmann::json::array();
        for (auto p : e.line) line.push_back({p.x, p.y});
        for (auto k : e.kinds) kinds.push_back(k == MarkKind::vertex ? "vertex" : k == MarkKind::finer ? "finer" : "coarser");
        es.push_back({{"line", line}, {"marks", e.marks}, {"kinds", kinds}, {"mark_at", e.mark_at}});
    }
    nlohmann::json params = nlohmann::json::array();
    for (int j = 0; j < grid.quad_count(); ++j) {
        nlohmann::json br = nlohmann::json::array();
        for (auto& [i, th] : cell_marks(j)) br.push_back({i, th});
        params.push_back(br);
    }
    return {{"level", level},
            {"tolerance", tolerance},
            {"attempts", attempts},
            {"radii", {{"vertex", radii.vertex}, {"finer", radii.finer}, {"coarser", radii.coarser}}},
            {"grid", grid.to_json()},
            {"edges", es},
            {"breakpoints", params}};
}

ParamReport parametrize(const std::vector<Point2>& ring, const std::vector<std::pair<int, double>>& marks,
                        int level) {
    if (ring.size() < 3) throw geometry_error("parametrize: ring too small");
    int n = static_cast<int>(ring.size());
    for (auto& [i, th] : marks)
        if (i < 0 || i >= n) throw geometry_error("parametrize: marked point not on the curve");
    ParamReport r;
    r.map = SquareBoundaryMap::from_marked(ring, marks);
    r.pieces = static_cast<int>(marks.size());
    double h = std::ldexp(1.0, -level);
    double total = 0;
    for (int i = 0; i < n; ++i) total += dist(ring[i], ring[(i + 1) % n]);
    for (std::size_t k = 0; k < marks.size(); ++k) {
        int i0 = marks[k].first, i1 = marks[(k + 1) % marks.size()].first;
        double th0 = marks[k].second, th1 = k + 1 < marks.size() ? marks[k + 1].second : 4.0;
        int cnt = ((i1 - i0) % n + n) % n;
        if (cnt == 0 && marks.size() == 1) cnt = n;
        double len = 0;
        for (int s = 0; s < cnt; ++s) len += dist(ring[(i0 + s) % n], ring[(i0 + s + 1) % n]);
        r.max_speed = std::max(r.max_speed, len / ((th1 - th0) * h));
    }
    r.constant = r.max_speed / (total * std::ldexp(1.0, level));
    return r;
}

nlohmann::json GridViolation::to_json() const {
    return {{"type", type}, {"level", level}, {"edges", {edge_a, edge_b}}, {"location", {location.x, location.y}}};
}

std::vector<GridViolation> verify_level(const PLGrid& g, const ImageGrid* raw) {
    std::vector<GridViolation> out;
    auto segs = edge_segments(g);
    auto is_vertex_end = [&](int e, Point2 x) {
        auto& l = g.edges[e].line;
        return l.front() == x || l.back() == x;
    };
    for_candidate_pairs(segs, [&](const Seg& a, const Seg& b) {
        auto r = segments_intersect(a.p, a.q, b.p, b.q);
        if (r.kind == SegRelation::disjoint) return;
        if (r.kind != SegRelation::overlap) {
            Point2 x = r.point;
            if (a.owner == b.owner) {
                if (std::abs(a.index - b.index) == 1) {
                    Point2 shared = a.index < b.index ? a.q : b.q;
                    if (x == shared) return;
                }
            } else if (is_vertex_end(a.owner, x) && is_vertex_end(b.owner, x) && (a.p == x || a.q == x) &&
                       (b.p == x || b.q == x))
                return;
        }
        out.push_back({a.owner == b.owner ? "self" : "same-level", g.level, a.owner, b.owner,
                       r.kind == SegRelation::overlap ? a.p : r.point});
    });
    double h = std::ldexp(1.0, -g.level);
    int sign = 0;
    for (int j = 0; j < g.grid.quad_count(); ++j) {
        double area = signed_area(g.ring(j));
        int s = area > 0 ? 1 : area < 0 ? -1 : 0;
        if (s == 0 || (sign != 0 && s != sign)) out.push_back({"simple", g.level, j, j, g.ring(j).front()});
        if (sign == 0) sign = s;
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto& ed = g.edges[e];
        if (polyline_length(ed.line) > ed.measured_length * (1 + 1e-12) + 1e-15)
            out.push_back({"length", g.level, static_cast<int>(e), -1, ed.line.front()});
        if (!raw) continue;
        std::vector<Point2> samples;
        for (auto& pc : raw->edges[e].pieces) samples.insert(samples.end(), pc.pts.begin(), pc.pts.end());
        for (auto p : ed.line) {
            double best = INFINITY;
            for (std::size_t i = 0; i + 1 < samples.size(); ++i)
                best = std::min(best, point_segment_distance(p, samples[i], samples[i + 1]));
            if (best > h) {
                out.push_back({"distance", g.level, static_cast<int>(e), -1, p});
                break;
            }
        }
    }
    return out;
}

int preserve_cross_level(const PLGrid& coarse, const PLGrid& fine) {
    if (fine.level != coarse.level + 1) throw std::invalid_argument("preserve_cross_level: levels must be consecutive");
    int offset = static_cast<int>(coarse.edges.size());
    auto segs = edge_segments(coarse);
    auto fs = edge_segments(fine, offset);
    segs.insert(segs.end(), fs.begin(), fs.end());
    auto shared = [&](const PLGrid& g, int e, MarkKind kind, Point2 x) {
        auto& ed = g.edges[e];
        for (std::size_t m = 0; m < ed.marks.size(); ++m)
            if (ed.kinds[m] == kind && ed.line[ed.mark_at[m]] == x) return true;
        return false;
    };
    std::vector<Point2> contacts;
    std::string err;
    for_candidate_pairs(segs, [&](const Seg& a, const Seg& b) {
        bool ca = a.owner < offset, cb = b.owner < offset;
        if (ca == cb) return;
        const Seg& c = ca ? a : b;
        const Seg& f = ca ? b : a;
        auto r = segments_intersect(c.p, c.q, f.p, f.q);
        if (r.kind == SegRelation::disjoint) return;
        if (r.kind == SegRelation::endpoint_touch) {
            Point2 x = r.point;
            if ((c.p == x || c.q == x) && (f.p == x || f.q == x) && shared(coarse, c.owner, MarkKind::finer, x) &&
                shared(fine, f.owner - offset, MarkKind::coarser, x)) {
                contacts.push_back(x);
                return;
            }
        }
        if (err.empty()) {
            Point2 x = r.kind == SegRelation::overlap ? c.p : r.point;
            err = "preserve_cross_level: levels " + std::to_string(coarse.level) + "/" + std::to_string(fine.level) +
                  " meet off the marked points at (" + std::to_string(x.x) + ", " + std::to_string(x.y) +
                  "), edges " + std::to_string(c.owner) + " and " + std::to_string(f.owner - offset) +
                  ", segments " + std::to_string(c.index) + " and " + std::to_string(f.index);
        }
    });
    if (!err.empty()) throw geometry_error(err);
    std::sort(contacts.begin(), contacts.end(), [](Point2 p, Point2 q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
    contacts.erase(std::unique(contacts.begin(), contacts.end()), contacts.end());
    return static_cast<int>(contacts.size());
}

std::vector<PLGrid> build_pl_grids(MapPtr phi, const std::vector<GoodGrid>& grids, const LinearizerOptions& opt) {
    std::size_t L = grids.size();
    for (std::size_t i = 0; i < L; ++i)
        if (grids[i].level != static_cast<int>(i) + 1)
            throw std::invalid_argument("build_pl_grids: grids must be levels 1..L in order");
    std::string last_error;
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        double shrink = std::ldexp(1.0, -attempt);
        int samples = std::min(opt.initial_samples << std::min(attempt, 4), 256);
        std::vector<ImageGrid> raw(L);
        std::vector<double> r(L);
        for (std::size_t i = 0; i < L; ++i) {
            double h = std::ldexp(1.0, -static_cast<int>(i + 1));
            raw[i] = image_grid(phi, grids[i], i > 0 ? &grids[i - 1] : nullptr, i + 1 < L ? &grids[i + 1] : nullptr,
                                opt.tolerance_scale * h * shrink, samples);
            std::vector<Point2> marks;
            for (auto& e : raw[i].edges) marks.insert(marks.end(), e.mark_images.begin(), e.mark_images.end());
            r[i] = std::min(opt.radius_scale * h, 0.25 * closest_pair(marks)) * shrink;
        }
        std::vector<PLGrid> out(L);
        try {
            for (std::size_t i = 0; i < L; ++i) {
                MarkRadii mr{r[i], i + 1 < L ? std::min(r[i], r[i + 1]) : r[i], i > 0 ? std::min(r[i], r[i - 1]) : r[i]};
                double h = std::ldexp(1.0, -static_cast<int>(i + 1));
                out[i] = linearize_sides(linearize_vertices(raw[i], mr), opt.tolerance_scale * h * shrink);
                out[i].radii = mr;
                out[i].attempts = attempt + 1;
                auto v = verify_level(out[i], &raw[i]);
                if (!v.empty())
                    throw geometry_error("level " + std::to_string(i + 1) + ": " + v.front().type + " violation");
            }
            for (std::size_t i = 0; i + 1 < L; ++i) preserve_cross_level(out[i], out[i + 1]);
            return out;
        } catch (const geometry_error& e) {
            last_error = e.what();
        }
    }
    throw geometry_error("build_pl_grids: no admissible radii after " + std::to_string(opt.max_attempts) +
                         " attempts; last failure: " + last_error);
}

}  // namespace sobext
