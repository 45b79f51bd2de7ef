#include "sobext/dyadic_grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sobext {

std::vector<DyadicSquare> standard_decomposition(int k) {
    if (k <= 0) throw std::invalid_argument("standard_decomposition: level must be >= 1");
    int n = 1 << k;
    double h = std::ldexp(1.0, -k);
    std::vector<DyadicSquare> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) out.push_back({k, iy * n + ix, {ix * h, iy * h}, h});
    return out;
}

double shift_window_lo(int k) { return std::ldexp(1.0, -k) * (1.0 / 10 - 1.0 / 40); }
double shift_window_hi(int k) { return std::ldexp(1.0, -k) / 10; }

Point2 GoodGrid::lattice(int ix, int iy) const {
    double h = side();
    return {ix * h, iy * h};
}

std::array<int, 4> GoodGrid::quad_ids(int j) const {
    int ix = j % n, iy = j / n;
    return {vid(ix, iy), vid(ix + 1, iy), vid(ix + 1, iy + 1), vid(ix, iy + 1)};
}

std::array<Point2, 4> GoodGrid::quad(int j) const {
    auto id = quad_ids(j);
    return {vertices[id[0]], vertices[id[1]], vertices[id[2]], vertices[id[3]]};
}

nlohmann::json GoodGrid::to_json() const {
    nlohmann::json v = nlohmann::json::array(), q = nlohmann::json::array();
    for (auto p : vertices) v.push_back({p.x, p.y});
    for (int j = 0; j < quad_count(); ++j) {
        auto id = quad_ids(j);
        q.push_back({id[0], id[1], id[2], id[3]});
    }
    return {{"level", level}, {"vertices", v}, {"quads", q}};
}

GoodGrid GoodGrid::from_json(const nlohmann::json& j) {
    GoodGrid g;
    g.level = j.at("level").get<int>();
    g.n = 1 << g.level;
    for (auto& p : j.at("vertices")) g.vertices.push_back({p[0].get<double>(), p[1].get<double>()});
    if (g.vertices.size() != static_cast<std::size_t>((g.n + 1) * (g.n + 1)))
        throw std::invalid_argument("grid json: vertex count does not match level");
    return g;
}

GoodGrid shift_grid(int k, const std::vector<Point2>& offsets) {
    if (k <= 0) throw std::invalid_argument("shift_grid: level must be >= 1");
    GoodGrid g;
    g.level = k;
    g.n = 1 << k;
    if (offsets.size() != static_cast<std::size_t>((g.n + 1) * (g.n + 1)))
        throw std::invalid_argument("shift_grid: one offset per lattice vertex expected");
    double lo = shift_window_lo(k), hi = shift_window_hi(k);
    double tol = 1e-15;
    g.vertices.resize(offsets.size());
    for (int iy = 0; iy <= g.n; ++iy)
        for (int ix = 0; ix <= g.n; ++ix) {
            Point2 o = offsets[static_cast<std::size_t>(g.vid(ix, iy))];
            if (o.x < lo - tol || o.x > hi + tol || o.y < lo - tol || o.y > hi + tol)
                throw std::invalid_argument("shift_grid: offset outside the admissible window");
            g.vertices[static_cast<std::size_t>(g.vid(ix, iy))] = g.lattice(ix, iy) + o;
        }
    return g;
}

GoodGrid uniform_shift_grid(int k, double offset) {
    int n = 1 << k;
    return shift_grid(k, std::vector<Point2>(static_cast<std::size_t>((n + 1) * (n + 1)), {offset, offset}));
}

namespace {

double dphi_p(const BoundaryMap& phi, Point2 x, double p) { return std::pow(op_norm(phi.jacobian(x)), p); }

Point2 bilinear(const std::array<Point2, 4>& q, double u, double v) {
    return q[0] * ((1 - u) * (1 - v)) + q[1] * (u * (1 - v)) + q[2] * (u * v) + q[3] * ((1 - u) * v);
}

double bilinear_jac(const std::array<Point2, 4>& q, double u, double v) {
    Point2 du = (q[1] - q[0]) * (1 - v) + (q[2] - q[3]) * v;
    Point2 dv = (q[3] - q[0]) * (1 - u) + (q[2] - q[1]) * u;
    return std::abs(cross(du, dv));
}

}  // namespace

double key_ratio(const BoundaryMap& phi, const std::array<Point2, 4>& quad, double h, double p,
                 const KeyQuadrature& qr) {
    double boundary = 0;
    for (int s = 0; s < 4; ++s) {
        Point2 a = quad[s], b = quad[(s + 1) % 4];
        double len = dist(a, b) / qr.boundary_samples;
        for (int i = 0; i < qr.boundary_samples; ++i)
            boundary += dphi_p(phi, lerp(a, b, (i + 0.5) / qr.boundary_samples), p) * len;
    }
    Point2 c = (quad[0] + quad[1] + quad[2] + quad[3]) / 4.0;
    std::array<Point2, 4> big;
    for (int i = 0; i < 4; ++i) big[i] = c + (quad[i] - c) * 2.0;
    Box dom = phi.domain();
    double area = 0;
    int m = qr.area_samples;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double u = (i + 0.5) / m, v = (j + 0.5) / m;
            Point2 x = bilinear(big, u, v);
            if (!dom.contains(x)) continue;
            area += dphi_p(phi, x, p) * bilinear_jac(big, u, v) / (double(m) * m);
        }
    if (!(area > 0)) throw std::domain_error("key_ratio: gradient sampler vanishes or is undefined on 2Q");
    double r = h * boundary / area;
    if (!std::isfinite(r)) throw std::domain_error("key_ratio: gradient sampler undefined on grid lines");
    return r;
}

GridSelection select_good_grid(const BoundaryMap& phi, int k, double p, int candidates,
                               const KeyQuadrature& qr) {
    if (candidates < 2) throw std::invalid_argument("select_good_grid: need at least 2 candidates");
    double lo = shift_window_lo(k), hi = shift_window_hi(k), h = std::ldexp(1.0, -k);
    GridSelection best;
    best.constant = INFINITY;
    for (int m = 0; m < candidates; ++m) {
        double t = lo + (hi - lo) * m / (candidates - 1);
        GoodGrid g = uniform_shift_grid(k, t);
        double worst = 0;
        for (int j = 0; j < g.quad_count(); ++j) worst = std::max(worst, key_ratio(phi, g.quad(j), h, p, qr));
        best.candidate_max.push_back(worst);
        if (worst < best.constant) {
            best.constant = worst;
            best.offset = t;
            best.grid = std::move(g);
        }
    }
    return best;
}

ParentChildren parent_children(const GoodGrid& coarse, const GoodGrid& fine, int j) {
    if (fine.level != coarse.level + 1) throw std::invalid_argument("parent_children: levels must be consecutive");
    ParentChildren r;
    r.parent = coarse.quad(j);
    int ix = j % coarse.n, iy = j / coarse.n;
    int c = 0;
    for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) r.children[c++] = fine.quad((2 * iy + dy) * fine.n + 2 * ix + dx);
    int x0 = 2 * ix, y0 = 2 * iy;
    r.outer = {fine.vertex(x0, y0),         fine.vertex(x0 + 1, y0),     fine.vertex(x0 + 2, y0),
               fine.vertex(x0 + 2, y0 + 1), fine.vertex(x0 + 2, y0 + 2), fine.vertex(x0 + 1, y0 + 2),
               fine.vertex(x0, y0 + 2),     fine.vertex(x0, y0 + 1)};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 8; ++b) {
            auto s = segments_intersect(r.parent[a], r.parent[(a + 1) % 4], r.outer[b], r.outer[(b + 1) % 8]);
            if (s.kind == SegRelation::overlap)
                throw std::logic_error("parent_children: boundaries overlap along a segment");
            if (s.kind == SegRelation::disjoint) continue;
            bool dup = false;
            for (auto q : r.crossings) dup = dup || dist(q, s.point) <= 1e-12;
            if (!dup) r.crossings.push_back(s.point);
        }
    if (r.crossings.size() != 2)
        throw std::logic_error("parent_children: expected exactly two boundary intersections, found " +
                               std::to_string(r.crossings.size()));
    r.min_vertex_distance = INFINITY;
    std::vector<Point2> verts(r.parent.begin(), r.parent.end());
    verts.insert(verts.end(), r.outer.begin(), r.outer.end());
    verts.push_back(fine.vertex(x0 + 1, y0 + 1));
    for (auto s : r.crossings)
        for (auto v : verts) r.min_vertex_distance = std::min(r.min_vertex_distance, dist(s, v));
    return r;
}

nlohmann::json CubeBoundaryGrid::to_json() const {
    nlohmann::json v = nlohmann::json::array(), q = nlohmann::json::array();
    for (auto p : vertices) v.push_back({p.x, p.y, p.z});
    for (auto& f : quads) q.push_back({f[0], f[1], f[2], f[3]});
    return {{"level", level}, {"sphere", on_sphere}, {"vertices", v}, {"quads", q}};
}

CubeBoundaryGrid cube_boundary_grid(int k, bool to_sphere) {
    if (k <= 0) throw std::invalid_argument("cube_boundary_grid: level must be >= 1");
    int n = 1 << k;
    double h = std::ldexp(1.0, -k);
    CubeBoundaryGrid g;
    g.level = k;
    g.on_sphere = to_sphere;
    std::map<std::array<int, 3>, int> index;
    auto vid = [&](std::array<int, 3> c) {
        auto it = index.find(c);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(g.vertices.size());
        index[c] = id;
        Point3 p{c[0] * h, c[1] * h, c[2] * h};
        if (to_sphere) {
            double dx = p.x - 0.5, dy = p.y - 0.5, dz = p.z - 0.5;
            double r = std::sqrt(dx * dx + dy * dy + dz * dz);
            p = {dx / r, dy / r, dz / r};
        }
        g.vertices.push_back(p);
        return id;
    };
    int face = 0;
    for (int axis = 0; axis < 3; ++axis)
        for (int side = 0; side < 2; ++side, ++face) {
            int b = (axis + 1) % 3, c = (axis + 2) % 3;
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    std::array<std::array<int, 3>, 4> cs;
                    int du[4] = {0, 1, 1, 0}, dv[4] = {0, 0, 1, 1};
                    for (int m = 0; m < 4; ++m) {
                        cs[m][axis] = side * n;
                        cs[m][b] = i + du[m];
                        cs[m][c] = j + dv[m];
                    }
                    // (b, c, axis) is a right-handed frame; reverse on the low side
                    if (side == 0) std::swap(cs[1], cs[3]);
                    g.quads.push_back({vid(cs[0]), vid(cs[1]), vid(cs[2]), vid(cs[3])});
                    g.face_of_quad.push_back(face);
                }
        }
    return g;
}

}  // namespace sobext
