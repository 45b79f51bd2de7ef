#pragma once

#include <array>
#include <vector>

#include "json.hpp"
#include "sobext/boundary_maps.hpp"
#include "sobext/plgeom.hpp"

namespace sobext {

struct DyadicSquare {
    int level = 1;
    int index = 0;  // iy * 2^level + ix
    Point2 lower_left;
    double side = 0.5;
    std::array<Point2, 4> corners() const { return square_quad(lower_left, side); }
};

std::vector<DyadicSquare> standard_decomposition(int k);

// admissible window for a vertex offset component at level k
double shift_window_lo(int k);
double shift_window_hi(int k);

// Level-k quadrilateral grid obtained by moving each dyadic lattice vertex.
struct GoodGrid {
    int level = 1;
    int n = 2;  // 2^level quads per row
    std::vector<Point2> vertices;  // (n+1)^2, row-major from the lower-left

    int vid(int ix, int iy) const { return iy * (n + 1) + ix; }
    Point2 vertex(int ix, int iy) const { return vertices[static_cast<std::size_t>(vid(ix, iy))]; }
    Point2 lattice(int ix, int iy) const;
    int quad_count() const { return n * n; }
    // counterclockwise from the lower-left corner
    std::array<int, 4> quad_ids(int j) const;
    std::array<Point2, 4> quad(int j) const;
    double side() const { return std::ldexp(1.0, -level); }

    nlohmann::json to_json() const;
    static GoodGrid from_json(const nlohmann::json& j);
};

GoodGrid shift_grid(int k, const std::vector<Point2>& offsets);
GoodGrid uniform_shift_grid(int k, double offset);

struct GridSelection {
    GoodGrid grid;
    double offset = 0;
    double constant = 0;                 // achieved max ratio
    std::vector<double> candidate_max;  // max ratio per candidate offset
};

struct KeyQuadrature {
    int boundary_samples = 64;  // per side
    int area_samples = 64;      // per direction on the doubled quadrilateral
};

// ratio h * boundary integral of |Dphi|^p over integral on the doubled quad
double key_ratio(const BoundaryMap& phi, const std::array<Point2, 4>& quad, double h, double p,
                 const KeyQuadrature& quad_rule = {});

GridSelection select_good_grid(const BoundaryMap& phi, int k, double p, int candidates,
                               const KeyQuadrature& quad_rule = {});

struct ParentChildren {
    std::array<Point2, 4> parent;
    std::array<std::array<Point2, 4>, 4> children;
    std::vector<Point2> outer;  // boundary ring of the union of the children
    std::vector<Point2> crossings;
    double min_vertex_distance = 0;
};

ParentChildren parent_children(const GoodGrid& coarse, const GoodGrid& fine, int j);

struct CubeBoundaryGrid {
    int level = 1;
    bool on_sphere = false;
    std::vector<Point3> vertices;
    std::vector<std::array<int, 4>> quads;  // outward counterclockwise
    std::vector<int> face_of_quad;

    nlohmann::json to_json() const;
};

CubeBoundaryGrid cube_boundary_grid(int k, bool to_sphere = false);

}  // namespace sobext
