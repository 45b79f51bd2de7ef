#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sobext/boundary_maps.hpp"
#include "sobext/dyadic_grid.hpp"
#include "sobext/geodesic.hpp"
#include "sobext/plgeom.hpp"

namespace sobext {

// kinds of marked points on a grid edge
enum class MarkKind { vertex, finer, coarser };

// image of one domain edge, cut at its marks; pieces[i] runs from mark i to mark i+1
struct ImagePiece {
    std::vector<double> u;  // edge fractions, first and last are the marks
    std::vector<Point2> pts;
};

struct ImageEdge {
    Point2 a, b;  // domain endpoints
    std::vector<double> marks;
    std::vector<MarkKind> kinds;
    std::vector<Point2> mark_images;
    std::vector<ImagePiece> pieces;
    std::vector<ImagePiece> raw;  // samples before the vertex step (empty before it)
    double measured_length = 0;   // inscribed length of the raw samples
};

// edges are indexed horizontal first: iy*n + ix, then vertical: n(n+1) + iy*(n+1) + ix
struct ImageGrid {
    MapPtr phi;
    GoodGrid grid;
    std::vector<ImageEdge> edges;

    int horizontal_id(int ix, int iy) const { return iy * grid.n + ix; }
    int vertical_id(int ix, int iy) const { return grid.n * (grid.n + 1) + iy * (grid.n + 1) + ix; }
};

// samples phi along every edge of `grid`, marking the crossings with the
// perpendicular lines of the neighbouring levels; chords deviate at most `tolerance`
ImageGrid image_grid(MapPtr phi, const GoodGrid& grid, const GoodGrid* coarser, const GoodGrid* finer,
                     double tolerance, int initial_samples = 8);

struct MarkRadii {
    double vertex = 0;   // grid vertex images
    double finer = 0;    // crossings with the next level
    double coarser = 0;  // crossings with the previous level
};

// inside B(M, r) around each mark M the curve germs become spokes [M, exit point];
// throws geometry_error when the balls B(M, 2r) of one level overlap
ImageGrid linearize_vertices(const ImageGrid& grid, const MarkRadii& radii);

// shortest path from the first to the last vertex inside the union of the segments
PolyLine untangle_polyline(const PolyLine& pl);

struct PLEdge {
    PolyLine line;
    std::vector<double> marks;
    std::vector<MarkKind> kinds;
    std::vector<int> mark_at;  // vertex index in `line` of every mark
    double measured_length = 0;  // inscribed length over every phi sample used
};

struct PLGrid {
    int level = 0;
    GoodGrid grid;
    std::vector<PLEdge> edges;
    MarkRadii radii;
    double tolerance = 0;
    int attempts = 0;

    int n() const { return grid.n; }
    int horizontal_id(int ix, int iy) const { return iy * grid.n + ix; }
    int vertical_id(int ix, int iy) const { return grid.n * (grid.n + 1) + iy * (grid.n + 1) + ix; }

    // Gamma_{k,j} counterclockwise from the image of the lower-left vertex
    std::vector<Point2> ring(int j) const;
    // marks of cell j as (ring index, theta on the standard square)
    std::vector<std::pair<int, double>> cell_marks(int j) const;
    SquareBoundaryMap param(int j) const;
    double cell_length(int j) const;

    nlohmann::json to_json() const;
};

// untangles every piece and drops straight-through sample points
PLGrid linearize_sides(const ImageGrid& grid, double delta);

struct ParamReport {
    SquareBoundaryMap map;
    int pieces = 0;
    double max_speed = 0;  // |Dp| on the standard square of side h
    double constant = 0;   // max_speed / (length * 2^k)
};

// constant speed between consecutive marks
ParamReport parametrize(const std::vector<Point2>& ring, const std::vector<std::pair<int, double>>& marks,
                        int level);

struct GridViolation {
    std::string type;  // "self", "same-level", "cross-level", "distance", "length", "simple"
    int level = 0, edge_a = -1, edge_b = -1;
    Point2 location;
    nlohmann::json to_json() const;
};

// properties within one level: simple cells, contacts only at shared vertex images,
// distance to the image set at most 2^-k, length at most the measured one
std::vector<GridViolation> verify_level(const PLGrid& g, const ImageGrid* raw = nullptr);

// contacts between consecutive levels happen only at their shared marks;
// returns the number of such contacts and throws geometry_error on any other
int preserve_cross_level(const PLGrid& coarse, const PLGrid& fine);

struct LinearizerOptions {
    int initial_samples = 8;
    int max_attempts = 8;
    double radius_scale = 1.0 / 8;     // r_k <= radius_scale * 2^-k
    double tolerance_scale = 1.0 / 16;  // chord deviation <= tolerance_scale * 2^-k
};

// PL grids for levels 1..levels, radii and tolerances halved globally until every
// level and every consecutive pair verifies
std::vector<PLGrid> build_pl_grids(MapPtr phi, const std::vector<GoodGrid>& grids,
                                   const LinearizerOptions& opt = {});

}  // namespace sobext
