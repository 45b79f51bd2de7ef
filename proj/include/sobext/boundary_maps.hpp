#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "sobext/plgeom.hpp"

namespace sobext {

using Mat2 = std::array<std::array<double, 2>, 2>;

struct Box {
    double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
    bool contains(Point2 p, double tol = 0) const {
        return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
    }
};

double op_norm(const Mat2& m);

class BoundaryMap {
public:
    virtual ~BoundaryMap() = default;
    virtual std::string name() const = 0;
    virtual Point2 eval_unchecked(Point2 x) const = 0;
    virtual Mat2 jacobian(Point2 x) const;  // central differences unless overridden
    virtual Box domain() const { return {-0.5, -0.5, 1.5, 1.5}; }
    // x1-values where the map has kinks along horizontal segments in [lo, hi]
    virtual std::vector<double> kinks_x(double, double) const { return {}; }
    virtual nlohmann::json to_json() const = 0;

    Point2 eval(Point2 x) const;
    Point2 operator()(Point2 x) const { return eval(x); }
};

using MapPtr = std::shared_ptr<const BoundaryMap>;

class IdentityMap : public BoundaryMap {
public:
    std::string name() const override { return "identity"; }
    Point2 eval_unchecked(Point2 x) const override { return x; }
    Mat2 jacobian(Point2) const override { return {{{1, 0}, {0, 1}}}; }
    nlohmann::json to_json() const override { return {{"type", "identity"}}; }
};

class AffineMap : public BoundaryMap {
public:
    AffineMap(Mat2 a, Point2 b) : a_(a), b_(b) {}
    std::string name() const override { return "affine"; }
    Point2 eval_unchecked(Point2 x) const override {
        return {a_[0][0] * x.x + a_[0][1] * x.y + b_.x, a_[1][0] * x.x + a_[1][1] * x.y + b_.y};
    }
    Mat2 jacobian(Point2) const override { return a_; }
    nlohmann::json to_json() const override;

private:
    Mat2 a_;
    Point2 b_;
};

// (x1, x2 + sum_j 10^-j saw(10^{n_j} x1))
class SawShear : public BoundaryMap {
public:
    SawShear(int truncation, double q);
    std::string name() const override { return "saw"; }
    Point2 eval_unchecked(Point2 x) const override;
    Mat2 jacobian(Point2 x) const override;
    std::vector<double> kinks_x(double lo, double hi) const override;
    nlohmann::json to_json() const override;

    const std::vector<int>& frequencies() const { return n_; }
    int truncation() const { return static_cast<int>(n_.size()); }
    double shear(double x1) const;

    // greedy minimal increasing sequence for the two growth conditions
    static std::vector<int> frequencies_for(int truncation, double q);

private:
    std::vector<int> n_;
    double q_;
};

// the 1-periodic saw evaluated at x * 10^n without rounding x * 10^n
double saw_scaled(double x, int n);

// x |x|^(alpha-1), centred at the corner (0,0)
class RadialPower : public BoundaryMap {
public:
    explicit RadialPower(double alpha, Point2 centre = {0, 0}) : alpha_(alpha), c_(centre) {}
    std::string name() const override { return "radial"; }
    Point2 eval_unchecked(Point2 x) const override;
    Mat2 jacobian(Point2 x) const override;
    nlohmann::json to_json() const override;
    double alpha() const { return alpha_; }

private:
    double alpha_;
    Point2 c_;
};

// (x + C(x), y) with C the Cantor function removing middle 1/k parts
class CantorShear : public BoundaryMap {
public:
    explicit CantorShear(int k, int depth = 24);
    std::string name() const override { return "cantor"; }
    Point2 eval_unchecked(Point2 x) const override { return {x.x + cantor(x.x), x.y}; }
    nlohmann::json to_json() const override;
    double cantor(double x) const;
    // Hoelder exponent log(1/2)/log(piece ratio)
    double holder_exponent() const;
    int ratio() const { return k_; }

private:
    int k_, depth_;
    double piece_;
};

// triangle-PL interpolation of lattice vertex images on [0,1]^2, translated outward beyond it
class SampledMap : public BoundaryMap {
public:
    SampledMap(int resolution, std::vector<Point2> images);
    std::string name() const override { return "sampled"; }
    Point2 eval_unchecked(Point2 x) const override;
    Mat2 jacobian(Point2 x) const override;
    nlohmann::json to_json() const override;
    int resolution() const { return res_; }
    const std::vector<Point2>& images() const { return img_; }

    static SampledMap from_map(const BoundaryMap& m, int resolution);

private:
    int res_;
    std::vector<Point2> img_;
};

// (x + a sin(pi x) sin(pi y), y)
class SmoothMap : public BoundaryMap {
public:
    explicit SmoothMap(double amplitude = 0.1) : a_(amplitude) {}
    std::string name() const override { return "smooth"; }
    Point2 eval_unchecked(Point2 x) const override;
    Mat2 jacobian(Point2 x) const override;
    nlohmann::json to_json() const override { return {{"type", "smooth"}, {"amplitude", a_}}; }

private:
    double a_;
};

// identity plus a constant displacement
class TranslatedMap : public BoundaryMap {
public:
    TranslatedMap(MapPtr base, Point2 shift) : base_(std::move(base)), shift_(shift) {}
    std::string name() const override { return base_->name() + "+shift"; }
    Point2 eval_unchecked(Point2 x) const override { return base_->eval_unchecked(x) + shift_; }
    Mat2 jacobian(Point2 x) const override { return base_->jacobian(x); }
    Box domain() const override { return base_->domain(); }
    nlohmann::json to_json() const override;

private:
    MapPtr base_;
    Point2 shift_;
};

MapPtr make_map(const nlohmann::json& spec);

// boundary samples of a quadrilateral: `per_side` points per side, corners included
std::vector<Point2> quad_boundary_samples(const std::array<Point2, 4>& q, int per_side);

double image_diameter(const BoundaryMap& m, const std::array<Point2, 4>& quad, int n = 8);
double image_boundary_length(const BoundaryMap& m, const std::array<Point2, 4>& quad, int n = 16,
                             int max_per_side = 1 << 16);

std::array<Point2, 4> square_quad(Point2 lower_left, double side);

}  // namespace sobext
