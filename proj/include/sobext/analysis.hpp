#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "sobext/boundary_maps.hpp"
#include "sobext/dyadic_grid.hpp"
#include "sobext/plgeom.hpp"

namespace sobext {

enum class Verdict { converging, diverging, inconclusive };

std::string to_string(Verdict v);

// slope rule: below -0.2 converging, above 0.05 diverging
Verdict verdict_for(double slope);

// least-squares log2 slope of the last ceil(n/2) positive terms
double tail_slope(const std::vector<int>& levels, const std::vector<double>& terms);

struct EnergyReport {
    std::string kind;  // "diam", "length", "gagliardo"
    double q = 0;
    double p = 0;  // 0 when unused
    std::vector<int> levels;
    std::vector<double> terms;
    std::vector<double> cumulative;
    double slope = 0;
    Verdict verdict = Verdict::inconclusive;

    void finish();  // fills cumulative, slope and verdict from terms
    nlohmann::json to_json() const;
    std::string to_csv() const;  // level,term,cumulative,slope (local log2 ratio)
};

// per-square image diameters of the standard squares, levels 1..K
struct DiameterTable {
    std::vector<std::vector<double>> diam;  // diam[k-1][j]
};
DiameterTable diameter_table(const BoundaryMap& phi, int K);
EnergyReport diam_sum(const DiameterTable& table, double q);
EnergyReport diam_sum(const BoundaryMap& phi, double q, int K);

// grids[k-1] is the level-k grid; empty means standard dyadic squares
EnergyReport length_sum(const BoundaryMap& phi, double q, int K, const std::vector<GoodGrid>& grids = {});

// the level-k grid with every vertex on the dyadic lattice
GoodGrid standard_grid(int k);

std::vector<GoodGrid> good_grid_family(const BoundaryMap& phi, double p, int K, int candidates = 4,
                                       const KeyQuadrature& rule = {16, 16});

enum class SeminormMethod { neighbor_pair, monte_carlo, saw_split };

std::string to_string(SeminormMethod m);

struct SeminormEstimate {
    double q = 0;
    double value = 0;
    SeminormMethod method = SeminormMethod::neighbor_pair;
    double error = 0;
    EnergyReport levels;  // per-level pair-ring contributions (empty for saw_split)

    nlohmann::json to_json() const;
};

struct SeminormOptions {
    SeminormMethod method = SeminormMethod::neighbor_pair;
    long long budget = 20'000'000;  // integrand evaluations
    int subdivision = 2;            // 2^r midpoint nodes per side of each pair square
    int max_levels = 12;
    Box region{0, 0, 1, 1};  // restrict both points to this box
    bool transpose = false;   // evaluate the integrand with x and y swapped
    unsigned long long seed = 42;
};

// |phi(x)-phi(y)|^q / |x-y|^(q+1) over the unit square squared
SeminormEstimate gagliardo(const BoundaryMap& phi, double q, const SeminormOptions& opt = {});

// mean of (s(u) - s(u + tau))^2 over a period of the unit saw s
double saw_difference_mean(double tau);
// x2,y2-integrated kernel for a horizontal separation a
double shear_kernel(double a);
// double integral of (s(10^n x) - s(10^n y))^2 shear_kernel(x - y) over [0,1]^2
double saw_energy(int n);
// exact seminorm of the identity on the unit square for q = 2
double identity_seminorm_q2();

struct EquivalenceReport {
    double q = 0;
    EnergyReport diam;
    SeminormEstimate seminorm;
    bool agree = false;

    nlohmann::json to_json() const;
};

EquivalenceReport equivalence_check(const BoundaryMap& phi, double q, int K, const SeminormOptions& opt = {});

struct DecayReport {
    double p = 0, q = 0;
    double predicted = 0;  // -(3 - 2q/p)
    EnergyReport terms;
    std::vector<double> local_slopes;  // log2 ratios, levels 2..K
    bool passes = false;               // tail slope <= predicted + 0.5

    nlohmann::json to_json() const;
};

DecayReport decay_check(const BoundaryMap& phi, double p, double q, int K, int candidates = 4);

struct TetMesh {
    std::vector<Point3> vertices;
    std::vector<std::array<int, 4>> tets;
};

// n^3 cubes of the unit cube, six tetrahedra each
TetMesh cube_tet_mesh(int n);

struct DistortionReport {
    double lhs = 0, rhs = 0;
    double volume = 0, image_volume = 0;
};

// lhs: sum |Dh|^3 vol; rhs: sum over image simplices of |adj Df|^3 / J_f^2 vol
DistortionReport inner_distortion_identity(const TetMesh& mesh, const std::vector<Point3>& images);

}  // namespace sobext
