#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace cid {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;
using IVec3 = std::array<int, 3>;

// Frame (k, k1, k2) stored as integer numerators over the common denominator N_Lambda.
struct Direction {
    IVec3 k{}, k1{}, k2{};
    Vec3 shift{0, 0, 0};

    Vec3 unit_k(int den) const;
    Vec3 unit_k1(int den) const;
    Vec3 unit_k2(int den) const;
};

struct GeometrySet {
    std::vector<Direction> directions;
    int n_lambda = 1;
    double eps_u_probe = 0;   // largest radius passing the random probe
    double eps_u = 0;         // probe / 2, the radius actually used
    double m_star = 0;
    std::vector<double> gamma2_id;                 // golden weights at S = Id
    std::vector<std::array<double, 6>> pinv_rows;  // weight_k(S) = row_k . svec(S)
    bool surrogate = false;

    std::size_t size() const { return directions.size(); }
    // k1 (x) k1 for direction i
    Mat3 k1k1(std::size_t i) const;
};

// svec(S) = (S11, S22, S33, S12, S13, S23)
std::array<double, 6> svec(const Mat3& s);

// bundled 1-2-2/3 family plus coordinate axes, N_Lambda = 3; checks span and positivity
GeometrySet build_lambda(unsigned long seed = 12345);
// axis frames only (N_Lambda = 1); spans diagonal matrices only, for scaling studies
GeometrySet build_surrogate();

// squared weights gamma_(k)^2(S); throws out-of-domain outside the eps_u ball or on a negative weight
std::vector<double> gamma2(const Mat3& s, const GeometrySet& g, bool check_ball = true);
std::vector<double> gamma_decompose(const Mat3& s, const GeometrySet& g);
double reconstruction_residual(const Mat3& s, const std::vector<double>& gam, const GeometrySet& g);

// bisection over random Frobenius-sphere samples, `samples` per radius
double estimate_epsilon_u(const GeometrySet& g, unsigned long seed, int samples = 10000);
// true if every sample at radius r keeps all weights positive
bool probe_radius(const GeometrySet& g, double r, unsigned long seed, int samples = 10000);
double estimate_m_star(const GeometrySet& g, unsigned long seed);

struct ShiftReport {
    double min_clearance = 0;  // min axis distance minus the two tube radii
    double overlap = 0;        // pairwise envelope overlap measure, 0 when disjoint
    int attempts = 0;
};

// tube count n = max(1, floor(lambda r_perp)) per period cell
int tube_count(double lambda, double r_perp);
// greedy seeded placement of shifts so that the tubes of distinct directions are disjoint
ShiftReport choose_shifts(GeometrySet& g, double r_perp, double lambda, unsigned long seed = 7);
// min over pairs of (axis distance - 2 rho); negative means overlap
double tube_clearance(const GeometrySet& g, double r_perp, double lambda);

nlohmann::json to_json(const GeometrySet& g);

}  // namespace cid
