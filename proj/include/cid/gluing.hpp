#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cid/field.hpp"
#include "cid/perturbation.hpp"
#include "cid/timeseries.hpp"
#include "json.hpp"

namespace cid {

// Rule T/m = lambda_q^{-12}, theta = (T/m)^{1/eta}, with optional desk overrides
struct Subdivision {
    double m_rule = 0, theta_rule = 0;  // rule values (m may be astronomically large)
    int m = 0;
    double theta = 0;
    bool overridden = false;
    std::vector<double> breakpoints(double T) const;
    nlohmann::json to_json() const;
};
Subdivision subdivide(double lambda_q, double eta, double eta_star, double T, double theta_q,
                      std::optional<int> m_override = std::nullopt, std::optional<double> theta_override = std::nullopt);

// chi_0 = 1 - r((t - t_1)/theta), chi_i = r((t - t_i)/theta) - r((t - t_{i+1})/theta),
// chi_{m-1} = r((t - t_{m-1})/theta), r the smooth step; the sum telescopes to 1
class PartitionOfUnity {
public:
    PartitionOfUnity(double T, int m, double theta);
    int m() const { return m_; }
    double theta() const { return theta_; }
    double T() const { return T_; }
    double breakpoint(int i) const { return i * T_ / m_; }
    // deriv in {0, 1}
    double chi(int i, double t, int deriv = 0) const;
    // index i with t in [t_i, t_{i+1}]
    int interval(double t) const;
    // max |sum chi_i - 1| on a uniform grid of `samples` points
    double sum_deviation(int samples) const;
    // max_t |d^M chi_i| theta^M for M = 1..3 (the fitted constants of the derivative bound)
    std::vector<double> derivative_constants() const;

private:
    double T_, theta_;
    int m_;
};

// Integrating-factor RK4: the dissipation exactly, the 2/3-dealiased Leray-projected advection explicitly.
struct LocalSolution {
    double t0 = 0, dt_save = 0;
    std::vector<Field> v;                  // saved at t0 + j dt_save
    std::vector<double> energy;            // ||v||^2
    std::vector<double> dissipation;       // 2 nu int_t0^t ||v||^2_{H^alpha}, exponentially fitted quadrature
    double h3_growth = 1;                  // max_t ||v||_{H^3} / ||v0||_{H^3}
    double time(int j) const { return t0 + j * dt_save; }
};

// advection term P_H div(v (x) v), dealiased
Field advection(const Field& v);
LocalSolution local_solve(const Field& v0, double t0, double t1, const ModelParams& mp, double dt, int save_every = 1,
                          double blowup_factor = 10);

// (u_q, R_q) on a uniform time grid, bad set I_q and its length scale
struct IterationState {
    TimeSeries u, R;
    std::vector<Interval> bad;
    double theta = 0;
    int q = 0;
};

struct GlueResult {
    IterationState state;  // (u~_q, R~_q, I_{q+1}, theta_{q+1}, q + 1)
    std::vector<int> bad_indices;  // the index set C
    double support_violation = 0;  // max relative |R~| where dist(t, I_{q+1}^c) <= 3 theta/2
    bool support_ok = false;
    bool nested = false;           // I_{q+1} inside I_q
    bool well_prepared = false;    // R~ = 0 where dist(t, I_{q+1}^c) <= theta_{q+1}
    double pou_deviation = 0;
    double divergence = 0, mean = 0;   // max relative over the samples
    double agreement = 0;          // max relative |u~ - u_q| where both local solves see no stress
    int agreement_samples = 0;
    std::vector<double> chi_constants;
    nlohmann::json to_json() const;
};

// local solves with steps_per_sample steps between saved samples; breakpoints and theta must sit on the sample grid
GlueResult glue(const IterationState& s, const PartitionOfUnity& pou, const ModelParams& mp, int steps_per_sample,
                double zero_tol = 1e-14);

// v: a discrete solution from random data; u = v + beta(t) Z with beta supported where dist(t, I^c) > theta,
// R = R P_H(beta' Z + beta nu (-Lap)^alpha Z + adv(u) - adv(v)), which vanishes exactly off that support
IterationState synthetic_state(int n, int samples, double T, const ModelParams& mp, const std::vector<Interval>& bad,
                               double theta, double amplitude, unsigned long seed, int steps_per_sample);

// R_q for a velocity series without one: R(d_t u + nu (-Lap)^alpha u) + u (x)o u, d_t u by 4th-order FD
TimeSeries stress_series(const TimeSeries& u, const ModelParams& mp);

// sup_t ||w||_{L^rho} / int ||grad-power R||_{L^rho} for w = u_q - v over one span
struct StabilityRow {
    double amplitude = 0, rho = 0;
    double w_sup = 0, grad_stress = 0, ratio = 0;     // ||w|| vs int |||grad| R||
    double Rw_sup = 0, stress = 0, ratio_R = 0;       // ||R w|| vs int ||R||
    nlohmann::json to_json() const;
};
struct StabilityReport {
    std::vector<StabilityRow> rows;
    double spread = 0, spread_R = 0;  // max |ratio / mean - 1| per rho, worst over rho
    bool pass = false;
    nlohmann::json to_json() const;
};
StabilityReport verify_stability(int n, const ModelParams& mp, const std::vector<double>& amplitudes,
                                 const std::vector<double>& rhos, double span, double dt, unsigned long seed,
                                 double tolerance = 0.2);

// ||v(t)||^2 + 2 nu int ||v||^2_{H^alpha} <= ||v0||^2 on random small data
struct EnergyReport {
    int runs = 0, failures = 0;
    double worst_excess = 0;  // max (lhs - ||v0||^2)/||v0||^2
    bool pass = false;
    nlohmann::json to_json() const;
};
EnergyReport energy_inequality(int n, const ModelParams& mp, int runs, double span, double dt, unsigned long seed,
                               double tolerance = 1e-9);

struct CoverLevel {
    double theta = 0;
    std::vector<Interval> bad;
};
// per level: count N(theta), N theta^{eta_*}, N <= theta^{-eta}; bound = max log N / log(1/theta)
nlohmann::json cover_report(const std::vector<CoverLevel>& levels, double eta, double eta_star);

// distance from t to the complement of a union of closed intervals (0 outside)
double dist_to_complement(double t, const std::vector<Interval>& set);
std::vector<Interval> merge_intervals(std::vector<Interval> v);

}  // namespace cid
