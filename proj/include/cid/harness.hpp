#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cid/blocks.hpp"
#include "cid/gluing.hpp"
#include "cid/perturbation.hpp"
#include "cid/regime.hpp"
#include "json.hpp"

namespace cid {

// Centralized tolerances.
struct Tolerances {
    double spectral = 1e-8;         // relative, spatial identities
    double temporal_fd = 1e-4;      // relative, identities through time differences
    double cancellation = 1e-6;
    double inverse_divergence = 1e-6;
    double block_slope = 0.15;
    double lemma_slope = 0.2;
};
inline constexpr Tolerances kTol{};

struct SlopeReport {
    std::vector<double> x, y;
    std::vector<double> ratio;      // y / (predicted bound at x), when a bound is defined
    bool fitted = false;            // false when some y sits at round-off (the slope is then undefined)
    double measured = 0, predicted = 0, residual = 0, r2 = 0, stderr_ = 0;
    double tolerance = 0;
    bool pass = false;              // fitted and |measured - predicted| <= tolerance
    bool one_sided = false;         // y decays at least as fast as predicted (slope <= predicted + tol, or y at round-off)
    std::string provenance;
    std::string note;
    nlohmann::json to_json() const;
    std::string csv() const;
};

// fits when every y exceeds floor, otherwise reports the slope as undefined
SlopeReport make_slope_report(std::vector<double> x, std::vector<double> y, double predicted, double tolerance,
                              const std::string& provenance, double floor = 0);

using ScalarFn = std::function<double(const std::array<double, 3>&)>;

// normalized L^p norms on T^d (d in {1, 3}, unused coordinates held at 0) by the periodic trapezoid rule
// on n points per axis
double torus_lp(const ScalarFn& f, int d, double p, int n);
// | ||f g(sigma .)||_p - ||f||_p ||g||_p |, with n = per_period * sigma nodes per axis
double decorrelation_lhs(const ScalarFn& f, const ScalarFn& g, int d, double p, int sigma, int per_period);
// sigma integers, >= 3 dyadic values; ratio = lhs / (sigma^{-1/p} ||f||_{C^1} ||g||_p)
SlopeReport decorrelation_test(const ScalarFn& f, const ScalarFn& g, int d, const std::vector<double>& sigmas, double p,
                               int per_period);

// || |grad|^{-1} P_{!=0}(a P_{>=kappa} f) ||_p with a sampled on the grid of f
double stationary_phase_lhs(const ScalarFn& a, const Field& f, double kappa, double p);
// f(kappa) builds the input for each kappa; kappa dyadic, >= 3 values; no energy at |xi| >= kappa is degenerate input
SlopeReport stationary_phase_test(const ScalarFn& a, const std::function<Field(double)>& f,
                                  const std::vector<double>& kappas, double p);
// cos(m x1) (1 + cos(x2)/2) with m = round(3 kappa / 2) on the smallest grid resolving a f for a of band 1
Field packet(double kappa);
double sup_hessian(const ScalarFn& a, int n);

// presets bundling the two endpoint families
struct Preset {
    std::string name;
    Exponents e;
};
Preset preset(const std::string& name);  // "A1", "A2", "fail"

struct BlockIdentityReport {
    std::vector<IdentityCheck> checks;
    double h_sup = 0;
    bool pass = false;
    nlohmann::json to_json() const;
};
// jets (A1) or Mikado flows (A2) at lambda on an N^3 grid, plus the temporal identity on m samples
BlockIdentityReport block_identities(Regime r, double lambda, double alpha, double eps, int n, int m,
                                     unsigned long seed);

struct IterateOptions {
    Regime regime = Regime::A1;
    double lambda = 16, alpha = 1.25, eps = 0.032, nu = 1;
    unsigned long seed = 7;
    int grid = 0;        // working grid; 0 tries 64, 96, 128 until the products are resolved
    bool norms = false;  // space-time Reynolds norms (slow)
    int per_panel = 2, spike_panels = 4;
};
struct IterateReport {
    std::vector<IdentityCheck> checks;
    nlohmann::json json;
    bool pass = false;
};
// one perturbation step on (u, R); R absent means R is rebuilt from u
IterateReport iterate_once(const TimeSeries& u, const std::optional<TimeSeries>& R, const IterateOptions& opt);

// the bad set I_q = theta_q-neighbourhood of supp R (merged), clipped to [0, T]
std::vector<Interval> bad_set_from_stress(const TimeSeries& R, double theta_q);

struct PipelineConfig {
    std::string preset = "A1";
    double lambda = 16;
    int block_grid = 96;
    int state_samples = 257;
    bool norms = false;
    unsigned long seed = 7;
    std::string report_dir;  // empty: no per-stage files
};
struct PipelineResult {
    nlohmann::ordered_json report;
    int exit_code = 0;
};
PipelineResult run_pipeline(const PipelineConfig& c);

}  // namespace cid
