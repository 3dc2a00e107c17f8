#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cid/blocks.hpp"
#include "cid/geometry.hpp"
#include "cid/ops.hpp"
#include "cid/timeseries.hpp"
#include "json.hpp"

namespace cid {

// C-infinity step: 0 for x <= 0, 1 for x >= 1
double smooth_step(double x);
// 1 on [0,1], z on [2,inf), smooth blend in between (so z/2 <= chi <= 2z there)
double chi_cutoff(double z);

using Interval = std::array<double, 2>;

// f = 1 within theta/8 of the stress support, 0 beyond 3 theta/8, smooth ramp in between.
// Default-constructed: f = 1 everywhere (stress supported on all of [0,T]).
class TimeCutoff {
public:
    TimeCutoff() = default;
    TimeCutoff(std::vector<Interval> stress_support, double theta);

    double operator()(double t) const;
    bool everywhere() const { return support_.empty(); }
    // closed intervals carrying f
    std::vector<Interval> support() const;
    double theta() const { return theta_; }

private:
    std::vector<Interval> support_;  // merged stress support
    double theta_ = 0;
};

// The pair (u~_q, R~_q) handed over by the gluing stage.
class Background {
public:
    virtual ~Background() = default;
    virtual int n() const = 0;
    virtual Field u(double t) const = 0;
    virtual Field u_t(double t) const = 0;
    virtual Field stress(double t) const = 0;
    // intervals carrying the stress; empty means all of [0,T]
    virtual std::vector<Interval> stress_support() const { return {}; }
    virtual double t_final() const { return 1.0; }
    virtual int band() const = 0;  // sup-norm band of u
};

// u = A e(t) (cos(2 pi t) U1 + sin(2 pi t) U2), U1, U2 random solenoidal mean-free fields on |xi_i| <= band,
// e = 1 or a smooth bump on `window`; stress = initial_stress(u, u_t), so the pair is an exact solution.
class SyntheticBackground : public Background {
public:
    SyntheticBackground(int n, double amplitude, const ModelParams& mp, unsigned long seed, int band = 1,
                        std::optional<Interval> window = std::nullopt);
    int n() const override { return n_; }
    Field u(double t) const override;
    Field u_t(double t) const override;
    Field stress(double t) const override;
    std::vector<Interval> stress_support() const override;
    int band() const override { return band_; }
    double amplitude() const { return amp_; }

private:
    double envelope(double t, int deriv) const;
    int n_, band_;
    double amp_;
    ModelParams mp_;
    Field U1_, U2_;
    std::optional<Interval> window_;
};

// Samples of u and R interpolated in time (piecewise quartic)
class SeriesBackground : public Background {
public:
    // grid > 0 evaluates on that grid by spectral resampling of the stored samples
    SeriesBackground(TimeSeries u, TimeSeries R, int grid = 0);
    int n() const override;
    Field u(double t) const override { return on_grid(interp(u_, t)); }
    Field u_t(double t) const override { return on_grid(interp_dt(u_, t)); }
    Field stress(double t) const override { return on_grid(interp(R_, t)); }
    std::vector<Interval> stress_support() const override;
    double t_final() const override { return u_.t_final; }
    int band() const override { return band_; }

private:
    Field on_grid(Field f) const { return grid_ > 0 ? resample(f, grid_) : f; }
    TimeSeries u_, R_;
    int band_ = 0, grid_ = 0;
};

// smallest B with the coefficient mass outside |xi_i| <= B below tol relative (L2)
int effective_band(const Field& f, double tol = 1e-13);

struct PerturbationParams {
    Regime regime = Regime::A1;
    double lambda = 16, alpha = 1.25, eps = 1.0 / 32;
    double nu = 1;
    double lambda_q = 2;  // enters only through lambda_q^{-eps_R/4}
    double delta = 1;     // delta_{q+1}
    double eps_r = 1.0 / 640;
    double theta = 1.0 / 16;  // theta_{q+1}, ramp width of the cutoff f
    int block_band = -1;      // -1: largest band keeping every product alias free
    double fd_amp = 1e-3;     // FD step for rho, f and a in time
    unsigned long seed = 7;
};

struct BandPlan {
    int amp = 0, amp2 = 0, velocity = 0;
    int block = 0;    // max wavenumber of the synthesized blocks
    int highest = 0;  // band of the highest product formed (u (x) u)
    int limit = 0;    // N/2 - 1
    nlohmann::json to_json() const;
};

class Perturbation {
public:
    Perturbation(const GeometrySet& geom, const Background& bg, const PerturbationParams& p);

    struct Amplitudes {
        double t = 0, f = 0;
        Field R, rho;
        std::vector<Field> a, a2;  // a2 from the weight formula directly, a = its square root
    };
    struct Pieces {
        double t = 0;
        Field wp, wc, wt, wo;  // wt vanishes in A2
        Field total() const;
    };
    struct Reynolds {
        double t = 0;
        Field lin, osc, cor;
        Field total() const;
    };
    using Sides = std::pair<Field, Field>;

    const PerturbationParams& params() const { return p_; }
    const BlockParams& block_params() const { return bp_; }
    const BlockSet& blocks() const { return *blocks_; }
    const BandPlan& bands() const { return plan_; }
    const TimeCutoff& cutoff() const { return cutoff_; }
    const std::vector<TemporalBlock>& temporal() const { return tb_; }
    const GeometrySet& geometry() const { return geom_; }
    int n() const { return n_; }
    ShiftReport shifts() const { return shifts_; }

    // 2 eps_u^{-1} lambda_q^{-eps_R/4} delta_{q+1}
    double rho_floor() const;
    Field build_rho(const Field& R) const;
    Amplitudes amplitudes(double t) const;
    // time derivative of every field in amplitudes(t), 4th-order FD with step fd_amp
    Amplitudes amplitudes_dt(double t) const;

    Pieces assemble(double t) const;
    Field total(double t) const { return assemble(t).total(); }

    // w_p (x) w_p + R  versus  rho f^2 Id + sum a^2 g^2 P(W (x) W) + sum a^2 (g^2 - 1) mean(W (x) W)
    Sides cancellation(double t) const;
    // w_p + w_c  versus  curl curl sum a g W^c
    Sides curl_form(double t) const;
    // d_t w_t + sum P(a^2 g^2 div(W (x) W))  versus the gradient and low-frequency remainder (A1 only)
    Sides temporal_corrector_identity(double t) const;
    // d_t w_o + sum P((g^2 - 1) mean(W (x) W) grad a^2)  versus its remainder
    Sides oscillation_corrector_identity(double t) const;

    Reynolds reynolds(double t) const;
    // R  versus  R P_H div R
    Sides reynolds_identity(const Field& R) const;
    // P_H(d_t u + nu (-Lap)^alpha u + div(u (x) u))  versus  P_H div R, with u = u~ + w and d_t w by FD
    Sides end_to_end(double t) const;

    // time derivative of a field-valued map by 4th-order FD with the step resolving the fastest block scale
    double fd_step() const;
    // spike-resolving Gauss-Legendre nodes on [0,T]; per_panel nodes per panel, each spike cut into spike_panels
    std::vector<std::pair<double, double>> time_nodes(int per_panel, int spike_panels = 8) const;
    // times inside the spikes of the temporal blocks (and one between spikes)
    std::vector<double> check_times(int per_spike) const;

    // fraction of [0,T] on which two temporal blocks are both non-zero
    double temporal_overlap() const;

private:
    Pieces assemble_with(const Amplitudes& A, double t) const;
    Field temporal_corrector_at(double t) const;
    Field oscillation_corrector_at(double t) const;
    Field oscillation_corrector(const Amplitudes& A, double t) const;
    // directions whose temporal block is non-zero at t
    std::vector<std::size_t> active(double t) const;
    template <class F>
    auto time_derivative(F&& fn, double t, double h) const;

    GeometrySet geom_;
    const Background& bg_;
    PerturbationParams p_;
    BlockParams bp_;
    Profiles prof_;
    std::vector<TemporalBlock> tb_;
    std::unique_ptr<BlockSet> blocks_;
    std::vector<Mat3> mean_ww_;
    std::vector<Field> phi_;  // steady profile factor per direction
    TimeCutoff cutoff_;
    BandPlan plan_;
    ShiftReport shifts_;
    int n_;
};

// relative L2 distance of the two sides over a set of times
struct IdentityCheck {
    std::string id;
    double residual = 0, tolerance = 0;
    bool pass = false;
    nlohmann::json to_json() const;
};
// residual = sqrt(sum w |lhs - rhs|^2) / sqrt(sum w s^2), with s the larger side norm unless `scale` is given
IdentityCheck check_sides(const std::string& id, double tol, const std::vector<Perturbation::Sides>& sides,
                          const std::vector<double>& weights = {}, const std::vector<double>& scale = {});

struct ReynoldsNorms {
    double lambda = 0;
    double l1 = 0;  // ||R_{q+1}||_{L^1_{t,x}}
    double lin_rho = 0, osc_rho = 0, cor_p1 = 0;
    double rho = 0, p1 = 0;
    nlohmann::json to_json() const;
};
// exponents: A1 rho = (3-8e)/(3-9e), p1 = 1/(1 - e/(4(3-8e))); A2 rho = (2a-2+16e)/(2a-2+14e), p1 = rho
ReynoldsNorms reynolds_norms(const Perturbation& P, int per_panel, int spike_panels = 8);

}  // namespace cid
