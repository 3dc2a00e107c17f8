#pragma once

#include <array>
#include <string>
#include <vector>

#include "cid/field.hpp"
#include "cid/geometry.hpp"

namespace cid {

// b(x) = exp(1/(x^2-1)) on |x| < 1 and its derivatives (exact polynomial recurrence)
double bump(double x, int deriv = 0);

// Smooth bump on [t0, t1] inside [0, T], scaled so that the mean of g^2 over [0, T] is 1.
struct TemporalProfile {
    double T = 1, t0 = 0.25, t1 = 0.75;
    double c = 1;

    double value(double t, int deriv = 0) const;
    // G(u) = int_0^u g^2, u in [0, T]
    double cumulative(double u) const;
};

struct Profiles {
    double T = 1;
    double c_Phi = 1;  // Phi(x) = c_Phi b(|x|) on R^2
    double c_psi = 1;  // psi(x) = c_psi b'(x)
    std::vector<TemporalProfile> g;  // pairwise disjoint supports inside [T/4, 3T/4]

    double Phi(double r) const;
    double phi(double r) const;            // -Lap Phi, radial
    double dPhi(double r) const;           // d/dr Phi
    double dphi(double r) const;           // d/dr phi
    double psi(double x, int deriv = 0) const;
    // int_{R^2} Phi(y) e^{-i kappa.y} dy / (2 pi) = int_0^1 Phi(r) J0(kappa r) r dr
    double Phi_hankel(double kappa) const;
    // int_R psi(v) e^{-i kappa v} dv = i * psi_sine(kappa)
    double psi_sine(double kappa) const;
};

// temporal_count = 1 gives the single profile on [T/4, 3T/4]
Profiles make_profiles(double T, int temporal_count = 1);

enum class Regime { A1, A2 };
const char* to_string(Regime r);

struct BlockParams {
    Regime regime = Regime::A1;
    double lambda = 16, alpha = 1.25, eps = 0.05;
    double r_perp = 0, r_par = 0, mu = 0, tau = 0;
    int sigma = 1;
    int tubes = 1;          // n = max(1, floor(lambda r_perp)), lattice periodicity needs an integer
    double lambda_eff = 0;  // tubes / r_perp

    static BlockParams a1(double lambda, double alpha, double eps);
    static BlockParams a2(double lambda, double alpha, double eps);
};

// g_(tau)(t) = tau^{1/2} g(tau s), h_(tau)(t) = G(min(tau s, T)) - s, with s = sigma t mod T
struct TemporalBlock {
    TemporalProfile prof;
    double tau = 1;
    int sigma = 1;

    double g(double t, int deriv = 0) const;
    double h(double t) const;
    // d^j/dt^j of g_(tau)^2
    double g2(double t, int deriv = 0) const;
    // minimum uniform samples on [0, T] for 64 points per spike
    int required_samples() const;
};

struct TemporalSamples {
    std::vector<double> t, g, h;
};
TemporalSamples temporal_blocks(const TemporalBlock& b, int m);

// Band-limited jets / Mikado flows on an N^3 grid. Every block field is synthesized from the
// Fourier coefficients of the periodized profiles, truncated to |m| <= m_psi and a^2+b^2 <= m_phi^2
// and renormalized on the kept modes.
class BlockSet {
public:
    // band < 0 means half the dealias band, so that quadratic products stay exact
    BlockSet(const GeometrySet& geom, const BlockParams& p, const Profiles& prof, int n, int band = -1);

    int n() const { return n_; }
    int band() const { return band_; }
    int m_psi() const { return m_psi_; }
    int m_phi() const { return m_phi_; }
    std::size_t size() const { return dirs_.size(); }
    const BlockParams& params() const { return p_; }
    double corrector_scale() const { return c_; }
    std::array<double, 3> k1(std::size_t k) const;
    Mat3 mean_ww(std::size_t k) const;

    // dt = number of time derivatives
    Field psi(std::size_t k, double t, int dt = 0) const;
    Field phi(std::size_t k) const;
    Field Phi(std::size_t k) const;
    Field W(std::size_t k, double t, int dt = 0) const;
    Field Wc(std::size_t k, double t, int dt = 0) const;     // potential, curl curl Wc = W + Wtc
    Field Wtc(std::size_t k, double t, int dt = 0) const;    // divergence corrector (zero for Mikado)
    // |xi|_inf of the kept modes
    int max_wavenumber() const;

private:
    struct Dir {
        std::array<int, 3> K1, K, K2;
        std::array<double, 3> alpha;
        std::array<double, 3> k1;
    };
    template <class F>
    Field synth(std::size_t k, int comps, F&& coef) const;

    GeometrySet geom_;
    BlockParams p_;
    int n_, band_;
    int m_psi_ = 0, m_phi_ = 0;
    double c_ = 0;
    std::vector<Dir> dirs_;
    std::vector<int> psi_m_;
    std::vector<cplx> psi_hat_;
    std::vector<std::array<int, 2>> phi_ab_;
    std::vector<double> Phi_hat_, phi_hat_;
};

// smallest N whose default band holds the minimal truncation (m_psi = m_phi = 1)
int required_grid(const GeometrySet& geom, const BlockParams& p);

struct ScalingRow {
    std::string family;
    int N = 0, M = 0;
    double p = 2;
    std::vector<double> lambdas, values;
    double measured = 0, predicted = 0, residual = 0;
    bool skipped = false;
    std::string note;
};

struct ScalingRequest {
    std::string family;  // psi, phi, jet, corrector, mikado, g
    int N = 0, M = 0;
    double p = 2;
};

// slopes measured by resolved quadrature of the scaled profiles on fine 1D/2D grids
std::vector<ScalingRow> verify_block_scaling(const std::vector<ScalingRequest>& req, const std::vector<double>& lambdas,
                                             double alpha_a1, double eps_a1, double alpha_a2, double eps_a2);
std::vector<ScalingRequest> default_scaling_requests();
std::string scaling_csv(const std::vector<ScalingRow>& rows);

}  // namespace cid
