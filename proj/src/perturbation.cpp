#include "cid/perturbation.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cid/nsr.hpp"

namespace cid {

double smooth_step(double x) {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    double a = std::exp(-1 / x), b = std::exp(-1 / (1 - x));
    return a / (a + b);
}

double chi_cutoff(double z) {
    if (z < 0) throw Error(ErrorKind::InvalidParameter, "chi is defined on [0, inf)");
    if (z <= 1) return 1;
    if (z >= 2) return z;
    double s = smooth_step(z - 1);
    return (1 - s) + s * z;
}

// ---------------------------------------------------------------------------------------------

TimeCutoff::TimeCutoff(std::vector<Interval> supp, double theta) : theta_(theta) {
    if (!(theta > 0)) throw Error(ErrorKind::InvalidParameter, "cutoff needs theta > 0");
    if (supp.empty()) throw Error(ErrorKind::InvalidParameter, "cutoff needs a non-empty stress support");
    std::sort(supp.begin(), supp.end());
    // gaps below theta would put the distance kink inside the ramp
    for (const auto& iv : supp) {
        if (iv[1] < iv[0]) throw Error(ErrorKind::InvalidParameter, "reversed support interval");
        if (!support_.empty() && iv[0] - support_.back()[1] < theta)
            support_.back()[1] = std::max(support_.back()[1], iv[1]);
        else
            support_.push_back(iv);
    }
}

double TimeCutoff::operator()(double t) const {
    if (support_.empty()) return 1;
    double d = 1e300;
    for (const auto& iv : support_) d = std::min(d, t < iv[0] ? iv[0] - t : (t > iv[1] ? t - iv[1] : 0.0));
    return 1 - smooth_step((d - theta_ / 8) / (theta_ / 4));
}

std::vector<Interval> TimeCutoff::support() const {
    std::vector<Interval> r;
    for (const auto& iv : support_) r.push_back({iv[0] - 3 * theta_ / 8, iv[1] + 3 * theta_ / 8});
    return r;
}

// ---------------------------------------------------------------------------------------------


SyntheticBackground::SyntheticBackground(int n, double amplitude, const ModelParams& mp, unsigned long seed, int band,
                                         std::optional<Interval> window)
    : n_(n), band_(band), amp_(amplitude), mp_(mp), window_(window) {
    if (band < 1 || 2 * band >= n / 2) throw Error(ErrorKind::InvalidParameter, "background band must satisfy 1 <= 2 band < N/2");
    if (window && !(window->at(0) < window->at(1)))
        throw Error(ErrorKind::InvalidParameter, "background window must be a non-empty interval");
    std::mt19937_64 rng(seed);
    U1_ = random_solenoidal(n, band, rng);
    U2_ = random_solenoidal(n, band, rng);
}

double SyntheticBackground::envelope(double t, int deriv) const {
    if (!window_) return deriv == 0 ? 1.0 : 0.0;
    double a = (*window_)[0], b = (*window_)[1];
    double x = (2 * t - a - b) / (b - a);
    return bump(x, deriv) * std::pow(2 / (b - a), deriv) / bump(0);
}

Field SyntheticBackground::u(double t) const {
    double w = 2 * M_PI, e = amp_ * envelope(t, 0);
    Field r = (e * std::cos(w * t)) * U1_;
    r.axpy(e * std::sin(w * t), U2_);
    return r;
}

Field SyntheticBackground::u_t(double t) const {
    double w = 2 * M_PI, e = amp_ * envelope(t, 0), de = amp_ * envelope(t, 1);
    Field r = (de * std::cos(w * t) - e * w * std::sin(w * t)) * U1_;
    r.axpy(de * std::sin(w * t) + e * w * std::cos(w * t), U2_);
    return r;
}

Field SyntheticBackground::stress(double t) const { return initial_stress(u(t), u_t(t), mp_); }

std::vector<Interval> SyntheticBackground::stress_support() const {
    if (!window_) return {};
    return {*window_};
}

SeriesBackground::SeriesBackground(TimeSeries u, TimeSeries R, int grid)
    : u_(std::move(u)), R_(std::move(R)), grid_(grid) {
    if (u_.m() < 5 || R_.m() != u_.m())
        throw Error(ErrorKind::InvalidParameter, "series background needs >= 5 matching samples of u and R");
    if (u_.samples[0].comps() != 3 || R_.samples[0].comps() != 9)
        throw Error(ErrorKind::InvalidParameter, "series background needs a vector u and a tensor R");
    for (const auto& s : u_.samples) band_ = std::max(band_, effective_band(s));
}

int SeriesBackground::n() const { return grid_ > 0 ? grid_ : u_.samples.at(0).n(); }

std::vector<Interval> SeriesBackground::stress_support() const {
    std::vector<Interval> r;
    const int m = R_.m();
    bool all = true;
    for (int j = 0; j < m; ++j) {
        if (coef_norm(R_.samples[j]) == 0) { all = false; continue; }
        // the quartic interpolant spreads a sample over two neighbours on each side
        Interval iv{R_.time(std::max(0, j - 2)), R_.time(std::min(m - 1, j + 2))};
        if (!r.empty() && iv[0] <= r.back()[1]) r.back()[1] = iv[1];
        else r.push_back(iv);
    }
    if (all) return {};
    return r;
}

int effective_band(const Field& f, double tol) {
    const int n = f.n();
    std::vector<double> shell(n / 2 + 2, 0.0);
    for (int c = 0; c < f.comps(); ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < f.nz(); ++k) {
                    int b = std::max({std::abs(f.wave(i)), std::abs(f.wave(j)), k});
                    shell[b] += std::norm(f.at(c, i, j, k));
                }
    double total = 0;
    for (double s : shell) total += s;
    if (total == 0) return 0;
    double tail = 0;
    for (int b = static_cast<int>(shell.size()) - 1; b >= 0; --b) {
        tail += shell[b];
        if (tail > tol * tol * total) return b;
    }
    return 0;
}

nlohmann::json BandPlan::to_json() const {
    return {{"amplitude", amp}, {"amplitude_squared", amp2}, {"velocity", velocity},
            {"block", block},   {"highest_product", highest}, {"limit", limit}};
}

// ---------------------------------------------------------------------------------------------

namespace {

using Phys = std::vector<double>;

std::size_t npts(int n) { return static_cast<std::size_t>(n) * n * n; }

Field proj(const Field& v) { return freq_project(leray_project(v), FreqMode::NonZero); }

// sum_j M_ij v_j for a constant matrix M
Field apply_matrix(const Mat3& M, const Field& v) {
    Field r(v.n(), 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (M[3 * i + j] != 0) {
                Field c = r.component(i);
                c.axpy(M[3 * i + j], v.component(j));
                r.set_component(i, c);
            }
    return r;
}

Field grad(const Field& s) { return differentiate(s, DiffOp::Grad); }
Field curl(const Field& v) { return differentiate(v, DiffOp::Curl); }

template <class T>
T fd_combine(const T& m2, const T& m1, const T& p1, const T& p2, double h) {
    T r = p2;
    r *= -1.0 / (12 * h);
    r = r + (8.0 / (12 * h)) * p1;
    r = r + (-8.0 / (12 * h)) * m1;
    r = r + (1.0 / (12 * h)) * m2;
    return r;
}

double fd_combine(double m2, double m1, double p1, double p2, double h) {
    return (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h);
}

}  // namespace

template <class F>
auto Perturbation::time_derivative(F&& fn, double t, double h) const {
    return fd_combine(fn(t - 2 * h), fn(t - h), fn(t + h), fn(t + 2 * h), h);
}

Perturbation::Perturbation(const GeometrySet& geom, const Background& bg, const PerturbationParams& p)
    : geom_(geom), bg_(bg), p_(p), n_(bg.n()) {
    if (!(p.delta > 0 && p.lambda_q > 1 && p.eps_r > 0 && p.theta > 0 && p.fd_amp > 0))
        throw Error(ErrorKind::InvalidParameter, "perturbation scalars must be positive (lambda_q > 1)");
    bp_ = p.regime == Regime::A1 ? BlockParams::a1(p.lambda, p.alpha, p.eps) : BlockParams::a2(p.lambda, p.alpha, p.eps);
    try {
        shifts_ = choose_shifts(geom_, bp_.r_perp, bp_.lambda, p.seed);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoAdmissibleShifts) throw;
        for (auto& d : geom_.directions) d.shift = {0, 0, 0};
        shifts_ = ShiftReport{};
        shifts_.attempts = -1;  // spatial placement failed; disjointness rests on the temporal blocks
    }
    prof_ = make_profiles(bg.t_final(), static_cast<int>(geom_.size()));
    for (const auto& g : prof_.g) tb_.push_back(TemporalBlock{g, bp_.tau, bp_.sigma});
    auto supp = bg.stress_support();
    if (!supp.empty()) cutoff_ = TimeCutoff(supp, p.theta);

    // band plan: amplitudes are smooth, not band-limited; their effective band sets the block band
    plan_.limit = n_ / 2 - 1;
    plan_.velocity = bg.band();
    const double T = bg.t_final();
    for (double t : {0.0, 0.25 * T, 0.5 * T, 0.75 * T}) {
        Amplitudes A = amplitudes(t);
        for (std::size_t k = 0; k < A.a.size(); ++k) {
            plan_.amp = std::max(plan_.amp, effective_band(A.a[k]));
            plan_.amp2 = std::max(plan_.amp2, effective_band(A.a2[k]));
        }
    }
    const bool a1 = p.regime == Regime::A1;
    auto highest = [&](int B) {
        int w = std::max(plan_.amp + B, a1 ? plan_.amp2 + 2 * B : plan_.amp2);
        return 2 * std::max(plan_.velocity, w);
    };
    int B = p.block_band;
    if (B < 0) {
        B = 0;
        while (highest(B + 1) <= plan_.limit) ++B;
    }
    blocks_ = std::make_unique<BlockSet>(geom_, bp_, prof_, n_, B);
    plan_.block = blocks_->max_wavenumber();
    plan_.highest = highest(plan_.block);
    if (plan_.highest > plan_.limit) {
        std::ostringstream os;
        os << "products reach band " << plan_.highest << " > N/2 - 1 = " << plan_.limit << " (amplitude band "
           << plan_.amp << ", block band " << plan_.block << ")";
        throw Error(ErrorKind::ResolutionError, os.str());
    }
    for (std::size_t k = 0; k < geom_.size(); ++k) {
        mean_ww_.push_back(blocks_->mean_ww(k));
        phi_.push_back(blocks_->phi(k));
    }
}

double Perturbation::rho_floor() const {
    return 2 / geom_.eps_u * std::pow(p_.lambda_q, -p_.eps_r / 4) * p_.delta;
}

Field Perturbation::build_rho(const Field& R) const {
    if (R.comps() != 9) throw Error(ErrorKind::InvalidParameter, "rho needs a tensor stress");
    const double c = std::pow(p_.lambda_q, -p_.eps_r / 4) * p_.delta;
    auto r = to_physical(R);
    const std::size_t np = npts(R.n());
    Phys rho(np);
    for (std::size_t q = 0; q < np; ++q) {
        double m2 = 0;
        for (int a = 0; a < 9; ++a) m2 += r[a * np + q] * r[a * np + q];
        rho[q] = 2 / geom_.eps_u * c * chi_cutoff(std::sqrt(m2) / c);
    }
    return from_physical(rho, R.n(), 1);
}

Perturbation::Amplitudes Perturbation::amplitudes(double t) const {
    Amplitudes A;
    A.t = t;
    A.f = cutoff_(t);
    A.R = bg_.stress(t);
    if (A.R.n() != n_) throw Error(ErrorKind::InvalidParameter, "stress grid differs from the background grid");
    A.rho = build_rho(A.R);
    const std::size_t np = npts(n_), K = geom_.size();
    auto r = to_physical(A.R);
    auto rho = to_physical(A.rho);
    std::vector<Phys> a(K, Phys(np)), a2(K, Phys(np));
    const double h = 2 * M_PI / n_;
    for (std::size_t q = 0; q < np; ++q) {
        Mat3 S;
        double dev = 0;
        for (int i = 0; i < 9; ++i) {
            double x = r[i * np + q] / rho[q];
            dev += x * x;
            S[i] = (i % 4 == 0 ? 1.0 : 0.0) - x;
        }
        auto sv = svec(S);
        bool ok = std::sqrt(dev) <= geom_.eps_u * (1 + 1e-12);
        for (std::size_t k = 0; k < K && ok; ++k) {
            double w = 0;
            for (int j = 0; j < 6; ++j) w += geom_.pinv_rows[k][j] * sv[j];
            if (!(w > 0)) ok = false;
            a2[k][q] = rho[q] * A.f * A.f * w;
            a[k][q] = std::sqrt(std::max(w, 0.0) * rho[q]) * A.f;
        }
        if (!ok) {
            std::size_t i = q / (n_ * n_), j = (q / n_) % n_, kk = q % n_;
            std::ostringstream os;
            os << "geometric-domain violation at t = " << t << ", x = (" << i * h << ", " << j * h << ", " << kk * h
               << "): |R/rho| = " << std::sqrt(dev) << " vs eps_u = " << geom_.eps_u;
            throw Error(ErrorKind::OutOfDomain, os.str());
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        A.a.push_back(from_physical(a[k], n_, 1));
        A.a2.push_back(from_physical(a2[k], n_, 1));
    }
    return A;
}

Perturbation::Amplitudes Perturbation::amplitudes_dt(double t) const {
    const double h = p_.fd_amp;
    Amplitudes m2 = amplitudes(t - 2 * h), m1 = amplitudes(t - h), p1 = amplitudes(t + h), p2 = amplitudes(t + 2 * h);
    Amplitudes d;
    d.t = t;
    d.f = fd_combine(m2.f, m1.f, p1.f, p2.f, h);
    d.R = fd_combine(m2.R, m1.R, p1.R, p2.R, h);
    d.rho = fd_combine(m2.rho, m1.rho, p1.rho, p2.rho, h);
    for (std::size_t k = 0; k < m2.a.size(); ++k) {
        d.a.push_back(fd_combine(m2.a[k], m1.a[k], p1.a[k], p2.a[k], h));
        d.a2.push_back(fd_combine(m2.a2[k], m1.a2[k], p1.a2[k], p2.a2[k], h));
    }
    return d;
}

std::vector<std::size_t> Perturbation::active(double t) const {
    std::vector<std::size_t> r;
    for (std::size_t k = 0; k < tb_.size(); ++k)
        if (tb_[k].g(t) != 0.0) r.push_back(k);
    return r;
}

Field Perturbation::Pieces::total() const {
    Field w = wp + wc;
    w += wo;
    if (wt.n() > 0) w += wt;
    return w;
}

Field Perturbation::oscillation_corrector(const Amplitudes& A, double t) const {
    Field acc(n_, 3);
    for (std::size_t k = 0; k < tb_.size(); ++k) {
        double hk = tb_[k].h(t);
        if (hk == 0) continue;
        acc.axpy(hk, apply_matrix(mean_ww_[k], grad(A.a2[k])));
    }
    Field wo = proj(acc);
    wo *= -1.0 / bp_.sigma;
    return wo;
}

Perturbation::Pieces Perturbation::assemble_with(const Amplitudes& A, double t) const {
    const std::size_t np = npts(n_);
    Pieces P;
    P.t = t;
    const bool a1 = p_.regime == Regime::A1;
    Phys wp(3 * np, 0.0), X(3 * np, 0.0), Y(3 * np, 0.0), WT(3 * np, 0.0);
    for (std::size_t k : active(t)) {
        const double g = tb_[k].g(t);
        auto a = to_physical(A.a[k]);
        auto ga = to_physical(grad(A.a[k]));
        Field Wcf = blocks_->Wc(k, t);
        auto W = to_physical(blocks_->W(k, t));
        auto Wc = to_physical(Wcf);
        auto cWc = to_physical(curl(Wcf));
        Phys Wt = a1 ? to_physical(blocks_->Wtc(k, t)) : Phys(3 * np, 0.0);
        for (std::size_t q = 0; q < np; ++q) {
            const double x0 = ga[q], x1 = ga[np + q], x2 = ga[2 * np + q];
            // grad a x W^c and grad a x curl W^c
            const double c0 = x1 * Wc[2 * np + q] - x2 * Wc[np + q];
            const double c1 = x2 * Wc[q] - x0 * Wc[2 * np + q];
            const double c2 = x0 * Wc[np + q] - x1 * Wc[q];
            const double d0 = x1 * cWc[2 * np + q] - x2 * cWc[np + q];
            const double d1 = x2 * cWc[q] - x0 * cWc[2 * np + q];
            const double d2 = x0 * cWc[np + q] - x1 * cWc[q];
            X[q] += g * c0;
            X[np + q] += g * c1;
            X[2 * np + q] += g * c2;
            Y[q] += g * (d0 + a[q] * Wt[q]);
            Y[np + q] += g * (d1 + a[q] * Wt[np + q]);
            Y[2 * np + q] += g * (d2 + a[q] * Wt[2 * np + q]);
            for (int c = 0; c < 3; ++c) wp[c * np + q] += g * a[q] * W[c * np + q];
        }
        if (a1) {
            // a^2 g^2 psi^2 phi^2 k1, from the factor fields themselves
            auto psi = to_physical(blocks_->psi(k, t));
            auto phi = to_physical(phi_[k]);
            auto a2 = to_physical(A.a2[k]);
            auto e = blocks_->k1(k);
            for (std::size_t q = 0; q < np; ++q) {
                double s = a2[q] * g * g * psi[q] * psi[q] * phi[q] * phi[q];
                for (int c = 0; c < 3; ++c) WT[c * np + q] += s * e[c];
            }
        }
    }
    P.wp = from_physical(wp, n_, 3);
    P.wc = curl(from_physical(X, n_, 3)) + from_physical(Y, n_, 3);
    if (a1) {
        P.wt = proj(from_physical(WT, n_, 3));
        P.wt *= -1.0 / bp_.mu;
    } else {
        P.wt = Field(n_, 3);
    }
    P.wo = oscillation_corrector(A, t);
    return P;
}

Perturbation::Pieces Perturbation::assemble(double t) const { return assemble_with(amplitudes(t), t); }

double Perturbation::fd_step() const {
    double width = 1e300;
    for (const auto& b : tb_) width = std::min(width, (b.prof.t1 - b.prof.t0) / (b.tau * b.sigma));
    double h = std::min(p_.fd_amp, width / 400);
    if (p_.regime == Regime::A1) {
        double om = 2.0 * blocks_->m_psi() * bp_.tubes * geom_.n_lambda * bp_.mu;
        h = std::min(h, 0.02 / om);
    }
    return h;
}

Field Perturbation::temporal_corrector_at(double t) const {
    Amplitudes A = amplitudes(t);
    return assemble_with(A, t).wt;
}

Field Perturbation::oscillation_corrector_at(double t) const { return oscillation_corrector(amplitudes(t), t); }

Perturbation::Sides Perturbation::cancellation(double t) const {
    if (temporal_overlap() > 0)
        throw Error(ErrorKind::PreconditionViolation, "temporal blocks overlap; the cross terms do not vanish");
    Amplitudes A = amplitudes(t);
    Pieces P = assemble_with(A, t);
    const std::size_t np = npts(n_);
    Field lhs = outer(P.wp, P.wp, true) + A.R;
    auto rho = to_physical(A.rho);
    Phys rhs(9 * np, 0.0);
    for (std::size_t q = 0; q < np; ++q)
        for (int i = 0; i < 3; ++i) rhs[(4 * i) * np + q] = rho[q] * A.f * A.f;
    for (std::size_t k = 0; k < tb_.size(); ++k) {
        const double g = tb_[k].g(t), g2 = g * g;
        const Mat3& M = mean_ww_[k];
        auto a2 = to_physical(A.a2[k]);
        Phys W;
        if (g != 0) W = to_physical(blocks_->W(k, t));
        for (std::size_t q = 0; q < np; ++q)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    double ww = g != 0 ? W[i * np + q] * W[j * np + q] - M[3 * i + j] : 0.0;
                    rhs[(3 * i + j) * np + q] += a2[q] * (g2 * ww + (g2 - 1) * M[3 * i + j]);
                }
    }
    return {lhs, from_physical(rhs, n_, 9)};
}

Perturbation::Sides Perturbation::curl_form(double t) const {
    Amplitudes A = amplitudes(t);
    Pieces P = assemble_with(A, t);
    const std::size_t np = npts(n_);
    Phys V(3 * np, 0.0);
    for (std::size_t k : active(t)) {
        const double g = tb_[k].g(t);
        auto a = to_physical(A.a[k]);
        auto Wc = to_physical(blocks_->Wc(k, t));
        for (std::size_t q = 0; q < np; ++q)
            for (int c = 0; c < 3; ++c) V[c * np + q] += g * a[q] * Wc[c * np + q];
    }
    return {P.wp + P.wc, curl(curl(from_physical(V, n_, 3)))};
}

Perturbation::Sides Perturbation::temporal_corrector_identity(double t) const {
    if (p_.regime != Regime::A1) throw Error(ErrorKind::InvalidParameter, "the temporal corrector exists in A1 only");
    const double h = fd_step();
    Field lhs = time_derivative([&](double s) { return temporal_corrector_at(s); }, t, h);
    Amplitudes A = amplitudes(t), D = amplitudes_dt(t);
    const std::size_t np = npts(n_);
    Phys V1(3 * np, 0.0), V2(3 * np, 0.0);
    for (std::size_t k : active(t)) {
        const auto& b = tb_[k];
        const double g2 = b.g2(t), dg2 = b.g2(t, 1);
        Field W = blocks_->W(k, t);
        lhs.axpy(g2, freq_project(mul(A.a2[k], differentiate(outer(W, W, true), DiffOp::Div), true), FreqMode::NonZero));
        auto psi = to_physical(blocks_->psi(k, t));
        auto dpsi = to_physical(blocks_->psi(k, t, 1));
        auto phi = to_physical(phi_[k]);
        auto a2 = to_physical(A.a2[k]);
        auto da2 = to_physical(D.a2[k]);
        auto e = blocks_->k1(k);
        for (std::size_t q = 0; q < np; ++q) {
            double pp = phi[q] * phi[q];
            double d_ag = da2[q] * g2 + a2[q] * dg2;  // d_t(a^2 g^2)
            double v1 = d_ag * psi[q] * psi[q] * pp + a2[q] * g2 * 2 * psi[q] * dpsi[q] * pp;
            double v2 = d_ag * psi[q] * psi[q] * pp;
            for (int c = 0; c < 3; ++c) {
                V1[c * np + q] += v1 * e[c];
                V2[c * np + q] += v2 * e[c];
            }
        }
    }
    Field v1 = freq_project(from_physical(V1, n_, 3), FreqMode::NonZero);
    Field rhs = v1 - leray_project(v1);  // grad Lap^{-1} div
    rhs.axpy(-1.0, freq_project(from_physical(V2, n_, 3), FreqMode::NonZero));
    rhs *= 1.0 / bp_.mu;
    return {lhs, rhs};
}

Perturbation::Sides Perturbation::oscillation_corrector_identity(double t) const {
    const double h = fd_step();
    Field lhs = time_derivative([&](double s) { return oscillation_corrector_at(s); }, t, h);
    Amplitudes A = amplitudes(t), D = amplitudes_dt(t);
    Field V1(n_, 3), V2(n_, 3);
    const double sigma = bp_.sigma;
    for (std::size_t k = 0; k < tb_.size(); ++k) {
        const auto& b = tb_[k];
        const double g2 = b.g2(t), hk = b.h(t);
        const double dh = sigma * (g2 - 1);  // d_t h = sigma (g^2 - 1)
        Field Mg = apply_matrix(mean_ww_[k], grad(A.a2[k]));
        Field Mdg = apply_matrix(mean_ww_[k], grad(D.a2[k]));
        lhs += (g2 - 1) * freq_project(Mg, FreqMode::NonZero);
        V1.axpy(dh, Mg);
        V1.axpy(hk, Mdg);
        V2.axpy(hk, Mdg);
    }
    Field v1 = freq_project(V1, FreqMode::NonZero);
    Field rhs = v1 - leray_project(v1);
    rhs.axpy(-1.0, freq_project(V2, FreqMode::NonZero));
    rhs *= 1.0 / sigma;
    return {lhs, rhs};
}

Field Perturbation::Reynolds::total() const { return lin + osc + cor; }

Perturbation::Reynolds Perturbation::reynolds(double t) const {
    const bool a1 = p_.regime == Regime::A1;
    Amplitudes A = amplitudes(t), D = amplitudes_dt(t);
    Pieces P = assemble_with(A, t);
    Field w = P.total();
    Field ub = bg_.u(t);
    const std::size_t np = npts(n_);
    Reynolds R;
    R.t = t;

    // linear error
    Phys Vt(3 * np, 0.0);
    Phys OSC(3 * np, 0.0), MU(3 * np, 0.0);
    for (std::size_t k : active(t)) {
        const auto& b = tb_[k];
        const double g = b.g(t), dg = b.g(t, 1), g2 = b.g2(t), dg2 = b.g2(t, 1);
        auto a = to_physical(A.a[k]);
        auto da = to_physical(D.a[k]);
        auto Wc = to_physical(blocks_->Wc(k, t));
        auto dWc = to_physical(blocks_->Wc(k, t, 1));
        auto W = to_physical(blocks_->W(k, t));
        auto ga2 = to_physical(grad(A.a2[k]));
        auto a2 = to_physical(A.a2[k]);
        auto da2 = to_physical(D.a2[k]);
        const Mat3& M = mean_ww_[k];
        auto e = blocks_->k1(k);
        for (std::size_t q = 0; q < np; ++q) {
            for (int c = 0; c < 3; ++c)
                Vt[c * np + q] += (da[q] * g + a[q] * dg) * Wc[c * np + q] + a[q] * g * dWc[c * np + q];
            // g^2 P(W (x) W) grad a^2
            double wg = W[q] * ga2[q] + W[np + q] * ga2[np + q] + W[2 * np + q] * ga2[2 * np + q];
            for (int i = 0; i < 3; ++i) {
                double mg = M[3 * i] * ga2[q] + M[3 * i + 1] * ga2[np + q] + M[3 * i + 2] * ga2[2 * np + q];
                OSC[i * np + q] += g2 * (W[i * np + q] * wg - mg);
            }
            if (a1) {
                double ss = W[q] * W[q] + W[np + q] * W[np + q] + W[2 * np + q] * W[2 * np + q];  // psi^2 phi^2
                double d_ag = da2[q] * g2 + a2[q] * dg2;
                for (int c = 0; c < 3; ++c) MU[c * np + q] += d_ag * ss * e[c];
            }
        }
    }
    R.lin = inverse_divergence(freq_project(curl(curl(from_physical(Vt, n_, 3))), FreqMode::NonZero));
    R.lin += inverse_divergence(fractional_laplacian(w, p_.alpha, p_.nu));
    R.lin += inverse_divergence(projected_div(outer_tf(ub, w, true) + outer_tf(w, ub, true)));

    // oscillation error
    Field osc = proj(from_physical(OSC, n_, 3));
    if (a1) osc.axpy(-1.0 / bp_.mu, proj(from_physical(MU, n_, 3)));
    Field low(n_, 3);
    for (std::size_t k = 0; k < tb_.size(); ++k) {
        double hk = tb_[k].h(t);
        if (hk != 0) low.axpy(hk, apply_matrix(mean_ww_[k], grad(D.a2[k])));
    }
    osc.axpy(-1.0 / bp_.sigma, proj(low));
    R.osc = inverse_divergence(osc);

    // corrector error
    Field rest = P.wc + P.wo;
    if (a1) rest += P.wt;
    R.cor = inverse_divergence(projected_div(outer_tf(P.wp, rest, true) + outer_tf(rest, w, true)));
    return R;
}

Perturbation::Sides Perturbation::reynolds_identity(const Field& R) const {
    return {R, inverse_divergence(projected_div(R))};
}

Perturbation::Sides Perturbation::end_to_end(double t) const {
    const double h = fd_step();
    Field w = total(t);
    Field dw = time_derivative([&](double s) { return total(s); }, t, h);
    Field u = bg_.u(t) + w;
    Field ut = bg_.u_t(t) + dw;
    Field lhs = ut + fractional_laplacian(u, p_.alpha, p_.nu);
    lhs += differentiate(outer(u, u, true), DiffOp::Div);
    lhs = proj(lhs);
    Field rhs = projected_div(reynolds(t).total());
    return {lhs, rhs};
}

double Perturbation::temporal_overlap() const {
    double over = 0;
    for (std::size_t i = 0; i < tb_.size(); ++i)
        for (std::size_t j = i + 1; j < tb_.size(); ++j) {
            double lo = std::max(tb_[i].prof.t0, tb_[j].prof.t0), hi = std::min(tb_[i].prof.t1, tb_[j].prof.t1);
            if (hi > lo) over += hi - lo;
        }
    return over / bg_.t_final();
}

namespace {

template <int Q>
void gauss_nodes(std::vector<double>& x, std::vector<double>& w) {
    using G = boost::math::quadrature::gauss<double, Q>;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    x.clear();
    w.clear();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        if (ab[i] == 0) {
            x.push_back(0);
            w.push_back(wt[i]);
        } else {
            x.push_back(-ab[i]);
            w.push_back(wt[i]);
            x.push_back(ab[i]);
            w.push_back(wt[i]);
        }
    }
}

void reference_nodes(int q, std::vector<double>& x, std::vector<double>& w) {
    switch (q) {
        case 1: x = {0}; w = {2}; break;
        case 2: gauss_nodes<2>(x, w); break;
        case 3: gauss_nodes<3>(x, w); break;
        case 4: gauss_nodes<4>(x, w); break;
        case 5: gauss_nodes<5>(x, w); break;
        case 6: gauss_nodes<6>(x, w); break;
        case 8: gauss_nodes<8>(x, w); break;
        default: throw Error(ErrorKind::InvalidParameter, "per_panel must be one of 1..6 or 8");
    }
}

}  // namespace

std::vector<std::pair<double, double>> Perturbation::time_nodes(int per_panel, int spike_panels) const {
    const double T = bg_.t_final();
    std::vector<double> br{0, T};
    for (const auto& b : tb_)
        for (int j = 0; j < b.sigma; ++j) {
            br.push_back((j * T + b.prof.t0 / b.tau) / b.sigma);
            br.push_back((j * T + b.prof.t1 / b.tau) / b.sigma);
            br.push_back((j * T + T / b.tau) / b.sigma);
        }
    if (!cutoff_.everywhere())
        for (const auto& iv : cutoff_.support()) {
            const double th = cutoff_.theta();
            for (double x : {iv[0], iv[0] + th / 4, iv[1] - th / 4, iv[1]}) br.push_back(x);
        }
    std::vector<double> clean;
    for (double x : br)
        if (x >= 0 && x <= T) clean.push_back(x);
    std::sort(clean.begin(), clean.end());
    clean.erase(std::unique(clean.begin(), clean.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                clean.end());
    // long smooth panels are split so the background variation is resolved; spikes are
    // compactly supported bumps (not analytic), so they get their own sub-panels
    auto in_spike = [&](double m) {
        for (const auto& b : tb_) {
            double s = std::fmod(m * b.sigma, T) * b.tau;
            if (s > b.prof.t0 && s < b.prof.t1) return true;
        }
        return false;
    };
    std::vector<double> fine;
    for (std::size_t i = 0; i + 1 < clean.size(); ++i) {
        double a = clean[i], b = clean[i + 1];
        int parts = std::max(1, static_cast<int>(std::ceil((b - a) / (T / 8))));
        if (in_spike(0.5 * (a + b))) parts = std::max(parts, spike_panels);
        for (int j = 0; j < parts; ++j) fine.push_back(a + (b - a) * j / parts);
    }
    fine.push_back(clean.back());
    std::vector<double> rx, rw;
    reference_nodes(per_panel, rx, rw);
    std::vector<std::pair<double, double>> nodes;
    for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
        double a = fine[i], b = fine[i + 1];
        if (b - a <= 0) continue;
        for (std::size_t j = 0; j < rx.size(); ++j) nodes.push_back({0.5 * (a + b) + 0.5 * (b - a) * rx[j], 0.5 * (b - a) * rw[j]});
    }
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

std::vector<double> Perturbation::check_times(int per_spike) const {
    std::vector<double> r;
    const double T = bg_.t_final();
    for (const auto& b : tb_)
        for (int i = 0; i < per_spike; ++i) {
            double u = b.prof.t0 + (i + 0.5) * (b.prof.t1 - b.prof.t0) / per_spike;
            r.push_back(u / (b.tau * b.sigma));
        }
    const auto& b = tb_.front();
    r.push_back((T / b.tau + T) / (2 * b.sigma));  // between spikes, only w_o and the background are active
    std::sort(r.begin(), r.end());
    return r;
}

// ---------------------------------------------------------------------------------------------

nlohmann::json IdentityCheck::to_json() const {
    return {{"id", id}, {"residual", residual}, {"tolerance", tolerance}, {"pass", pass}};
}

IdentityCheck check_sides(const std::string& id, double tol, const std::vector<Perturbation::Sides>& sides,
                          const std::vector<double>& weights, const std::vector<double>& scale) {
    IdentityCheck c;
    c.id = id;
    c.tolerance = tol;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < sides.size(); ++i) {
        double w = weights.empty() ? 1.0 : weights.at(i);
        double d = parseval_l2(sides[i].first - sides[i].second);
        double s = scale.empty() ? std::max(parseval_l2(sides[i].first), parseval_l2(sides[i].second)) : scale.at(i);
        num += w * d * d;
        den += w * s * s;
    }
    c.residual = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
    c.pass = c.residual <= tol;
    return c;
}

nlohmann::json ReynoldsNorms::to_json() const {
    return {{"lambda", lambda}, {"R_L1", l1}, {"R_lin_L1Lrho", lin_rho}, {"R_osc_L1Lrho", osc_rho},
            {"R_cor_L1Lp1", cor_p1}, {"rho", rho}, {"p1", p1}};
}

ReynoldsNorms reynolds_norms(const Perturbation& P, int per_panel, int spike_panels) {
    const auto& pp = P.params();
    const double e = pp.eps, a = pp.alpha;
    ReynoldsNorms r;
    r.lambda = pp.lambda;
    if (pp.regime == Regime::A1) {
        r.rho = (3 - 8 * e) / (3 - 9 * e);
        r.p1 = 1 / (1 - e / (4 * (3 - 8 * e)));
    } else {
        r.rho = (2 * a - 2 + 16 * e) / (2 * a - 2 + 14 * e);
        r.p1 = r.rho;
    }
    for (const auto& [t, w] : P.time_nodes(per_panel, spike_panels)) {
        auto R = P.reynolds(t);
        r.l1 += w * lp_norm(R.total(), 1);
        r.lin_rho += w * lp_norm(R.lin, r.rho);
        r.osc_rho += w * lp_norm(R.osc, r.rho);
        r.cor_p1 += w * lp_norm(R.cor, r.p1);
    }
    return r;
}

}  // namespace cid
