#include "cid/blocks.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cid/fit.hpp"

namespace cid {

namespace {

using Poly = std::vector<double>;

Poly deriv(const Poly& p) {
    Poly d(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = i * p[i];
    return d;
}
Poly mulp(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}
Poly addp(Poly a, const Poly& b, double s) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
    return a;
}
double evalp(const Poly& p, double x) {
    double r = 0;
    for (std::size_t i = p.size(); i-- > 0;) r = r * x + p[i];
    return r;
}

// b^{(j)} = b P_j / D^{2j}, D = x^2 - 1, P_{j+1} = P_j' D^2 - 4 j x D P_j - 2 x P_j
const std::vector<Poly>& bump_polys() {
    static const std::vector<Poly> polys = [] {
        const Poly D{-1, 0, 1}, D2 = mulp(D, D), X{0, 1}, XD = mulp(X, D);
        std::vector<Poly> ps{Poly{1}};
        for (int j = 0; j < 10; ++j) {
            const Poly& p = ps.back();
            Poly next = mulp(deriv(p), D2);
            next = addp(next, mulp(XD, p), -4.0 * j);
            next = addp(next, mulp(X, p), -2.0);
            ps.push_back(next);
        }
        return ps;
    }();
    return polys;
}

template <class F>
double integrate(F&& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

double radial_lap_factor(double r) {
    double s = r * r - 1;
    return 4 * r * r / std::pow(s, 4) + 8 * r * r / std::pow(s, 3) - 4 / (s * s);
}

}  // namespace

double bump(double x, int d) {
    double s = x * x - 1;
    if (s >= 0) return 0.0;
    double e = 1.0 / s;
    if (e < -600) return 0.0;
    const auto& ps = bump_polys();
    if (d < 0 || d >= static_cast<int>(ps.size())) throw Error(ErrorKind::InvalidParameter, "bump derivative order");
    return std::exp(e) * evalp(ps[d], x) / std::pow(s, 2 * d);
}

double TemporalProfile::value(double t, int d) const {
    double half = 0.5 * (t1 - t0), mid = 0.5 * (t0 + t1);
    return c * bump((t - mid) / half, d) / std::pow(half, d);
}

double TemporalProfile::cumulative(double u) const {
    if (u <= t0) return 0.0;
    if (u >= t1) return T;
    double half = 0.5 * (t1 - t0), mid = 0.5 * (t0 + t1);
    double v = (u - mid) / half;
    return c * c * half * integrate([](double x) { double b = bump(x); return b * b; }, -1.0, v);
}

double Profiles::Phi(double r) const { return c_Phi * bump(r); }
double Profiles::phi(double r) const {
    if (r >= 1) return 0.0;
    return -c_Phi * bump(r) * radial_lap_factor(r);
}
double Profiles::dPhi(double r) const { return c_Phi * bump(r, 1); }
double Profiles::dphi(double r) const {
    if (r >= 1) return 0.0;
    double s = r * r - 1;
    double q = radial_lap_factor(r);
    double dq = 8 * r / std::pow(s, 4) - 32 * r * r * r / std::pow(s, 5) + 32 * r / std::pow(s, 3) -
                48 * r * r * r / std::pow(s, 4);
    return -c_Phi * bump(r) * (dq - 2 * r * q / (s * s));
}
double Profiles::psi(double x, int d) const { return c_psi * bump(x, d + 1); }

double Profiles::Phi_hankel(double kappa) const {
    return integrate([&](double r) { return Phi(r) * std::cyl_bessel_j(0.0, kappa * r) * r; }, 0.0, 1.0);
}

double Profiles::psi_sine(double kappa) const {
    // int b'(v) e^{-i kappa v} dv = i kappa int b(v) e^{-i kappa v} dv
    return 2 * c_psi * kappa * integrate([&](double v) { return bump(v) * std::cos(kappa * v); }, 0.0, 1.0);
}

Profiles make_profiles(double T, int temporal_count) {
    if (!(T > 0)) throw Error(ErrorKind::InvalidParameter, "T must be positive");
    if (temporal_count < 1) throw Error(ErrorKind::InvalidParameter, "temporal_count must be >= 1");
    Profiles p;
    p.T = T;
    double lap2 = integrate([](double r) { double v = bump(r) * radial_lap_factor(r); return v * v * r; }, 0.0, 1.0);
    p.c_Phi = std::sqrt(2 * M_PI / lap2);
    double db2 = integrate([](double x) { double v = bump(x, 1); return v * v; }, -1.0, 1.0);
    p.c_psi = std::sqrt(2 * M_PI / db2);
    double b2 = integrate([](double x) { double v = bump(x); return v * v; }, -1.0, 1.0);
    const double w = 0.5 * T / temporal_count;
    for (int i = 0; i < temporal_count; ++i) {
        TemporalProfile g;
        g.T = T;
        g.t0 = 0.25 * T + i * w;
        g.t1 = g.t0 + w;
        g.c = std::sqrt(T / (0.5 * w * b2));
        p.g.push_back(g);
    }
    return p;
}

const char* to_string(Regime r) { return r == Regime::A1 ? "A1" : "A2"; }

namespace {
void finish_params(BlockParams& p) {
    p.sigma = std::max(1, static_cast<int>(std::lround(std::pow(p.lambda, 2 * p.eps))));
    p.tubes = tube_count(p.lambda, p.r_perp);
    p.lambda_eff = p.tubes / p.r_perp;
}
void check_params(double lambda, double eps) {
    if (!(lambda > 1)) throw Error(ErrorKind::InvalidParameter, "lambda must exceed 1");
    if (!(eps > 0)) throw Error(ErrorKind::InvalidParameter, "eps must be positive");
}
}  // namespace

BlockParams BlockParams::a1(double lambda, double alpha, double eps) {
    check_params(lambda, eps);
    if (4 * eps >= 1) throw Error(ErrorKind::InvalidParameter, "A1 blocks need eps < 1/4");
    BlockParams p;
    p.regime = Regime::A1;
    p.lambda = lambda;
    p.alpha = alpha;
    p.eps = eps;
    p.r_perp = std::pow(lambda, -1 + 2 * eps);
    p.r_par = std::pow(lambda, -1 + 4 * eps);
    p.mu = std::pow(lambda, 2 * alpha - 1 + 2 * eps);
    p.tau = std::pow(lambda, 4 * alpha - 5 + 11 * eps);
    finish_params(p);
    return p;
}

BlockParams BlockParams::a2(double lambda, double alpha, double eps) {
    check_params(lambda, eps);
    BlockParams p;
    p.regime = Regime::A2;
    p.lambda = lambda;
    p.alpha = alpha;
    p.eps = eps;
    p.r_perp = std::pow(lambda, -alpha + 1 - 8 * eps);
    p.tau = std::pow(lambda, 2 * alpha);
    finish_params(p);
    return p;
}

double TemporalBlock::g(double t, int d) const {
    double s = std::fmod(sigma * t, prof.T);
    if (s < 0) s += prof.T;
    double u = tau * s;
    if (u <= prof.t0 || u >= prof.t1) return 0.0;
    return std::pow(sigma * tau, d) * std::sqrt(tau) * prof.value(u, d);
}

double TemporalBlock::h(double t) const {
    double s = std::fmod(sigma * t, prof.T);
    if (s < 0) s += prof.T;
    return prof.cumulative(std::min(tau * s, prof.T)) - s;
}

double TemporalBlock::g2(double t, int d) const {
    double acc = 0, binom = 1;
    for (int i = 0; i <= d; ++i) {
        acc += binom * g(t, i) * g(t, d - i);
        binom = binom * (d - i) / (i + 1);
    }
    return acc;
}

int TemporalBlock::required_samples() const {
    return static_cast<int>(std::ceil(64.0 * prof.T * tau * sigma / (prof.t1 - prof.t0))) + 1;
}

TemporalSamples temporal_blocks(const TemporalBlock& b, int m) {
    if (m < b.required_samples())
        throw Error(ErrorKind::ResolutionError,
                    "temporal grid too coarse; need M >= " + std::to_string(b.required_samples()));
    TemporalSamples s;
    for (int j = 0; j < m; ++j) {
        double t = b.prof.T * j / (m - 1);
        s.t.push_back(t);
        s.g.push_back(b.g(t));
        s.h.push_back(b.h(t));
    }
    return s;
}

// ---------------------------------------------------------------------------------------------
// band-limited synthesis

namespace {

struct Lattice {
    std::array<int, 3> K1, K, K2;
};

int max_wave(const std::vector<Lattice>& dirs, int tubes, int m_psi, int m_phi) {
    int best = 0;
    for (const auto& d : dirs)
        for (int m = -m_psi; m <= m_psi; ++m)
            for (int a = -m_phi; a <= m_phi; ++a)
                for (int b = -m_phi; b <= m_phi; ++b) {
                    if (a * a + b * b > m_phi * m_phi) continue;
                    for (int c = 0; c < 3; ++c)
                        best = std::max(best, std::abs(tubes * (m * d.K1[c] + a * d.K[c] + b * d.K2[c])));
                }
    return best;
}

std::vector<Lattice> lattices(const GeometrySet& g) {
    std::vector<Lattice> out;
    for (const auto& d : g.directions) out.push_back({d.k1, d.k, d.k2});
    return out;
}

int default_band(int n) { return ((n - 1) / 3) / 2; }

}  // namespace

int required_grid(const GeometrySet& geom, const BlockParams& p) {
    int need = max_wave(lattices(geom), p.tubes, p.regime == Regime::A1 ? 1 : 0, 1);
    int n = 4;
    while (default_band(n) < need) n += 2;
    return n;
}

BlockSet::BlockSet(const GeometrySet& geom, const BlockParams& p, const Profiles& prof, int n, int band)
    : geom_(geom), p_(p), n_(n), band_(band < 0 ? default_band(n) : band) {
    if (band_ > (n - 1) / 3) throw Error(ErrorKind::InvalidParameter, "block band exceeds the dealias band");
    auto lat = lattices(geom);
    const bool jet = p.regime == Regime::A1;
    m_psi_ = jet ? 1 : 0;
    m_phi_ = 1;
    if (max_wave(lat, p.tubes, m_psi_, m_phi_) > band_)
        throw Error(ErrorKind::ResolutionError,
                    "grid cannot hold the minimal block band; need N >= " + std::to_string(required_grid(geom, p)));
    for (bool grew = true; grew;) {
        grew = false;
        if (max_wave(lat, p.tubes, m_psi_, m_phi_ + 1) <= band_) { ++m_phi_; grew = true; }
        if (jet && max_wave(lat, p.tubes, m_psi_ + 1, m_phi_) <= band_) { ++m_psi_; grew = true; }
    }
    c_ = 1.0 / std::pow(p.lambda_eff * geom.n_lambda, 2);

    for (std::size_t i = 0; i < geom.size(); ++i) {
        const auto& d = geom.directions[i];
        dirs_.push_back({d.k1, d.k, d.k2, d.shift, d.unit_k1(geom.n_lambda)});
    }

    // psi coefficients on T: (r_par^{1/2} / 2 pi) int psi(v) e^{-i m r_par v} dv
    if (jet) {
        double norm = 0;
        for (int m = -m_psi_; m <= m_psi_; ++m) {
            cplx c = cplx(0, std::sqrt(p.r_par) / (2 * M_PI) * prof.psi_sine(m * p.r_par));
            psi_m_.push_back(m);
            psi_hat_.push_back(c);
            norm += std::norm(c);
        }
        for (auto& c : psi_hat_) c /= std::sqrt(norm);
    } else {
        psi_m_.push_back(0);
        psi_hat_.push_back(1.0);
    }
    // Phi coefficients on T^2: (r_perp / 2 pi) H[Phi](r_perp |(a,b)|); phi = r_perp^2 |(a,b)|^2 Phi
    double norm = 0;
    for (int a = -m_phi_; a <= m_phi_; ++a)
        for (int b = -m_phi_; b <= m_phi_; ++b) {
            if (a * a + b * b > m_phi_ * m_phi_) continue;
            double kap = p.r_perp * std::sqrt(double(a * a + b * b));
            double P = p.r_perp / (2 * M_PI) * prof.Phi_hankel(kap);
            phi_ab_.push_back({a, b});
            Phi_hat_.push_back(P);
            phi_hat_.push_back(p.r_perp * p.r_perp * (a * a + b * b) * P);
            norm += phi_hat_.back() * phi_hat_.back();
        }
    const double s = 1.0 / std::sqrt(norm);
    for (auto& v : Phi_hat_) v *= s;
    for (auto& v : phi_hat_) v *= s;
}

std::array<double, 3> BlockSet::k1(std::size_t k) const { return dirs_.at(k).k1; }

Mat3 BlockSet::mean_ww(std::size_t k) const {
    auto v = k1(k);
    Mat3 m;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) m[3 * a + b] = v[a] * v[b];
    return m;
}

int BlockSet::max_wavenumber() const {
    std::vector<Lattice> lat;
    for (const auto& d : dirs_) lat.push_back({d.K1, d.K, d.K2});
    return max_wave(lat, p_.tubes, m_psi_, m_phi_);
}

// coef(i_psi, i_phi, xi, xi_perp) -> up to 3 complex components; i_phi < 0 selects psi-only modes,
// i_psi < 0 selects phi-only modes
template <class F>
Field BlockSet::synth(std::size_t k, int comps, F&& coef) const {
    const Dir& d = dirs_.at(k);
    Field f(n_, comps);
    const int n = p_.tubes;
    auto put = [&](const std::array<int, 3>& xi, const std::array<cplx, 3>& v) {
        if (xi[2] < 0) return;
        int i = (xi[0] % n_ + n_) % n_, j = (xi[1] % n_ + n_) % n_;
        for (int c = 0; c < comps; ++c) f.at(c, i, j, xi[2]) += v[c];
    };
    for (std::size_t ip = 0; ip < psi_m_.size(); ++ip)
        for (std::size_t ia = 0; ia < phi_ab_.size(); ++ia) {
            int m = psi_m_[ip], a = phi_ab_[ia][0], b = phi_ab_[ia][1];
            std::array<int, 3> xi, xp;
            for (int c = 0; c < 3; ++c) {
                xp[c] = n * (a * d.K[c] + b * d.K2[c]);
                xi[c] = n * m * d.K1[c] + xp[c];
            }
            auto v = coef(ip, ia, xi, xp);
            double ph = 0;
            for (int c = 0; c < 3; ++c) ph += xp[c] * d.alpha[c];
            cplx shift = std::polar(1.0, -ph);
            for (auto& x : v) x *= shift;
            put(xi, v);
        }
    return f;
}

namespace {
cplx ipow(cplx z, int j) {
    cplx r = 1;
    for (int i = 0; i < j; ++i) r *= z;
    return r;
}
}  // namespace

Field BlockSet::psi(std::size_t k, double t, int dt) const {
    const double om = p_.tubes * geom_.n_lambda * p_.mu;
    return synth(k, 1, [&](std::size_t ip, std::size_t ia, auto&, auto&) -> std::array<cplx, 3> {
        if (phi_ab_[ia][0] != 0 || phi_ab_[ia][1] != 0) return {};
        int m = psi_m_[ip];
        return {ipow(cplx(0, m * om), dt) * psi_hat_[ip] * std::polar(1.0, m * om * t), 0, 0};
    });
}

Field BlockSet::phi(std::size_t k) const {
    return synth(k, 1, [&](std::size_t ip, std::size_t ia, auto&, auto&) -> std::array<cplx, 3> {
        if (psi_m_[ip] != 0) return {};
        return {phi_hat_[ia], 0, 0};
    });
}

Field BlockSet::Phi(std::size_t k) const {
    return synth(k, 1, [&](std::size_t ip, std::size_t ia, auto&, auto&) -> std::array<cplx, 3> {
        if (psi_m_[ip] != 0) return {};
        return {Phi_hat_[ia], 0, 0};
    });
}

Field BlockSet::W(std::size_t k, double t, int dt) const {
    const double om = p_.tubes * geom_.n_lambda * p_.mu;
    auto e = k1(k);
    Field f = synth(k, 3, [&](std::size_t ip, std::size_t ia, auto&, auto&) -> std::array<cplx, 3> {
        int m = psi_m_[ip];
        cplx s = ipow(cplx(0, m * om), dt) * psi_hat_[ip] * std::polar(1.0, m * om * t) * phi_hat_[ia];
        return {s * e[0], s * e[1], s * e[2]};
    });
    f.div_free_hint = true;
    return f;
}

Field BlockSet::Wc(std::size_t k, double t, int dt) const {
    const double om = p_.tubes * geom_.n_lambda * p_.mu;
    auto e = k1(k);
    return synth(k, 3, [&](std::size_t ip, std::size_t ia, auto&, auto&) -> std::array<cplx, 3> {
        int m = psi_m_[ip];
        cplx s = c_ * ipow(cplx(0, m * om), dt) * psi_hat_[ip] * std::polar(1.0, m * om * t) * Phi_hat_[ia];
        return {s * e[0], s * e[1], s * e[2]};
    });
}

Field BlockSet::Wtc(std::size_t k, double t, int dt) const {
    if (p_.regime == Regime::A2) return Field(n_, 3);
    const double om = p_.tubes * geom_.n_lambda * p_.mu;
    const double kk = p_.tubes * geom_.n_lambda;  // k1 . xi for psi mode m, per unit m
    return synth(k, 3, [&](std::size_t ip, std::size_t ia, auto&, const std::array<int, 3>& xp) -> std::array<cplx, 3> {
        int m = psi_m_[ip];
        // c (k1.grad psi) grad Phi
        cplx s = c_ * ipow(cplx(0, m * om), dt) * psi_hat_[ip] * std::polar(1.0, m * om * t) * cplx(0, m * kk) *
                 Phi_hat_[ia] * cplx(0, 1);
        return {s * double(xp[0]), s * double(xp[1]), s * double(xp[2])};
    });
}

// ---------------------------------------------------------------------------------------------
// scaling by resolved quadrature

namespace {

// int over T of |f|^p (or max for p = inf), f supported in [-w, w] with w < pi; uniform nodes
template <class F>
double lp1d(F&& f, double w, double p, int pts = 8192) {
    double h = 2 * w / pts, acc = 0;
    for (int j = 1; j < pts; ++j) {
        double v = std::abs(f(-w + j * h));
        acc = std::isinf(p) ? std::max(acc, v) : acc + std::pow(v, p) * h;
    }
    return acc;
}

// int over T^2 of |f(|y|)|^p for radial f supported in |y| < w < pi
template <class F>
double lp2d_radial(F&& f, double w, double p, int pts = 512) {
    double h = 2 * w / pts, acc = 0;
    for (int i = 1; i < pts; ++i)
        for (int j = 1; j < pts; ++j) {
            double y1 = -w + i * h, y2 = -w + j * h;
            double v = std::abs(f(std::sqrt(y1 * y1 + y2 * y2)));
            acc = std::isinf(p) ? std::max(acc, v) : acc + std::pow(v, p) * h * h;
        }
    return acc;
}

// returns -1 if the configuration is not resolvable
double measure(const ScalingRequest& r, const BlockParams& bp, const Profiles& prof, int n_lambda, std::string& note) {
    const double p = r.p;
    const double nn = bp.tubes * n_lambda;
    if (r.family == "psi" || r.family == "jet" || r.family == "corrector") {
        if (bp.r_par >= M_PI || bp.r_perp >= M_PI) { note = "support wraps the period"; return -1; }
    }
    auto psi_r = [&](int j) {
        return [&, j](double z) { return std::pow(bp.r_par, -0.5 - j) * prof.psi(z / bp.r_par, j); };
    };
    auto phi_r = [&](double y) { return prof.phi(y / bp.r_perp) / bp.r_perp; };
    auto dphi_r = [&](double y) { return prof.dphi(y / bp.r_perp) / (bp.r_perp * bp.r_perp); };
    auto dPhi_r = [&](double y) { return prof.dPhi(y / bp.r_perp) / (bp.r_perp * bp.r_perp); };
    const double om = nn * bp.mu;

    if (r.family == "psi") {
        int j = r.N + r.M;
        double I = lp1d(psi_r(j), bp.r_par, p);
        double base = std::isinf(p) ? I : std::pow(4 * M_PI * M_PI * I, 1.0 / p);
        return std::pow(nn, r.N) * std::pow(om, r.M) * base;
    }
    if (r.family == "phi" || r.family == "mikado") {
        if (r.M != 0) { note = "time independent"; return -1; }
        if (r.N > 1) { note = "N <= 1 only"; return -1; }
        double I = r.N == 0 ? lp2d_radial(phi_r, bp.r_perp, p) : lp2d_radial(dphi_r, bp.r_perp, p);
        double base = std::isinf(p) ? I : std::pow(2 * M_PI * I, 1.0 / p);
        return std::pow(nn, r.N) * base;
    }
    if (r.family == "jet") {
        if (r.N != 0 || r.M > 1) { note = "N = 0, M <= 1 only"; return -1; }
        double a = lp1d(psi_r(r.M), bp.r_par, p), b = lp2d_radial(phi_r, bp.r_perp, p);
        return std::pow(om, r.M) * (std::isinf(p) ? a * b : std::pow(a * b, 1.0 / p));
    }
    if (r.family == "corrector") {
        if (r.N != 0 || r.M != 0) { note = "N = M = 0 only"; return -1; }
        double c = 1.0 / std::pow(bp.lambda_eff * n_lambda, 2);
        double a = lp1d(psi_r(1), bp.r_par, p), b = lp2d_radial(dPhi_r, bp.r_perp, p);
        return c * nn * nn * (std::isinf(p) ? a * b : std::pow(a * b, 1.0 / p));
    }
    if (r.family == "g" || r.family == "g_a2") {
        if (bp.tau < 1) { note = "tau < 1"; return -1; }
        TemporalBlock tb{prof.g[0], bp.tau, bp.sigma};
        // one period [0, T/sigma] carries one spike on [t0/(tau sigma), t1/(tau sigma)]
        double a = tb.prof.t0 / (bp.tau * bp.sigma), b = tb.prof.t1 / (bp.tau * bp.sigma);
        const int pts = 8192;
        double h = (b - a) / pts, acc = 0;
        for (int j = 1; j < pts; ++j) {
            double v = std::abs(tb.g(a + j * h, r.M));
            acc = std::isinf(p) ? std::max(acc, v) : acc + std::pow(v, p) * h;
        }
        return std::isinf(p) ? acc : std::pow(bp.sigma * acc, 1.0 / p);
    }
    throw Error(ErrorKind::InvalidParameter, "unknown block family " + r.family);
}

double predicted_slope(const ScalingRequest& r, double alpha1, double e1, double alpha2, double e2) {
    const double p = r.p, ip = std::isinf(p) ? 0.0 : 1.0 / p;
    const double rperp = -1 + 2 * e1, rpar = -1 + 4 * e1, mu = 2 * alpha1 - 1 + 2 * e1;
    const double tau1 = 4 * alpha1 - 5 + 11 * e1, sigma1 = 2 * e1;
    if (r.family == "psi") return rpar * (ip - 0.5) + r.N * (rperp + 1 - rpar) + r.M * (rperp + 1 + mu - rpar);
    if (r.family == "phi") return rperp * (2 * ip - 1) + r.N;
    if (r.family == "jet") return rperp * (2 * ip - 1) + rpar * (ip - 0.5) + r.N + r.M * (rperp + 1 + mu - rpar);
    if (r.family == "corrector") return (rperp - rpar) + rperp * (2 * ip - 1) + rpar * (ip - 0.5);
    if (r.family == "mikado") return (-alpha2 + 1 - 8 * e2) * (2 * ip - 1) + r.N;
    if (r.family == "g") return r.M * sigma1 + tau1 * (r.M + 0.5 - ip);
    if (r.family == "g_a2") return r.M * 2 * e2 + 2 * alpha2 * (r.M + 0.5 - ip);
    throw Error(ErrorKind::InvalidParameter, "unknown block family " + r.family);
}

}  // namespace

std::vector<ScalingRequest> default_scaling_requests() {
    return {{"psi", 0, 0, 2},    {"psi", 0, 0, 1},       {"psi", 1, 0, 2},    {"phi", 0, 0, 1},
            {"phi", 1, 0, 2},    {"jet", 0, 0, 1},       {"corrector", 0, 0, 2}, {"mikado", 0, 0, 1},
            {"mikado", 1, 0, 2}, {"g", 0, 0, 1},         {"g", 0, 1, 2},      {"g_a2", 0, 0, 1}};
}

std::vector<ScalingRow> verify_block_scaling(const std::vector<ScalingRequest>& req, const std::vector<double>& lambdas,
                                             double alpha1, double e1, double alpha2, double e2) {
    if (lambdas.size() < 3) throw Error(ErrorKind::InvalidParameter, "at least 3 lambda values are required");
    const Profiles prof = make_profiles(1.0, 1);
    const int n_lambda = 3;
    std::vector<ScalingRow> rows;
    for (const auto& r : req) {
        ScalingRow row;
        row.family = r.family;
        row.N = r.N;
        row.M = r.M;
        row.p = r.p;
        row.predicted = predicted_slope(r, alpha1, e1, alpha2, e2);
        for (double lam : lambdas) {
            bool a2 = r.family == "mikado" || r.family == "g_a2";
            BlockParams bp = a2 ? BlockParams::a2(lam, alpha2, e2) : BlockParams::a1(lam, alpha1, e1);
            std::string note;
            double v = measure(r, bp, prof, n_lambda, note);
            if (v < 0) {
                std::fprintf(stderr, "warning: skipping %s at lambda=%g: %s\n", r.family.c_str(), lam, note.c_str());
                row.skipped = true;
                row.note = note;
                continue;
            }
            row.lambdas.push_back(lam);
            row.values.push_back(v);
        }
        if (row.lambdas.size() >= 3) {
            row.measured = fit_loglog_slope(row.lambdas, row.values).slope;
            row.residual = std::abs(row.measured - row.predicted);
            row.skipped = false;
        } else {
            row.skipped = true;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
    std::ostringstream os;
    os.precision(10);
    os << "family,N,M,p_or_gamma,lambda_list,measured_slope,predicted_slope,residual\n";
    for (const auto& r : rows) {
        os << r.family << ',' << r.N << ',' << r.M << ',' << (std::isinf(r.p) ? std::string("inf") : std::to_string(r.p))
           << ',';
        for (std::size_t i = 0; i < r.lambdas.size(); ++i) os << (i ? ";" : "") << r.lambdas[i];
        if (r.skipped) os << ",skipped,skipped,skipped\n";
        else os << ',' << r.measured << ',' << r.predicted << ',' << r.residual << '\n';
    }
    return os.str();
}

}  // namespace cid
