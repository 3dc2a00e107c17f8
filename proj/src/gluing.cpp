#include "cid/gluing.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cid/blocks.hpp"
#include "cid/nsr.hpp"
#include "cid/ops.hpp"

namespace cid {

namespace {

double step_d1(double x) {
    if (x <= 0 || x >= 1) return 0;
    double a = std::exp(-1 / x), b = std::exp(-1 / (1 - x));
    double s = a + b;
    return a * b * (1 / (x * x) + 1 / ((1 - x) * (1 - x))) / (s * s);
}

bool on_grid(double x, double h, long& k) {
    double r = x / h;
    k = std::lround(r);
    return std::abs(r - k) <= 1e-9 * std::max(1.0, std::abs(r));
}

double h3_norm(const Field& v) {
    double a = parseval_l2(v), b = parseval_l2(abs_grad_power(v, 3));
    return std::sqrt(a * a + b * b);
}

// 2 nu int_t^{t+h} ||v||^2_{H^alpha}: per mode the exact decay e^{-lambda s} is factored out and the slowly
// varying remainder |e^{lambda s} v^(s)|^2 is interpolated quadratically through s = 0, h/2, h
double step_dissipation(const Field& v0, const Field& m1, const Field& m2, const Field& v1, double h,
                        const ModelParams& mp) {
    static const auto gl = [] {
        using G = boost::math::quadrature::gauss<double, 8>;
        std::vector<std::pair<double, double>> r;
        for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
            r.push_back({G::abscissa()[i], G::weights()[i]});
            if (G::abscissa()[i] != 0) r.push_back({-G::abscissa()[i], G::weights()[i]});
        }
        return r;
    }();
    const int n = v0.n();
    double total = 0;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < v0.nz(); ++k) {
                    const double a = v0.wave(i), b = v0.wave(j);
                    const double k2 = a * a + b * b + double(k) * k;
                    if (k2 == 0) continue;
                    const double lam = mp.nu * std::pow(k2, mp.alpha);
                    const double z0 = std::norm(v0.at(c, i, j, k));
                    const double zm = 0.5 * (std::norm(m1.at(c, i, j, k)) + std::norm(m2.at(c, i, j, k))) * std::exp(lam * h);
                    const double zh = std::norm(v1.at(c, i, j, k)) * std::exp(2 * lam * h);
                    if (z0 == 0 && zm == 0 && zh == 0) continue;
                    double s = 0;
                    for (auto [x, w] : gl) {
                        const double u = 0.5 * (x + 1);  // tau / h
                        const double p = z0 * (2 * u - 1) * (u - 1) + zm * 4 * u * (1 - u) + zh * u * (2 * u - 1);
                        s += 0.5 * w * 2 * lam * std::exp(-2 * lam * h * u) * p;
                    }
                    const double wt = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
                    total += wt * s * h;
                }
    return std::pow(2 * M_PI, 3) * total;
}

nlohmann::json intervals_json(const std::vector<Interval>& v) {
    auto j = nlohmann::json::array();
    for (const auto& iv : v) j.push_back({iv[0], iv[1]});
    return j;
}

// composite Simpson (trapezoid for an even count of samples on the last panel)
double integrate(const std::vector<double>& y, double h) {
    const int n = static_cast<int>(y.size());
    if (n < 2) return 0;
    double s = 0;
    int last = (n - 1) % 2 == 0 ? n - 1 : n - 2;
    for (int i = 0; i + 2 <= last; i += 2) s += h / 3 * (y[i] + 4 * y[i + 1] + y[i + 2]);
    if (last != n - 1) s += h / 2 * (y[n - 2] + y[n - 1]);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

std::vector<double> Subdivision::breakpoints(double T) const {
    std::vector<double> b;
    for (int i = 0; i < m; ++i) b.push_back(i * T / m);
    return b;
}

nlohmann::json Subdivision::to_json() const {
    return {{"m_rule", m_rule}, {"theta_rule", theta_rule}, {"m", m}, {"theta", theta}, {"overridden", overridden}};
}

Subdivision subdivide(double lambda_q, double eta, double eta_star, double T, double theta_q,
                      std::optional<int> m_override, std::optional<double> theta_override) {
    if (!(eta > eta_star / 2 && eta < eta_star))
        throw Error(ErrorKind::InvalidParameter, "eta must lie in (eta_*/2, eta_*)");
    if (!(lambda_q > 1 && T > 0 && theta_q > 0)) throw Error(ErrorKind::InvalidParameter, "need lambda_q > 1, T > 0, theta_q > 0");
    Subdivision s;
    s.m_rule = T * std::pow(lambda_q, 12);
    s.theta_rule = std::pow(T / s.m_rule, 1 / eta);
    if (m_override || theta_override) {
        s.overridden = true;
        if (!m_override) throw Error(ErrorKind::InvalidParameter, "a theta override needs an m override");
        s.m = *m_override;
        if (s.m < 1) throw Error(ErrorKind::InvalidParameter, "m must be positive");
        s.theta = theta_override ? *theta_override : std::pow(T / s.m, 1 / eta);
    } else {
        if (s.m_rule > 1e7) throw Error(ErrorKind::InvalidParameter, "rule value of m is out of reach; pass an override");
        s.m = static_cast<int>(std::llround(s.m_rule));
        s.theta = s.theta_rule;
    }
    if (!(s.theta > 0)) throw Error(ErrorKind::InvalidParameter, "theta must be positive");
    if (!(2 * s.theta < theta_q)) {
        std::ostringstream os;
        os << "theta_{q+1} = " << s.theta << " violates 2 theta_{q+1} < theta_q = " << theta_q;
        throw Error(ErrorKind::InvalidParameter, os.str());
    }
    if (!(s.theta < T / s.m)) throw Error(ErrorKind::InvalidParameter, "theta must be below the subinterval length T/m");
    return s;
}

// ---------------------------------------------------------------------------------------------

PartitionOfUnity::PartitionOfUnity(double T, int m, double theta) : T_(T), theta_(theta), m_(m) {
    if (!(T > 0 && m >= 1 && theta > 0 && theta < T / m))
        throw Error(ErrorKind::InvalidParameter, "partition needs T > 0, m >= 1, 0 < theta < T/m");
}

double PartitionOfUnity::chi(int i, double t, int deriv) const {
    if (i < 0 || i >= m_) throw Error(ErrorKind::InvalidParameter, "partition index out of range");
    if (deriv < 0 || deriv > 1) throw Error(ErrorKind::InvalidParameter, "chi derivative order must be 0 or 1");
    auto r = [&](int j) {
        double x = (t - breakpoint(j)) / theta_;
        return deriv == 0 ? smooth_step(x) : step_d1(x) / theta_;
    };
    double up = i == 0 ? (deriv == 0 ? 1.0 : 0.0) : r(i);
    double down = i == m_ - 1 ? 0.0 : r(i + 1);
    return up - down;
}

int PartitionOfUnity::interval(double t) const {
    double x = t / (T_ / m_);
    int i = static_cast<int>(std::floor(x + 1e-9));
    return std::clamp(i, 0, m_ - 1);
}

double PartitionOfUnity::sum_deviation(int samples) const {
    double worst = 0;
    for (int j = 0; j < samples; ++j) {
        double t = T_ * j / (samples - 1), s = 0;
        for (int i = 0; i < m_; ++i) s += chi(i, t);
        worst = std::max(worst, std::abs(s - 1));
    }
    return worst;
}

std::vector<double> PartitionOfUnity::derivative_constants() const {
    // chi^{(M)} = +-r^{(M)}((t - t_i)/theta) theta^{-M}; constants are max |r^{(M)}|
    const int n = 20000;
    const double h = 1.0 / n;
    std::vector<double> d1(n + 1);
    for (int j = 0; j <= n; ++j) d1[j] = step_d1(j * h);
    std::vector<double> d2 = fd_derivative(d1, h), d3 = fd_derivative(d2, h);
    auto mx = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    return {mx(d1), mx(d2), mx(d3)};
}

// ---------------------------------------------------------------------------------------------

Field advection(const Field& v) { return dealias(leray_project(differentiate(outer(v, v), DiffOp::Div))); }

LocalSolution local_solve(const Field& v0, double t0, double t1, const ModelParams& mp, double dt, int save_every,
                          double blowup_factor) {
    if (v0.comps() != 3) throw Error(ErrorKind::InvalidParameter, "local solve needs a vector field");
    if (!(dt > 0 && t1 > t0 && save_every >= 1)) throw Error(ErrorKind::InvalidParameter, "need t1 > t0, dt > 0, save_every >= 1");
    const double scale = coef_norm(v0);
    for (int c = 0; c < 3; ++c)
        if (std::abs(v0.mean(c)) > 1e-12 * scale) throw Error(ErrorKind::PreconditionViolation, "initial data is not mean free");
    if (parseval_l2(differentiate(v0, DiffOp::Div)) > 1e-10 * std::max(1e-300, parseval_l2(differentiate(v0, DiffOp::Grad))))
        throw Error(ErrorKind::PreconditionViolation, "initial data is not divergence free");
    long steps = 0;
    if (!on_grid(t1 - t0, dt, steps) || steps < 1) throw Error(ErrorKind::InvalidParameter, "the span is not a multiple of dt");
    if (steps % save_every != 0) throw Error(ErrorKind::InvalidParameter, "the step count is not a multiple of save_every");
    Field v = dealias(v0);
    const int band = (v0.n() - 1) / 3;
    if (dt * max_abs(v) * band > 1)
        throw Error(ErrorKind::InvalidParameter, "dt violates the advective rule dt |v|_inf k_max <= 1");

    LocalSolution out;
    out.t0 = t0;
    out.dt_save = dt * save_every;
    const double h0 = h3_norm(v);
    double D = 0;
    auto save = [&](const Field& f) {
        out.v.push_back(f);
        double e = parseval_l2(f);
        out.energy.push_back(e * e);
        out.dissipation.push_back(D);
    };
    save(v);
    const double h = dt;
    auto E = [&](const Field& f, double s) { return semigroup_apply(f, s, mp); };
    for (long n = 1; n <= steps; ++n) {
        Field k1 = advection(v);
        k1 *= -1;
        Field Ev_half = E(v, h / 2);
        Field s2 = E(v + (h / 2) * k1, h / 2);
        Field k2 = advection(s2);
        k2 *= -1;
        Field s3 = Ev_half + (h / 2) * k2;
        Field k3 = advection(s3);
        k3 *= -1;
        Field s4 = E(v, h) + h * E(k3, h / 2);
        Field k4 = advection(s4);
        k4 *= -1;
        Field next = E(v, h);
        next.axpy(h / 6, E(k1, h));
        next.axpy(h / 3, E(k2 + k3, h / 2));
        next.axpy(h / 6, k4);
        D += step_dissipation(v, s2, s3, next, h, mp);
        v = std::move(next);
        if (h0 > 0) {
            double g = h3_norm(v) / h0;
            out.h3_growth = std::max(out.h3_growth, g);
            if (g > blowup_factor) {
                std::ostringstream os;
                os << "blow-up guard: ||v||_H3 grew by " << g << " at t = " << t0 + n * h;
                throw Error(ErrorKind::ToleranceBreach, os.str());
            }
        }
        if (n % save_every == 0) save(v);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

double dist_to_complement(double t, const std::vector<Interval>& set) {
    for (const auto& iv : set)
        if (t >= iv[0] && t <= iv[1]) return std::min(t - iv[0], iv[1] - t);
    return 0;
}

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
    std::sort(v.begin(), v.end());
    std::vector<Interval> r;
    for (const auto& iv : v) {
        if (!r.empty() && iv[0] <= r.back()[1]) r.back()[1] = std::max(r.back()[1], iv[1]);
        else r.push_back(iv);
    }
    return r;
}

nlohmann::json GlueResult::to_json() const {
    return {{"q", state.q},
            {"theta", state.theta},
            {"bad_set", intervals_json(state.bad)},
            {"bad_indices", bad_indices},
            {"support_violation", support_violation},
            {"support_ok", support_ok},
            {"nested", nested},
            {"well_prepared", well_prepared},
            {"partition_deviation", pou_deviation},
            {"divergence", divergence},
            {"mean", mean},
            {"agreement_off_stress", agreement},
            {"agreement_samples", agreement_samples},
            {"chi_derivative_constants", chi_constants}};
}

GlueResult glue(const IterationState& s, const PartitionOfUnity& pou, const ModelParams& mp, int steps_per_sample,
                double zero_tol) {
    const int M = s.u.m();
    if (M < 2 || s.R.m() != M) throw Error(ErrorKind::InvalidParameter, "state needs matching u and R series");
    if (std::abs(s.u.t_final - pou.T()) > 1e-12) throw Error(ErrorKind::InvalidParameter, "partition and state disagree on T");
    const int m = pou.m();
    const double dts = s.u.dt(), th = pou.theta(), T = pou.T();
    if ((M - 1) % m != 0) throw Error(ErrorKind::InvalidParameter, "breakpoints must sit on the sample grid ((M-1) % m == 0)");
    long thj = 0;
    if (!on_grid(th, dts, thj)) throw Error(ErrorKind::InvalidParameter, "theta must be a multiple of the sample spacing");
    if (2 * th >= s.theta) throw Error(ErrorKind::InvalidParameter, "2 theta_{q+1} < theta_q is violated");
    const int per = (M - 1) / m;
    const double dt = dts / steps_per_sample;

    GlueResult res;
    res.state.q = s.q + 1;
    res.state.theta = th;
    res.state.u.t_final = res.state.R.t_final = T;
    res.state.u.samples.resize(M);
    res.state.R.samples.resize(M);

    double rmax = 0;
    for (const auto& r : s.R.samples) rmax = std::max(rmax, coef_norm(r));
    auto stressed = [&](int ja, int jb) {
        for (int j = std::max(0, ja); j <= std::min(M - 1, jb); ++j)
            if (rmax > 0 && coef_norm(s.R.samples[j]) > zero_tol * rmax) return true;
        return false;
    };

    // bad index set and I_{q+1}
    std::vector<Interval> next;
    for (int i = 1; i < m; ++i)
        if (stressed((i - 1) * per, i * per + static_cast<int>(thj))) {
            res.bad_indices.push_back(i);
            double ti = pou.breakpoint(i);
            next.push_back({std::max(0.0, ti - 2 * th), std::min(T, ti + 3 * th)});
        }
    res.state.bad = merge_intervals(next);

    LocalSolution prev, cur;
    for (int i = 0; i < m; ++i) {
        const int j0 = i * per, j1 = std::min(M - 1, (i + 1) * per + static_cast<int>(thj));
        cur = local_solve(s.u.samples[j0], s.u.time(j0), s.u.time(j1), mp, dt, steps_per_sample);
        const int jend = i == m - 1 ? M - 1 : (i + 1) * per - 1;
        for (int j = j0; j <= jend; ++j) {
            const double t = s.u.time(j);
            const Field& vi = cur.v[j - j0];
            if (i == 0) {
                res.state.u.samples[j] = vi;
                res.state.R.samples[j] = Field(vi.n(), 9);
                continue;
            }
            const double c = pou.chi(i, t), dc = pou.chi(i, t, 1);
            if (c == 1 && dc == 0) {
                res.state.u.samples[j] = vi;
                res.state.R.samples[j] = Field(vi.n(), 9);
                continue;
            }
            const Field& vp = prev.v.at(j - (i - 1) * per);
            Field d = vi - vp;
            Field u = c * vi;
            u.axpy(1 - c, vp);
            Field R = dc * inverse_divergence(d);
            R.axpy(-c * (1 - c), outer_tf(d, d));
            res.state.u.samples[j] = std::move(u);
            res.state.R.samples[j] = std::move(R);
        }
        prev = std::move(cur);
    }

    // checks on the sample grid
    double smax = 0;
    for (const auto& r : res.state.R.samples) smax = std::max(smax, coef_norm(r));
    const double sscale = smax > 0 ? smax : 1;
    for (int j = 0; j < M; ++j) {
        const double t = s.u.time(j), d = dist_to_complement(t, res.state.bad);
        const double r = coef_norm(res.state.R.samples[j]) / sscale;
        if (d <= 1.5 * th + 1e-12) res.support_violation = std::max(res.support_violation, r);
        const Field& u = res.state.u.samples[j];
        const double un = coef_norm(u);
        if (un > 0) {
            double g = parseval_l2(differentiate(u, DiffOp::Grad));
            res.divergence = std::max(res.divergence, parseval_l2(differentiate(u, DiffOp::Div)) / g);
            for (int c = 0; c < 3; ++c) res.mean = std::max(res.mean, std::abs(u.mean(c)) / un);
        }
        const int i = std::min(m - 1, j / per);
        if (!stressed(std::max(0, (i - 1) * per), j)) {
            double dn = coef_norm(u - s.u.samples[j]) / std::max(1e-300, coef_norm(s.u.samples[j]));
            res.agreement = std::max(res.agreement, dn);
            ++res.agreement_samples;
        }
    }
    res.support_ok = res.support_violation <= zero_tol;
    res.well_prepared = true;
    for (int j = 0; j < M; ++j)
        if (dist_to_complement(s.u.time(j), res.state.bad) <= th + 1e-12 &&
            coef_norm(res.state.R.samples[j]) > zero_tol * sscale)
            res.well_prepared = false;
    res.nested = true;
    for (const auto& iv : res.state.bad) {
        bool inside = false;
        for (const auto& big : s.bad)
            if (iv[0] >= big[0] - 1e-12 && iv[1] <= big[1] + 1e-12) inside = true;
        res.nested = res.nested && inside;
    }
    res.pou_deviation = pou.sum_deviation(10001);
    res.chi_constants = pou.derivative_constants();
    return res;
}

// ---------------------------------------------------------------------------------------------

IterationState synthetic_state(int n, int samples, double T, const ModelParams& mp, const std::vector<Interval>& bad,
                               double theta, double amplitude, unsigned long seed, int steps_per_sample) {
    if (samples < 5) throw Error(ErrorKind::InvalidParameter, "need at least 5 samples");
    for (const auto& iv : bad)
        if (!(iv[1] - iv[0] > 2 * theta && iv[0] >= 0 && iv[1] <= T))
            throw Error(ErrorKind::InvalidParameter, "each bad interval must be longer than 2 theta and inside [0,T]");
    std::mt19937_64 rng(seed);
    const int band = std::min(2, (n - 1) / 3);
    Field v0 = random_solenoidal(n, band, rng);
    v0 *= 0.5;
    Field Z = random_solenoidal(n, band, rng);
    Z *= amplitude;
    const double dts = T / (samples - 1);
    LocalSolution v = local_solve(v0, 0, T, mp, dts / steps_per_sample, steps_per_sample);

    // beta: a bump on the theta-interior of each bad interval
    auto beta = [&](double t, int d) {
        double s = 0;
        for (const auto& iv : bad) {
            double a = iv[0] + theta, b = iv[1] - theta;
            double x = (2 * t - a - b) / (b - a);
            s += bump(x, d) * std::pow(2 / (b - a), d) / bump(0);
        }
        return s;
    };
    IterationState st;
    st.u.t_final = st.R.t_final = T;
    st.bad = merge_intervals(bad);
    st.theta = theta;
    const Field LZ = fractional_laplacian(Z, mp.alpha, mp.nu);
    for (int j = 0; j < samples; ++j) {
        const double t = j * dts, b0 = beta(t, 0), b1 = beta(t, 1);
        const Field& vj = v.v[j];
        if (b0 == 0 && b1 == 0) {
            st.u.samples.push_back(vj);
            st.R.samples.push_back(Field(n, 9));
            continue;
        }
        Field u = vj;
        u.axpy(b0, Z);
        Field f = b1 * Z;
        f.axpy(b0, LZ);
        f += advection(u);
        f -= advection(vj);
        st.u.samples.push_back(u);
        st.R.samples.push_back(inverse_divergence(leray_project(f)));
    }
    return st;
}

TimeSeries stress_series(const TimeSeries& u, const ModelParams& mp) {
    TimeSeries ut = fd_derivative(u), R;
    R.t_final = u.t_final;
    for (int j = 0; j < u.m(); ++j) R.samples.push_back(initial_stress(u.samples[j], ut.samples[j], mp));
    return R;
}

// ---------------------------------------------------------------------------------------------

nlohmann::json StabilityRow::to_json() const {
    return {{"amplitude", amplitude}, {"rho", rho},         {"w_sup", w_sup},   {"grad_stress_int", grad_stress},
            {"ratio", ratio},         {"Rw_sup", Rw_sup},   {"stress_int", stress}, {"ratio_R", ratio_R}};
}

nlohmann::json StabilityReport::to_json() const {
    auto r = nlohmann::json::array();
    for (const auto& x : rows) r.push_back(x.to_json());
    return {{"rows", r}, {"spread", spread}, {"spread_R", spread_R}, {"pass", pass}};
}

StabilityReport verify_stability(int n, const ModelParams& mp, const std::vector<double>& amplitudes,
                                 const std::vector<double>& rhos, double span, double dt, unsigned long seed,
                                 double tolerance) {
    if (amplitudes.size() < 2 || rhos.empty()) throw Error(ErrorKind::InvalidParameter, "need >= 2 amplitudes and >= 1 rho");
    StabilityReport rep;
    const int save = 4;
    for (double A : amplitudes) {
        SyntheticBackground bg(n, A, mp, seed, 2);
        LocalSolution v = local_solve(bg.u(0), 0, span, mp, dt, save);
        std::vector<Field> w, Rw, R, gR;
        for (int j = 0; j < static_cast<int>(v.v.size()); ++j) {
            double t = v.time(j);
            w.push_back(bg.u(t) - v.v[j]);
            Rw.push_back(inverse_divergence(w.back()));
            R.push_back(bg.stress(t));
            gR.push_back(abs_grad_power(R.back(), 1));
        }
        for (double rho : rhos) {
            StabilityRow row;
            row.amplitude = A;
            row.rho = rho;
            std::vector<double> a, b;
            for (std::size_t j = 0; j < w.size(); ++j) {
                row.w_sup = std::max(row.w_sup, lp_norm(w[j], rho));
                row.Rw_sup = std::max(row.Rw_sup, lp_norm(Rw[j], rho));
                a.push_back(lp_norm(gR[j], rho));
                b.push_back(lp_norm(R[j], rho));
            }
            row.grad_stress = integrate(a, v.dt_save);
            row.stress = integrate(b, v.dt_save);
            row.ratio = row.w_sup / row.grad_stress;
            row.ratio_R = row.Rw_sup / row.stress;
            rep.rows.push_back(row);
        }
    }
    for (double rho : rhos) {
        std::vector<double> r1, r2;
        for (const auto& row : rep.rows)
            if (row.rho == rho) {
                r1.push_back(row.ratio);
                r2.push_back(row.ratio_R);
            }
        auto spread = [](const std::vector<double>& r) {
            double m = 0;
            for (double x : r) m += x / r.size();
            double s = 0;
            for (double x : r) s = std::max(s, std::abs(x / m - 1));
            return s;
        };
        rep.spread = std::max(rep.spread, spread(r1));
        rep.spread_R = std::max(rep.spread_R, spread(r2));
    }
    rep.pass = rep.spread <= tolerance && rep.spread_R <= tolerance;
    return rep;
}

nlohmann::json EnergyReport::to_json() const {
    return {{"runs", runs}, {"failures", failures}, {"worst_excess", worst_excess}, {"pass", pass}};
}

EnergyReport energy_inequality(int n, const ModelParams& mp, int runs, double span, double dt, unsigned long seed,
                               double tolerance) {
    EnergyReport rep;
    rep.runs = runs;
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    const int band = (n - 1) / 3;
    for (int r = 0; r < runs; ++r) {
        std::mt19937_64 rng(seed + r);
        Field v0 = random_solenoidal(n, band, rng);
        v0 *= 0.1;
        LocalSolution v = local_solve(v0, 0, span, mp, dt, 1);
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < v.v.size(); ++j)
            worst = std::max(worst, (v.energy[j] + v.dissipation[j] - v.energy[0]) / v.energy[0]);
        rep.worst_excess = std::max(rep.worst_excess, worst);
        if (worst > tolerance) ++rep.failures;
    }
    rep.pass = rep.failures == 0;
    return rep;
}

nlohmann::json cover_report(const std::vector<CoverLevel>& levels, double eta, double eta_star) {
    auto arr = nlohmann::json::array();
    double bound = 0;
    bool decreasing = true, within = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& L : levels) {
        const auto merged = merge_intervals(L.bad);
        const double count = static_cast<double>(merged.size());
        const double weighted = count * std::pow(L.theta, eta_star);
        const double cap = std::pow(L.theta, -eta);
        arr.push_back({{"theta", L.theta},
                       {"count", merged.size()},
                       {"count_theta_eta_star", weighted},
                       {"count_bound", cap},
                       {"within_bound", count <= cap}});
        within = within && count <= cap;
        if (!(weighted < prev) && levels.size() > 1 && &L != &levels.front()) decreasing = false;
        prev = weighted;
        if (count > 0) bound = std::max(bound, std::log(count) / std::log(1 / L.theta));
    }
    return {{"levels", arr}, {"decreasing", decreasing}, {"within_bound", within}, {"dimension_bound", bound}};
}

}  // namespace cid
