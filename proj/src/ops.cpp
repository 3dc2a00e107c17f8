#include "cid/ops.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace cid {

namespace {

template <class Fn>
void for_modes(const Field& f, Fn&& fn) {
    const int n = f.n();
    for (int i = 0; i < n; ++i) {
        double kx = f.wave(i);
        for (int j = 0; j < n; ++j) {
            double ky = f.wave(j);
            for (int k = 0; k < f.nz(); ++k) fn(f.idx(i, j, k), kx, ky, static_cast<double>(k));
        }
    }
}

const cplx I(0.0, 1.0);

Field scalar_multiplier(const Field& f, const auto& mult) {
    Field g = f;
    for (int c = 0; c < f.comps(); ++c) {
        cplx* a = g.comp(c);
        for_modes(f, [&](std::size_t p, double kx, double ky, double kz) { a[p] *= mult(kx, ky, kz); });
    }
    return g;
}

}  // namespace

double lp_norm(const Field& f, double p) {
    if (!(p >= 1.0)) throw Error(ErrorKind::InvalidParameter, "lp_norm requires p >= 1");
    auto u = to_physical(f);
    const std::size_t np = static_cast<std::size_t>(f.n()) * f.n() * f.n();
    const double vol = std::pow(2.0 * M_PI, 3);
    double acc = 0.0;
    for (std::size_t q = 0; q < np; ++q) {
        double m2 = 0.0;
        for (int c = 0; c < f.comps(); ++c) m2 += u[c * np + q] * u[c * np + q];
        double m = std::sqrt(m2);
        if (std::isinf(p)) acc = std::max(acc, m);
        else acc += std::pow(m, p);
    }
    if (std::isinf(p)) return acc;
    return std::pow(acc * vol / static_cast<double>(np), 1.0 / p);
}

double parseval_l2(const Field& f) {
    double s = 0.0;
    for (int c = 0; c < f.comps(); ++c) {
        const cplx* a = f.comp(c);
        for_modes(f, [&](std::size_t p, double, double, double kz) {
            double w = (kz == 0.0 || 2 * kz == f.n()) ? 1.0 : 2.0;
            s += w * std::norm(a[p]);
        });
    }
    return std::sqrt(std::pow(2.0 * M_PI, 3) * s);
}

Field differentiate(const Field& f, DiffOp op) {
    const int n = f.n();
    switch (op) {
        case DiffOp::Laplacian:
            return scalar_multiplier(f, [](double a, double b, double c) { return cplx(-(a * a + b * b + c * c), 0); });
        case DiffOp::Grad: {
            if (f.comps() == 9) throw Error(ErrorKind::InvalidParameter, "grad of a tensor is not supported");
            Field g(n, f.comps() * 3);
            for (int c = 0; c < f.comps(); ++c) {
                const cplx* a = f.comp(c);
                cplx* gx = g.comp(3 * c);
                cplx* gy = g.comp(3 * c + 1);
                cplx* gz = g.comp(3 * c + 2);
                for_modes(f, [&](std::size_t p, double kx, double ky, double kz) {
                    gx[p] = I * kx * a[p];
                    gy[p] = I * ky * a[p];
                    gz[p] = I * kz * a[p];
                });
            }
            return g;
        }
        case DiffOp::Div: {
            if (f.comps() == 1) throw Error(ErrorKind::InvalidParameter, "div needs a vector or tensor");
            int rows = f.comps() / 3;
            Field g(n, rows);
            for (int r = 0; r < rows; ++r) {
                cplx* d = g.comp(r);
                const cplx* ax = f.comp(3 * r);
                const cplx* ay = f.comp(3 * r + 1);
                const cplx* az = f.comp(3 * r + 2);
                for_modes(f, [&](std::size_t p, double kx, double ky, double kz) {
                    d[p] = I * (kx * ax[p] + ky * ay[p] + kz * az[p]);
                });
            }
            return g;
        }
        case DiffOp::Curl: {
            if (f.comps() != 3) throw Error(ErrorKind::InvalidParameter, "curl needs a vector");
            Field g(n, 3);
            const cplx *ax = f.comp(0), *ay = f.comp(1), *az = f.comp(2);
            cplx *gx = g.comp(0), *gy = g.comp(1), *gz = g.comp(2);
            for_modes(f, [&](std::size_t p, double kx, double ky, double kz) {
                gx[p] = I * (ky * az[p] - kz * ay[p]);
                gy[p] = I * (kz * ax[p] - kx * az[p]);
                gz[p] = I * (kx * ay[p] - ky * ax[p]);
            });
            return g;
        }
    }
    return f;
}

Field fractional_laplacian(const Field& f, double alpha, double nu) {
    return scalar_multiplier(f, [&](double a, double b, double c) {
        double k2 = a * a + b * b + c * c;
        return cplx(k2 == 0.0 ? 0.0 : nu * std::pow(k2, alpha), 0.0);
    });
}

Field abs_grad_power(const Field& f, double s) {
    return scalar_multiplier(f, [&](double a, double b, double c) {
        double k2 = a * a + b * b + c * c;
        return cplx(k2 == 0.0 ? 0.0 : std::pow(k2, 0.5 * s), 0.0);
    });
}

Field leray_project(const Field& v) {
    if (v.comps() != 3) throw Error(ErrorKind::InvalidParameter, "leray_project needs a vector");
    Field g = v;
    cplx *ax = g.comp(0), *ay = g.comp(1), *az = g.comp(2);
    for_modes(v, [&](std::size_t p, double kx, double ky, double kz) {
        double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0) return;
        cplx d = (kx * ax[p] + ky * ay[p] + kz * az[p]) / k2;
        ax[p] -= kx * d;
        ay[p] -= ky * d;
        az[p] -= kz * d;
    });
    g.div_free_hint = true;
    return g;
}

Field inverse_divergence(const Field& v) {
    if (v.comps() != 3) throw Error(ErrorKind::InvalidParameter, "inverse_divergence needs a vector");
    double mean = std::abs(v.mean(0)) + std::abs(v.mean(1)) + std::abs(v.mean(2));
    double scale = coef_norm(v);
    if (mean > 1e-12 * std::max(scale, 1e-300) && mean > 1e-300)
        throw Error(ErrorKind::PreconditionViolation, "inverse_divergence input has nonzero mean");
    Field r(v.n(), 9);
    const cplx *vx = v.comp(0), *vy = v.comp(1), *vz = v.comp(2);
    for_modes(v, [&](std::size_t p, double kx, double ky, double kz) {
        double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0) return;
        const double xi[3] = {kx, ky, kz};
        const cplx vv[3] = {vx[p], vy[p], vz[p]};
        cplx xv = (kx * vv[0] + ky * vv[1] + kz * vv[2]) / k2;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                cplx t = -I * (xi[a] * vv[b] + xi[b] * vv[a]) / k2;
                t += 0.5 * I * ((a == b ? 1.0 : 0.0) + xi[a] * xi[b] / k2) * xv;
                r.comp(3 * a + b)[p] = t;
            }
    });
    r.mean_free_hint = true;
    return r;
}

Field freq_project(const Field& f, FreqMode mode, double kappa) {
    if (kappa < 0) throw Error(ErrorKind::InvalidParameter, "kappa must be >= 0");
    double k2min = mode == FreqMode::NonZero ? 0.5 : kappa * kappa;
    Field g = scalar_multiplier(f, [&](double a, double b, double c) {
        double k2 = a * a + b * b + c * c;
        bool keep = mode == FreqMode::NonZero ? k2 > 0.0 : (k2 >= k2min && k2 > 0.0);
        return cplx(keep ? 1.0 : 0.0, 0.0);
    });
    g.mean_free_hint = true;
    return g;
}

Field semigroup_apply(const Field& f, double t, const ModelParams& mp) {
    if (t < 0) throw Error(ErrorKind::InvalidParameter, "semigroup time must be >= 0");
    return scalar_multiplier(f, [&](double a, double b, double c) {
        double k2 = a * a + b * b + c * c;
        return cplx(std::exp(-t * mp.nu * std::pow(k2, mp.alpha)), 0.0);
    });
}

namespace {

double bump3(double r) { return r < 1.0 ? std::exp(1.0 / (r * r - 1.0)) : 0.0; }

// normalized transform of the unit radial bump, m(0) = 1
double bump3_hat(double s) {
    static std::map<double, double> cache;
    static std::mutex mu;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(s);
        if (it != cache.end()) return it->second;
    }
    boost::math::quadrature::tanh_sinh<double> q;
    auto radial = [&](double ss) {
        return q.integrate([&](double r) {
            double sinc = ss * r < 1e-8 ? 1.0 : std::sin(ss * r) / (ss * r);
            return bump3(r) * r * r * sinc;
        }, 0.0, 1.0);
    };
    static const double norm0 = radial(0.0);
    double v = radial(s) / norm0;
    std::lock_guard<std::mutex> lk(mu);
    cache[s] = v;
    return v;
}

}  // namespace

Field mollify(const Field& f, double ell) {
    if (!(ell > 0.0 && ell <= 1.0)) throw Error(ErrorKind::InvalidParameter, "mollifier scale must lie in (0,1]");
    return scalar_multiplier(f, [&](double a, double b, double c) {
        double k = std::sqrt(a * a + b * b + c * c);
        return cplx(k == 0.0 ? 1.0 : bump3_hat(k * ell), 0.0);
    });
}

Field dealias(Field f, int band) {
    const int n = f.n();
    if (band < 0) band = (n - 1) / 3;
    for (int c = 0; c < f.comps(); ++c) {
        cplx* a = f.comp(c);
        for_modes(f, [&](std::size_t p, double kx, double ky, double kz) {
            if (std::abs(kx) > band || std::abs(ky) > band || kz > band) a[p] = 0;
        });
    }
    return f;
}

namespace {

Field finish(std::vector<double>& u, int n, int comps, bool raw) {
    Field f = from_physical(u, n, comps);
    return raw ? f : dealias(std::move(f));
}

std::size_t npts(const Field& f) { return static_cast<std::size_t>(f.n()) * f.n() * f.n(); }

}  // namespace

Field mul(const Field& a, const Field& b, bool raw) {
    if (a.comps() != 1) throw Error(ErrorKind::InvalidParameter, "mul expects a scalar first factor");
    if (a.n() != b.n()) throw Error(ErrorKind::InvalidParameter, "grid mismatch in mul");
    auto ua = to_physical(a);
    auto ub = to_physical(b);
    const std::size_t np = npts(a);
    for (int c = 0; c < b.comps(); ++c)
        for (std::size_t q = 0; q < np; ++q) ub[c * np + q] *= ua[q];
    return finish(ub, a.n(), b.comps(), raw);
}

Field outer(const Field& a, const Field& b, bool raw) {
    if (a.comps() != 3 || b.comps() != 3) throw Error(ErrorKind::InvalidParameter, "outer expects vectors");
    auto ua = to_physical(a);
    auto ub = to_physical(b);
    const std::size_t np = npts(a);
    std::vector<double> u(9 * np);
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
            for (std::size_t q = 0; q < np; ++q) u[(3 * k + l) * np + q] = ua[k * np + q] * ub[l * np + q];
    return finish(u, a.n(), 9, raw);
}

Field outer_tf(const Field& a, const Field& b, bool raw) {
    if (a.comps() != 3 || b.comps() != 3) throw Error(ErrorKind::InvalidParameter, "outer_tf expects vectors");
    auto ua = to_physical(a);
    auto ub = to_physical(b);
    const std::size_t np = npts(a);
    std::vector<double> u(9 * np);
    for (std::size_t q = 0; q < np; ++q) {
        double d = 0;
        for (int k = 0; k < 3; ++k) d += ua[k * np + q] * ub[k * np + q];
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                u[(3 * k + l) * np + q] = ua[k * np + q] * ub[l * np + q] - (k == l ? d / 3.0 : 0.0);
    }
    return finish(u, a.n(), 9, raw);
}

Field cross(const Field& a, const Field& b, bool raw) {
    if (a.comps() != 3 || b.comps() != 3) throw Error(ErrorKind::InvalidParameter, "cross expects vectors");
    auto ua = to_physical(a);
    auto ub = to_physical(b);
    const std::size_t np = npts(a);
    std::vector<double> u(3 * np);
    for (std::size_t q = 0; q < np; ++q) {
        double x0 = ua[q], x1 = ua[np + q], x2 = ua[2 * np + q];
        double y0 = ub[q], y1 = ub[np + q], y2 = ub[2 * np + q];
        u[q] = x1 * y2 - x2 * y1;
        u[np + q] = x2 * y0 - x0 * y2;
        u[2 * np + q] = x0 * y1 - x1 * y0;
    }
    return finish(u, a.n(), 3, raw);
}

Field dot(const Field& a, const Field& b, bool raw) {
    if (a.comps() != b.comps()) throw Error(ErrorKind::InvalidParameter, "dot expects equal shapes");
    auto ua = to_physical(a);
    auto ub = to_physical(b);
    const std::size_t np = npts(a);
    std::vector<double> u(np, 0.0);
    for (int c = 0; c < a.comps(); ++c)
        for (std::size_t q = 0; q < np; ++q) u[q] += ua[c * np + q] * ub[c * np + q];
    return finish(u, a.n(), 1, raw);
}

Field constant_field(int n, int comps, const std::vector<double>& value) {
    Field f(n, comps);
    for (int c = 0; c < comps; ++c) f.comp(c)[0] = value.at(c);
    return f;
}

Field times_constant_vector(const Field& s, const std::array<double, 3>& v) {
    Field f(s.n(), 3);
    for (int c = 0; c < 3; ++c) f.set_component(c, v[c] * s);
    return f;
}

Field times_constant_tensor(const Field& s, const std::array<double, 9>& m) {
    Field f(s.n(), 9);
    for (int c = 0; c < 9; ++c) f.set_component(c, m[c] * s);
    return f;
}

Field tensor_trace(const Field& t) {
    Field s = t.component(0);
    s += t.component(4);
    s += t.component(8);
    return s;
}

Field transpose(const Field& t) {
    Field r(t.n(), 9);
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) r.set_component(3 * k + l, t.component(3 * l + k));
    return r;
}

double max_asymmetry(const Field& t) { return max_abs(t - transpose(t)); }
double max_trace(const Field& t) { return max_abs(tensor_trace(t)); }

double max_abs(const Field& f) {
    auto u = to_physical(f);
    double m = 0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

double coef_norm(const Field& f) {
    double s = 0;
    for (const auto& c : f.data()) s += std::norm(c);
    return std::sqrt(s);
}

double rel_diff(const Field& a, const Field& b) {
    double d = coef_norm(a - b);
    double s = std::max(coef_norm(a), coef_norm(b));
    return s > 1e-300 ? d / s : d;
}

Field resample(const Field& f, int n) {
    if (n < 2 || n % 2) throw Error(ErrorKind::InvalidParameter, "resample needs an even grid size");
    if (n == f.n()) return f;
    Field g(n, f.comps());
    const int keep = (std::min(n, f.n()) - 1) / 2;  // Nyquist planes are never carried over
    for (int c = 0; c < f.comps(); ++c)
        for (int a = -keep; a <= keep; ++a)
            for (int b = -keep; b <= keep; ++b)
                for (int k = 0; k <= keep; ++k)
                    g.at(c, (a + n) % n, (b + n) % n, k) = f.at(c, (a + f.n()) % f.n(), (b + f.n()) % f.n(), k);
    g.mean_free_hint = f.mean_free_hint;
    g.div_free_hint = f.div_free_hint;
    return g;
}

}  // namespace cid
