#include "cid/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace cid {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidParameter: return "invalid-parameter";
        case ErrorKind::PreconditionViolation: return "precondition-violation";
        case ErrorKind::OutOfDomain: return "out-of-domain";
        case ErrorKind::ResolutionError: return "resolution-error";
        case ErrorKind::ConstructionFailure: return "construction-failure";
        case ErrorKind::NoAdmissibleShifts: return "no-admissible-shifts";
        case ErrorKind::InfeasibleB: return "infeasible-b";
        case ErrorKind::DegenerateInput: return "degenerate-input";
        case ErrorKind::ToleranceBreach: return "tolerance-breach";
        case ErrorKind::IoError: return "io-error";
    }
    return "error";
}

void GridSpec::validate() const {
    if (n < 4 || n % 2) throw Error(ErrorKind::InvalidParameter, "grid N must be even and >= 4");
    if (m < 1) throw Error(ErrorKind::InvalidParameter, "time-sample count must be >= 1");
    if (!(t_final > 0)) throw Error(ErrorKind::InvalidParameter, "period T must be positive");
}

void ModelParams::validate() const {
    if (!(nu > 0)) throw Error(ErrorKind::InvalidParameter, "viscosity must be positive");
    if (!(alpha >= 1.0 && alpha < 2.0)) throw Error(ErrorKind::InvalidParameter, "alpha must lie in [1,2)");
}

namespace {

// One pair of plans per N, with private aligned buffers. FFTW planning is not
// thread safe, so plan creation and execution share a lock per size.
struct Plan {
    int n;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd{}, bwd{};
    std::mutex mu;

    explicit Plan(int n_) : n(n_) {
        std::size_t nr = static_cast<std::size_t>(n) * n * n;
        std::size_t nc = static_cast<std::size_t>(n) * n * (n / 2 + 1);
        real = fftw_alloc_real(nr);
        spec = fftw_alloc_complex(nc);
        fwd = fftw_plan_dft_r2c_3d(n, n, n, real, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_3d(n, n, n, spec, real, FFTW_ESTIMATE);
    }
    ~Plan() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
};

std::mutex g_plan_mu;

Plan& plan_for(int n) {
    static std::map<int, std::unique_ptr<Plan>> cache;
    std::lock_guard<std::mutex> lk(g_plan_mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Plan>(n)).first;
    return *it->second;
}

}  // namespace

Field::Field(int n, int comps) : n_(n), comps_(comps) {
    if (n < 4 || n % 2) throw Error(ErrorKind::InvalidParameter, "field N must be even and >= 4");
    if (comps != 1 && comps != 3 && comps != 9)
        throw Error(ErrorKind::InvalidParameter, "component count must be 1, 3 or 9");
    coef_.assign(static_cast<std::size_t>(comps) * modes(), cplx(0, 0));
}

static void check_same(const Field& a, const Field& b) {
    if (a.n() != b.n() || a.comps() != b.comps())
        throw Error(ErrorKind::InvalidParameter, "field shape mismatch");
}

Field& Field::operator+=(const Field& o) {
    check_same(*this, o);
    for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += o.coef_[i];
    return *this;
}
Field& Field::operator-=(const Field& o) {
    check_same(*this, o);
    for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] -= o.coef_[i];
    return *this;
}
Field& Field::operator*=(double s) {
    for (auto& c : coef_) c *= s;
    return *this;
}
Field& Field::axpy(double a, const Field& o) {
    check_same(*this, o);
    for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += a * o.coef_[i];
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field Field::component(int c) const {
    Field s(n_, 1);
    std::memcpy(static_cast<void*>(s.comp(0)), comp(c), modes() * sizeof(cplx));
    return s;
}

void Field::set_component(int c, const Field& s) {
    if (s.n() != n_ || s.comps() != 1) throw Error(ErrorKind::InvalidParameter, "set_component expects a scalar");
    std::memcpy(static_cast<void*>(comp(c)), s.comp(0), modes() * sizeof(cplx));
}

void Field::enforce_real() {
    const int h = n_ / 2;
    for (int c = 0; c < comps_; ++c) {
        cplx* a = comp(c);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                a[idx(i, j, h)] = 0;
                if (i == h || j == h)
                    for (int k = 0; k < nz(); ++k) a[idx(i, j, k)] = 0;
            }
        // k = 0 plane: f(-xi) = conj f(xi)
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                int ii = (n_ - i) % n_, jj = (n_ - j) % n_;
                std::size_t p = idx(i, j, 0), q = idx(ii, jj, 0);
                if (p > q) continue;
                cplx avg = 0.5 * (a[p] + std::conj(a[q]));
                a[p] = avg;
                a[q] = std::conj(avg);
            }
    }
}

std::vector<double> to_physical(const Field& f) {
    const int n = f.n();
    Plan& pl = plan_for(n);
    std::size_t nr = static_cast<std::size_t>(n) * n * n;
    std::vector<double> u(f.comps() * nr);
    std::lock_guard<std::mutex> lk(pl.mu);
    for (int c = 0; c < f.comps(); ++c) {
        std::memcpy(pl.spec, f.comp(c), f.modes() * sizeof(cplx));
        fftw_execute(pl.bwd);
        std::memcpy(u.data() + c * nr, pl.real, nr * sizeof(double));
    }
    return u;
}

Field from_physical(const std::vector<double>& u, int n, int comps) {
    Field f(n, comps);
    Plan& pl = plan_for(n);
    std::size_t nr = static_cast<std::size_t>(n) * n * n;
    if (u.size() != comps * nr) throw Error(ErrorKind::InvalidParameter, "physical array size mismatch");
    const double inv = 1.0 / static_cast<double>(nr);
    {
        std::lock_guard<std::mutex> lk(pl.mu);
        for (int c = 0; c < comps; ++c) {
            std::memcpy(pl.real, u.data() + c * nr, nr * sizeof(double));
            fftw_execute(pl.fwd);
            cplx* dst = f.comp(c);
            std::memcpy(static_cast<void*>(dst), pl.spec, f.modes() * sizeof(cplx));
            for (std::size_t p = 0; p < f.modes(); ++p) dst[p] *= inv;
        }
    }
    f.enforce_real();
    return f;
}

}  // namespace cid
