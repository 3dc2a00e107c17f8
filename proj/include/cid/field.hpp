#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cid {

using cplx = std::complex<double>;

enum class ErrorKind {
    InvalidParameter,
    PreconditionViolation,
    OutOfDomain,
    ResolutionError,
    ConstructionFailure,
    NoAdmissibleShifts,
    InfeasibleB,
    DegenerateInput,
    ToleranceBreach,
    IoError
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& what)
        : std::runtime_error(std::string(to_string(k)) + ": " + what), kind_(k) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Resolution N per axis, M time samples on [0,T] (endpoints included).
struct GridSpec {
    int n = 32;
    int m = 1;
    double t_final = 1.0;

    void validate() const;
    // kept modes satisfy 3|xi_i| < N
    int dealias_band() const { return (n - 1) / 3; }
};

struct ModelParams {
    double nu = 1.0;
    double alpha = 1.25;
    void validate() const;
};

// Real periodic field on T^3 held as r2c half-spectrum coefficients,
// f(x) = sum_xi fhat(xi) e^{i xi.x}, grid nodes x_j = 2 pi j / N.
// Components: 1 scalar, 3 vector, 9 rank-2 tensor (row-major, T^{kl} at 3k+l).
class Field {
public:
    Field() = default;
    Field(int n, int comps);

    int n() const { return n_; }
    int comps() const { return comps_; }
    int nz() const { return n_ / 2 + 1; }
    std::size_t modes() const { return static_cast<std::size_t>(n_) * n_ * nz(); }

    cplx* comp(int c) { return coef_.data() + c * modes(); }
    const cplx* comp(int c) const { return coef_.data() + c * modes(); }
    cplx& at(int c, int i, int j, int k) { return coef_[c * modes() + idx(i, j, k)]; }
    const cplx& at(int c, int i, int j, int k) const { return coef_[c * modes() + idx(i, j, k)]; }
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n_ + j) * nz() + k;
    }
    // signed wavenumber of array index i along a full axis
    int wave(int i) const { return i <= n_ / 2 ? i : i - n_; }

    std::vector<cplx>& data() { return coef_; }
    const std::vector<cplx>& data() const { return coef_; }

    bool mean_free_hint = false;
    bool div_free_hint = false;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);
    Field& axpy(double a, const Field& o);  // this += a*o

    Field component(int c) const;
    void set_component(int c, const Field& s);
    cplx mean(int c = 0) const { return comp(c)[0]; }

    // zero the Nyquist planes and restore Hermitian symmetry on the k = 0 and k = N/2 planes
    void enforce_real();

private:
    int n_ = 0;
    int comps_ = 0;
    std::vector<cplx> coef_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

// physical samples: comps blocks of n^3 doubles, x fastest index last (i,j,k) row-major
std::vector<double> to_physical(const Field& f);
Field from_physical(const std::vector<double>& u, int n, int comps);

// build by evaluating a function at grid nodes
template <class F>
Field sample(int n, int comps, F&& fn) {
    std::vector<double> u(static_cast<std::size_t>(comps) * n * n * n);
    const double h = 2.0 * 3.14159265358979323846 / n;
    std::size_t np = static_cast<std::size_t>(n) * n * n;
    std::array<double, 9> val{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                std::array<double, 3> x{i * h, j * h, k * h};
                fn(x, val.data());
                std::size_t p = (static_cast<std::size_t>(i) * n + j) * n + k;
                for (int c = 0; c < comps; ++c) u[c * np + p] = val[c];
            }
    return from_physical(u, n, comps);
}

}  // namespace cid
