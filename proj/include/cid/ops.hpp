#pragma once

#include <limits>

#include "cid/field.hpp"

namespace cid {

enum class DiffOp { Grad, Div, Curl, Laplacian };
enum class FreqMode { NonZero, AtLeast };
enum class MollifyAxes { Space, Time, Both };

constexpr double kInf = std::numeric_limits<double>::infinity();

// p in [1, inf]; pointwise Euclidean (vector) or Frobenius (tensor) magnitude
double lp_norm(const Field& f, double p);
// mean-square identity (2pi)^3 sum |fhat|^2 for L2
double parseval_l2(const Field& f);

Field differentiate(const Field& f, DiffOp op);
Field fractional_laplacian(const Field& f, double alpha, double nu);
Field leray_project(const Field& v);
Field inverse_divergence(const Field& v);
Field freq_project(const Field& f, FreqMode mode, double kappa = 0.0);
Field semigroup_apply(const Field& f, double t, const ModelParams& mp);
// spatial mollification at scale ell; the multiplier is the transform of a normalized radial bump
Field mollify(const Field& f, double ell);
// |grad|^s multiplier, zero mode sent to 0 (s may be negative)
Field abs_grad_power(const Field& f, double s);

// 2/3-rule truncation; `band` overrides the cutoff (keep |xi_i| <= band)
Field dealias(Field f, int band = -1);

// pointwise products, dealiased unless raw = true
Field mul(const Field& a, const Field& b, bool raw = false);     // scalar * (scalar|vector|tensor)
Field outer(const Field& a, const Field& b, bool raw = false);   // vector (x) vector -> tensor
Field cross(const Field& a, const Field& b, bool raw = false);
Field dot(const Field& a, const Field& b, bool raw = false);
// symmetric trace-free part a (x)o b = a(x)b - (a.b)/3 Id
Field outer_tf(const Field& a, const Field& b, bool raw = false);
// pointwise nonlinear map of a scalar, no dealiasing applied
template <class F>
Field pointwise(const Field& a, F&& fn) {
    auto u = to_physical(a);
    for (auto& v : u) v = fn(v);
    return from_physical(u, a.n(), a.comps());
}

Field constant_field(int n, int comps, const std::vector<double>& value);
Field times_constant_vector(const Field& s, const std::array<double, 3>& v);
Field times_constant_tensor(const Field& s, const std::array<double, 9>& m);
Field tensor_trace(const Field& t);
Field transpose(const Field& t);

// max |T - T^T| and max |tr T| on the grid
double max_asymmetry(const Field& t);
double max_trace(const Field& t);
double max_abs(const Field& f);
// relative coefficient-space residual |a - b|_2 / max(|a|_2, |b|_2, tiny)
double rel_diff(const Field& a, const Field& b);
double coef_norm(const Field& f);
// the same trigonometric polynomial on an n^3 grid: zero padding, or truncation to |xi_i| < n/2
Field resample(const Field& f, int n);

}  // namespace cid
