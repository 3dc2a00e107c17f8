#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "cid/ops.hpp"
#include "cid/timeseries.hpp"
#include "util.hpp"

using namespace cid;

namespace {
const double PI = M_PI;
Field scalar(int n, double (*fn)(double, double, double)) {
    return sample(n, 1, [&](const std::array<double, 3>& x, double* v) { v[0] = fn(x[0], x[1], x[2]); });
}
}  // namespace

TEST_CASE("lp norms of constants and single modes") {
    Field one = constant_field(16, 1, {1.0});
    for (double p : {1.0, 1.5, 2.0, 4.0})
        CHECK(lp_norm(one, p) == doctest::Approx(std::pow(2 * PI, 3.0 / p)).epsilon(1e-13));
    CHECK(lp_norm(one, kInf) == doctest::Approx(1.0));
    Field s = scalar(16, [](double x, double, double) { return std::sin(x); });
    CHECK(lp_norm(s, 2.0) == doctest::Approx(2 * std::pow(PI, 1.5)).epsilon(1e-13));
    CHECK_THROWS_AS(lp_norm(s, 0.5), Error);
}

TEST_CASE("parseval on random band-limited fields") {
    for (unsigned long seed = 1; seed <= 5; ++seed) {
        Field f = testutil::random_field(16, 3, 5, seed, false);
        double a = lp_norm(f, 2.0), b = parseval_l2(f);
        CHECK(std::abs(a * a - b * b) <= 1e-10 * a * a);
    }
}

TEST_CASE("differentiation oracles") {
    const int n = 16;
    Field c = constant_field(n, 1, {3.0});
    CHECK(coef_norm(differentiate(c, DiffOp::Grad)) == 0.0);
    Field v = sample(n, 3, [](const std::array<double, 3>& x, double* o) { o[0] = std::sin(x[1]); o[1] = 0; o[2] = 0; });
    Field w = differentiate(v, DiffOp::Curl);
    Field expect = sample(n, 3, [](const std::array<double, 3>& x, double* o) { o[0] = 0; o[1] = 0; o[2] = -std::cos(x[1]); });
    CHECK(rel_diff(w, expect) < 1e-14);
    Field e = scalar(n, [](double x, double, double) { return std::cos(x); });
    CHECK(rel_diff(differentiate(e, DiffOp::Laplacian), -1.0 * e) < 1e-14);
    Field r = testutil::random_field(n, 3, 5, 7);
    Field dc = differentiate(differentiate(r, DiffOp::Curl), DiffOp::Div);
    CHECK(coef_norm(dc) <= 1e-13 * coef_norm(r));
    CHECK_THROWS_AS(differentiate(e, DiffOp::Div), Error);
    CHECK_THROWS_AS(differentiate(e, DiffOp::Curl), Error);
}

TEST_CASE("fractional laplacian multiplier") {
    const int n = 16;
    CHECK(coef_norm(fractional_laplacian(constant_field(n, 1, {1.0}), 1.25, 1.0)) == 0.0);
    Field e1 = scalar(n, [](double x, double, double) { return std::cos(x); });
    CHECK(rel_diff(fractional_laplacian(e1, 1.25, 1.0), e1) < 1e-14);
    Field e2 = scalar(n, [](double x, double y, double) { return std::cos(x + y); });
    CHECK(rel_diff(fractional_laplacian(e2, 1.25, 1.0), std::pow(2.0, 1.25) * e2) < 1e-13);
}

TEST_CASE("leray projection") {
    const int n = 16;
    Field g = sample(n, 3, [](const std::array<double, 3>& x, double* o) { o[0] = std::sin(x[0]); o[1] = 0; o[2] = 0; });
    CHECK(coef_norm(leray_project(g)) < 1e-14);
    Field psi = testutil::random_field(n, 1, 5, 3);
    Field grad = differentiate(psi, DiffOp::Grad) + constant_field(n, 3, {0.5, -1.0, 2.0});
    CHECK(rel_diff(leray_project(grad), constant_field(n, 3, {0.5, -1.0, 2.0})) < 1e-13);
    Field df = differentiate(testutil::random_field(n, 3, 5, 4), DiffOp::Curl);
    CHECK(rel_diff(leray_project(df), df) < 1e-13);
}

TEST_CASE("inverse divergence closed form and properties") {
    const int n = 16;
    Field v = sample(n, 3, [](const std::array<double, 3>& x, double* o) { o[0] = 0; o[1] = std::cos(x[0]); o[2] = 0; });
    Field r = inverse_divergence(v);
    // hand-evaluated multipliers at xi = (1,0,0): R^{12} = R^{21} = sin x1, all else 0
    Field s = scalar(n, [](double x, double, double) { return std::sin(x); });
    for (int c = 0; c < 9; ++c) {
        if (c == 1 || c == 3) CHECK(rel_diff(r.component(c), s) < 1e-14);
        else CHECK(coef_norm(r.component(c)) < 1e-14);
    }
    CHECK(coef_norm(inverse_divergence(Field(n, 3))) == 0.0);
    Field rv = testutil::random_field(n, 3, 5, 11);
    Field rr = inverse_divergence(rv);
    CHECK(rel_diff(differentiate(rr, DiffOp::Div), rv) < 1e-12);
    CHECK(max_asymmetry(rr) < 1e-12 * max_abs(rr));
    CHECK(max_trace(rr) < 1e-12 * max_abs(rr));
    CHECK_THROWS_AS(inverse_divergence(rv + constant_field(n, 3, {1.0, 0.0, 0.0})), Error);
}

TEST_CASE("frequency projection") {
    const int n = 16;
    Field f = scalar(n, [](double x, double y, double) { return std::sin(x) + std::sin(2 * y); });
    Field g = scalar(n, [](double, double y, double) { return std::sin(2 * y); });
    CHECK(rel_diff(freq_project(f, FreqMode::AtLeast, 2.0), g) < 1e-14);
    CHECK(coef_norm(freq_project(constant_field(n, 1, {2.0}), FreqMode::NonZero)) == 0.0);
    Field r = testutil::random_field(n, 1, 5, 2, false);
    Field p1 = freq_project(r, FreqMode::NonZero);
    CHECK(rel_diff(freq_project(p1, FreqMode::NonZero), p1) == 0.0);
}

TEST_CASE("semigroup") {
    const int n = 16;
    ModelParams mp{0.7, 1.25};
    Field e = scalar(n, [](double x, double, double) { return std::cos(x); });
    CHECK(rel_diff(semigroup_apply(e, 0.0, mp), e) == 0.0);
    CHECK(rel_diff(semigroup_apply(e, 0.3, mp), std::exp(-0.3 * 0.7) * e) < 1e-14);
    CHECK_THROWS_AS(semigroup_apply(e, -1.0, mp), Error);
}

TEST_CASE("mollifier") {
    const int n = 16;
    Field c = constant_field(n, 1, {2.5});
    CHECK(rel_diff(mollify(c, 0.5), c) == 0.0);
    Field f = testutil::random_field(n, 1, 3, 5);
    CHECK(rel_diff(mollify(f, 1e-4), f) < 1e-6);
    CHECK_THROWS_AS(mollify(f, 0.0), Error);
}

TEST_CASE("time differences and snapshots") {
    std::vector<double> y(41), t(41);
    double h = 1.0 / 40;
    for (int j = 0; j < 41; ++j) { t[j] = j * h; y[j] = std::sin(3 * t[j]); }
    auto d = fd_derivative(y, h);
    double err = 0;
    for (int j = 0; j < 41; ++j) err = std::max(err, std::abs(d[j] - 3 * std::cos(3 * t[j])));
    CHECK(err < 1e-4);

    TimeSeries s{2.0, {}};
    for (int j = 0; j < 3; ++j) s.samples.push_back(testutil::random_field(8, 3, 2, 20 + j));
    const char* path = "snapshot_test.bin";
    write_snapshot(path, s);
    TimeSeries r = read_snapshot(path);
    CHECK(r.m() == 3);
    CHECK(r.t_final == 2.0);
    for (int j = 0; j < 3; ++j) CHECK(rel_diff(r.samples[j], s.samples[j]) == 0.0);
    std::remove(path);
}
