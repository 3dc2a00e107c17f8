#include "doctest.h"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdio>
#include <random>

#include "cid/fit.hpp"
#include "cid/harness.hpp"
#include "util.hpp"

using namespace cid;

namespace {

double sine1(const std::array<double, 3>& x) { return std::sin(x[0]); }
double trig_f(const std::array<double, 3>& x) { return 1 + 0.5 * std::sin(x[0]); }

}  // namespace

TEST_CASE("log-log fit on exact and noisy power data") {
    std::vector<double> x{1, 2, 4, 8, 16}, y2, yh;
    for (double v : x) {
        y2.push_back(v * v);
        yh.push_back(3 / std::sqrt(v));
    }
    CHECK(std::abs(fit_loglog_slope(x, y2).slope - 2) <= 1e-10);
    CHECK(std::abs(fit_loglog_slope(x, yh).slope + 0.5) <= 1e-12);
    CHECK(fit_loglog_slope(x, y2).r2 == doctest::Approx(1));

    // seeded log-normal noise: the true slope lies in the 95% interval of the fit
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd(0, 0.05);
    std::vector<double> xs, ys;
    for (int i = 0; i < 8; ++i) {
        xs.push_back(std::pow(2.0, i));
        ys.push_back(std::pow(xs.back(), 1.5) * std::exp(nd(rng)));
    }
    auto f = fit_loglog_slope(xs, ys);
    boost::math::students_t t(xs.size() - 2);
    const double half = boost::math::quantile(boost::math::complement(t, 0.025)) * f.slope_stderr;
    CHECK(f.slope_stderr > 0);
    CHECK(std::abs(f.slope - 1.5) <= half);

    CHECK_THROWS_AS(fit_loglog_slope({1, 2}, {1, 2}), Error);
    try {
        fit_loglog_slope({1, 2, 4}, {1, 0, 2});
        FAIL("expected invalid-parameter");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidParameter);
    }
}

TEST_CASE("decorrelation: constant f and trigonometric data") {
    auto c = [](const std::array<double, 3>&) { return 1.5; };
    for (int s : {1, 3, 4, 7, 16}) CHECK(decorrelation_lhs(c, sine1, 1, 2, s, 64) <= 1e-14);

    // |f|^p has modes <= p while |g(sigma .)|^p - mean sits on multiples of 2 sigma, so the pairing vanishes
    for (double p : {2.0, 4.0})
        for (int s : {4, 8, 16, 32}) CHECK(decorrelation_lhs(trig_f, sine1, 1, p, s, 64) <= 1e-13);
    // below that threshold the error is visible: sigma = 1, p = 2 gives |sqrt(mean f^2 sin^2) - sqrt(mean f^2 / 2)|
    // mean f^2 sin^2 = 1/2 + 3/32, |f|_2 |g|_2 = sqrt(9/8) sqrt(1/2)
    const double exact = std::abs(std::sqrt(19.0 / 32) - 0.75);
    CHECK(decorrelation_lhs(trig_f, sine1, 1, 2, 1, 64) == doctest::Approx(exact).epsilon(1e-12));

    auto r = decorrelation_test(trig_f, sine1, 1, {4, 8, 16, 32}, 2, 64);
    CHECK_FALSE(r.fitted);
    CHECK_FALSE(r.pass);
    CHECK(r.one_sided);

    CHECK_THROWS_AS(decorrelation_test(trig_f, sine1, 1, {4, 8.5, 17}, 2, 64), Error);
    CHECK_THROWS_AS(decorrelation_test(trig_f, sine1, 1, {4, 8}, 2, 64), Error);
}

TEST_CASE("decorrelation: finite-smoothness f decays faster than the bound") {
    auto rough = [](const std::array<double, 3>& x) {
        double s = std::sin(x[0]);
        return 1 + 0.5 * std::copysign(std::pow(std::abs(s), 1.5), s);
    };
    for (double p : {2.0, 4.0}) {
        auto r = decorrelation_test(rough, sine1, 1, {4, 8, 16, 32}, p, 64);
        REQUIRE(r.fitted);
        CHECK(r.one_sided);
        CHECK(r.measured < -1 / p - 1);
        for (std::size_t i = 1; i < r.ratio.size(); ++i) CHECK(r.ratio[i] < r.ratio[i - 1]);
    }
}

TEST_CASE("stationary phase on a high-mode packet") {
    // a = 1: the closed form of | |grad|^{-1} f |_2 for f = cos(m x1)(1 + cos(x2)/2)
    auto one = [](const std::array<double, 3>&) { return 1.0; };
    for (double kappa : {8.0, 16.0}) {
        Field f = packet(kappa);
        const double m = std::lround(1.5 * kappa);
        const double oracle = std::pow(2 * M_PI, 1.5) * std::sqrt(1 / (2 * m * m) + 1 / (16 * (m * m + 1)));
        CHECK(stationary_phase_lhs(one, f, kappa, 2) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(stationary_phase_lhs(trig_f, Field(f.n(), 1), kappa, 2) == 0);
    }
    for (double p : {2.0, 4.0}) {
        auto r = stationary_phase_test(trig_f, packet, {8, 16, 32, 64}, p);
        INFO(r.to_json().dump());
        CHECK(r.pass);
        CHECK(std::abs(r.measured + 1) <= 0.2);
        for (double q : r.ratio) CHECK(q < 2);
    }
    auto c = stationary_phase_test(one, packet, {8, 16, 32}, 2);
    CHECK(c.measured <= -1 + 0.2);
    CHECK(sup_hessian(one, 16) == 0);
    CHECK(sup_hessian(trig_f, 16) == doctest::Approx(0.5).epsilon(1e-12));

    auto low = [](double) { return sample(16, 1, [](const std::array<double, 3>& x, double* v) { v[0] = std::cos(x[0]); }); };
    try {
        stationary_phase_test(trig_f, low, {8, 16, 32}, 2);
        FAIL("expected degenerate input");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateInput);
    }
}

TEST_CASE("presets and the short-circuiting pipeline") {
    CHECK(certify(preset("A1").e).pass);
    CHECK(certify(preset("A2").e).pass);
    CHECK_FALSE(certify(preset("fail").e).pass);
    CHECK_THROWS_AS(preset("B"), Error);
    PipelineConfig c;
    c.preset = "fail";
    auto r = run_pipeline(c);
    CHECK(r.exit_code == 1);
    REQUIRE(r.report["stages"].size() == 5);
    CHECK(r.report["stages"][0]["status"] == "fail");
    for (int i = 1; i < 5; ++i) CHECK(r.report["stages"][i]["status"] == "skipped");
    CHECK(run_pipeline(c).report.dump() == r.report.dump());
}

TEST_CASE("mikado and temporal identities through the harness") {
    auto r = block_identities(Regime::A2, 16, 1.5, 0.02, 96, 2001, 7);
    INFO(r.to_json().dump());
    CHECK(r.pass);
    CHECK(r.checks.size() == 5);
    CHECK(r.h_sup <= 1);
}

TEST_CASE("state files, resampling and the bad set") {
    TimeSeries u, R;
    for (int j = 0; j < 9; ++j) {
        u.samples.push_back(testutil::random_field(8, 3, 2, 100 + j));
        R.samples.push_back(j >= 3 && j <= 4 ? testutil::random_field(8, 9, 2, 200 + j) : Field(8, 9));
    }
    const std::string path = "state_roundtrip.bin";
    write_state(path, u, R);
    auto [u2, R2] = read_state(path);
    REQUIRE(R2.has_value());
    CHECK(u2.m() == 9);
    for (int j = 0; j < 9; ++j) {
        CHECK(rel_diff(u.samples[j], u2.samples[j]) == 0);
        CHECK(coef_norm(R.samples[j] - R2->samples[j]) == 0);
    }
    write_state(path, u, std::nullopt);
    CHECK_FALSE(read_state(path).second.has_value());
    std::remove(path.c_str());

    Field f = testutil::random_field(8, 3, 3, 5);
    Field up = resample(f, 20);
    CHECK(rel_diff(resample(up, 8), f) == 0);
    CHECK(std::abs(lp_norm(up, 2) - lp_norm(f, 2)) <= 1e-12 * lp_norm(f, 2));

    // nonzero stress at samples 3, 4 (t = 3/8, 1/2) widened by theta_q = 1/16
    auto bad = bad_set_from_stress(R, 1.0 / 16);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0][0] == doctest::Approx(3.0 / 8 - 1.0 / 16));
    CHECK(bad[0][1] == doctest::Approx(0.5 + 1.0 / 16));
}
