#include "doctest.h"

#include <chrono>
#include <cmath>

#include "cid/gluing.hpp"
#include "cid/nsr.hpp"
#include "cid/ops.hpp"
#include "util.hpp"

using namespace cid;

namespace {

ModelParams lions() {
    ModelParams mp;
    mp.nu = 1;
    mp.alpha = 1.25;
    return mp;
}

Field shear(int n) {
    return sample(n, 3, [](const std::array<double, 3>& x, double* v) {
        v[0] = std::sin(x[1]);
        v[1] = v[2] = 0;
    });
}

}  // namespace

TEST_CASE("subdivision rule and overrides") {
    auto s = subdivide(2, 0.5, 0.6, 1, 0.25);
    CHECK(s.m == 4096);
    CHECK(s.m_rule == 4096);
    CHECK(s.theta == std::ldexp(1.0, -24));
    CHECK_FALSE(s.overridden);
    CHECK(2 * s.theta < 0.25);

    auto d = subdivide(2, 0.5, 0.6, 1, 0.25, 8, 1.0 / 64);
    CHECK(d.overridden);
    CHECK(d.m == 8);
    CHECK(d.theta == 1.0 / 64);
    CHECK(d.theta_rule == std::ldexp(1.0, -24));

    CHECK_THROWS_AS(subdivide(2, 0.5, 0.6, 1, 0.25, 8, 0.2), Error);   // 2 theta >= theta_q
    CHECK_THROWS_AS(subdivide(2, 0.25, 0.6, 1, 0.25), Error);          // eta outside (eta_*/2, eta_*)
    CHECK_THROWS_AS(subdivide(2, 0.6, 0.6, 1, 0.25), Error);
}

TEST_CASE("partition of unity") {
    PartitionOfUnity p(1, 8, 1.0 / 64);
    CHECK(p.sum_deviation(20001) <= 1e-12);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j <= 4000; ++j) {
            double t = j / 4000.0, c = p.chi(i, t);
            CHECK(c >= 0);
            CHECK(c <= 1);
            double ti = i / 8.0, tn = (i + 1) / 8.0;
            if (t >= ti + 1.0 / 64 && t <= tn) CHECK(c == 1);
            if (i > 0 && t <= ti) CHECK(c == 0);
            if (i < 7 && t >= tn + 1.0 / 64) CHECK(c == 0);
        }
    CHECK(p.chi(0, 0) == 1);
    CHECK(p.chi(7, 1) == 1);
    // derivative against a centered difference
    double t = 3.0 / 8 + 0.3 / 64, h = 1e-6;
    CHECK(p.chi(3, t, 1) == doctest::Approx((p.chi(3, t + h) - p.chi(3, t - h)) / (2 * h)).epsilon(1e-6));
    auto k = p.derivative_constants();
    REQUIRE(k.size() == 3);
    CHECK(k[0] > 1);
    CHECK(k[0] < k[1]);
}

TEST_CASE("local solve: zero data and the shear mode") {
    ModelParams mp = lions();
    auto z = local_solve(Field(16, 3), 0, 0.1, mp, 1e-3, 10);
    for (const auto& v : z.v) CHECK(coef_norm(v) == 0);

    Field v0 = shear(16);
    auto s = local_solve(v0, 0, 1, mp, 1e-3, 100);
    double err = 0;
    for (int j = 0; j < static_cast<int>(s.v.size()); ++j) {
        Field exact = std::exp(-mp.nu * s.time(j)) * v0;
        err = std::max(err, max_abs(s.v[j] - exact));
    }
    CHECK(err <= 1e-8);

    Field bad = testutil::random_field(16, 3, 2, 4);
    CHECK_THROWS_AS(local_solve(bad, 0, 0.1, mp, 1e-3), Error);
    CHECK_THROWS_AS(local_solve(v0, 0, 0.1, mp, 0.03), Error);
}

TEST_CASE("blow-up guard fires on rapid H3 growth") {
    // negative viscosity makes the linear part anti-dissipative, a controlled stand-in for blow-up
    std::mt19937_64 rng(3);
    Field v0 = random_solenoidal(16, 5, rng);
    v0 *= 0.05;
    ModelParams mp = lions();
    mp.nu = -1;
    try {
        local_solve(v0, 0, 0.5, mp, 1e-3);
        FAIL("expected the guard to fire");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ToleranceBreach);
    }
}

TEST_CASE("energy inequality on random small data") {
    auto rep = energy_inequality(16, lions(), 20, 0.2, 2e-3, 101);
    INFO(rep.to_json().dump());
    CHECK(rep.pass);
    CHECK(rep.worst_excess <= 1e-9);
}

TEST_CASE("initial stress examples") {
    ModelParams mp = lions();
    const int n = 16;
    Field u = shear(n);
    // exact decaying shear: the defect is a pure gradient, so the projected divergence vanishes
    Field ut = -mp.nu * u;
    Field R = initial_stress(u, ut, mp);
    CHECK(parseval_l2(projected_div(R)) <= 1e-12);
    CHECK(parseval_l2(nsr_residual(u, ut, R, mp)) <= 1e-12);

    // frozen shear: R(nu (-Lap)^alpha u) has entries 12 = 21 = -nu cos x2; plus u (x)o u
    Field R0 = initial_stress(u, Field(n, 3), mp);
    Field hand = sample(n, 9, [&](const std::array<double, 3>& x, double* v) {
        double s = std::sin(x[1]), c = std::cos(x[1]);
        for (int i = 0; i < 9; ++i) v[i] = 0;
        v[1] = v[3] = -mp.nu * c;
        v[0] = s * s * 2.0 / 3;
        v[4] = v[8] = -s * s / 3;
    });
    CHECK(rel_diff(R0, hand) <= 1e-13);

    // random smooth u: residual of the relaxed system
    std::mt19937_64 rng(8);
    Field a = random_solenoidal(n, 3, rng), b = random_solenoidal(n, 3, rng);
    Field Rr = initial_stress(a, b, mp);
    CHECK(parseval_l2(nsr_residual(a, b, Rr, mp)) <= 1e-6 * parseval_l2(b));
}

TEST_CASE("gluing a synthetic state with two bad intervals") {
    ModelParams mp = lions();
    const double theta_q = 1.0 / 8, theta = 1.0 / 512;
    const int m = 64, M = 1025;
    std::vector<Interval> I{{0.05, 0.45}, {0.55, 0.95}};
    auto t0 = std::chrono::steady_clock::now();
    IterationState s = synthetic_state(12, M, 1, mp, I, theta_q, 0.05, 21, 1);
    // well prepared at level q
    for (int j = 0; j < M; ++j)
        if (dist_to_complement(s.u.time(j), s.bad) <= theta_q) CHECK(coef_norm(s.R.samples[j]) == 0);

    PartitionOfUnity pou(1, m, theta);
    GlueResult g = glue(s, pou, mp, 1);
    INFO(g.to_json().dump());
    CHECK(g.support_ok);
    CHECK(g.well_prepared);
    CHECK(g.nested);
    CHECK(g.pou_deviation <= 1e-12);
    CHECK(g.divergence <= 1e-8);
    CHECK(g.mean <= 1e-8);
    // c x + (1 - c) x rounds at the last bit
    CHECK(g.agreement <= 1e-14);
    CHECK(g.agreement_samples > 0);
    CHECK(!g.bad_indices.empty());
    CHECK(g.state.bad.size() == g.bad_indices.size());
    for (const auto& iv : g.state.bad) CHECK(iv[1] - iv[0] == doctest::Approx(5 * theta));
    // the glued stress is non-trivial near the bad breakpoints
    double rmax = 0;
    for (const auto& r : g.state.R.samples) rmax = std::max(rmax, coef_norm(r));
    CHECK(rmax > 0);
    MESSAGE("glue time " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s");
}

TEST_CASE("stability ratios are amplitude independent") {
    auto rep = verify_stability(16, lions(), {0.01, 0.02, 0.04}, {1.25, 1.5, 2.0}, 0.25, 2.5e-3, 5);
    INFO(rep.to_json().dump());
    CHECK(rep.pass);
    for (const auto& r : rep.rows) {
        CHECK(r.ratio > 0);
        CHECK(r.ratio_R > 0);
    }
    // no stress, no deviation
    auto zero = verify_stability(16, lions(), {0.0, 0.0}, {2.0}, 0.05, 2.5e-3, 5);
    for (const auto& r : zero.rows) CHECK(r.w_sup == 0);
}

TEST_CASE("cover report") {
    auto one = cover_report({{0.01, {{0.1, 0.15}, {0.3, 0.35}, {0.6, 0.65}}}}, 0.5, 0.6);
    CHECK(one["levels"][0]["count"] == 3);
    CHECK(one["levels"][0]["within_bound"] == true);
    auto empty = cover_report({{0.01, {}}}, 0.5, 0.6);
    CHECK(empty["dimension_bound"] == 0.0);
    auto two = cover_report({{1.0 / 8, {{0.05, 0.45}, {0.55, 0.95}}}, {1.0 / 512, {{0.2, 0.21}, {0.7, 0.71}}}}, 0.5, 0.6);
    CHECK(two["decreasing"] == true);
}
