#include "doctest.h"

#include <cmath>

#include "cid/blocks.hpp"
#include "cid/ops.hpp"
#include "cid/timeseries.hpp"

using namespace cid;

namespace {

const Profiles& prof() {
    static Profiles p = make_profiles(1.0, 1);
    return p;
}

// plain trapezoid on a uniform grid, independent of the library quadrature
template <class F>
double trap(F&& f, double a, double b, int n = 200000) {
    double h = (b - a) / n, s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

// f(x + s) via Fourier phases
Field translate(const Field& f, const std::array<double, 3>& s) {
    Field g = f;
    for (int c = 0; c < f.comps(); ++c)
        for (int i = 0; i < f.n(); ++i)
            for (int j = 0; j < f.n(); ++j)
                for (int k = 0; k < f.nz(); ++k)
                    g.at(c, i, j, k) *= std::polar(1.0, f.wave(i) * s[0] + f.wave(j) * s[1] + k * s[2]);
    return g;
}

struct JetFixture {
    GeometrySet g = build_lambda();
    BlockParams bp = BlockParams::a1(16, 1.25, 0.05);
    JetFixture() { choose_shifts(g, bp.r_perp, bp.lambda); }
};

}  // namespace

TEST_CASE("bump derivatives match finite differences") {
    for (double x : {-0.7, -0.2, 0.0, 0.35, 0.8})
        for (int d = 0; d < 4; ++d) {
            double h = 1e-4;
            double fd = (bump(x - 2 * h, d) - 8 * bump(x - h, d) + 8 * bump(x + h, d) - bump(x + 2 * h, d)) / (12 * h);
            CHECK(bump(x, d + 1) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
        }
    CHECK(bump(1.0) == 0.0);
    CHECK(bump(-1.5, 2) == 0.0);
}

TEST_CASE("profile normalizations") {
    const auto& p = prof();
    double phi2 = trap([&](double r) { return p.phi(r) * p.phi(r) * r; }, 0, 1) * 2 * M_PI / (4 * M_PI * M_PI);
    CHECK(std::abs(phi2 - 1) <= 1e-8);
    double psi2 = trap([&](double x) { return p.psi(x) * p.psi(x); }, -1, 1) / (2 * M_PI);
    CHECK(std::abs(psi2 - 1) <= 1e-8);
    CHECK(std::abs(trap([&](double x) { return p.psi(x); }, -1, 1)) <= 1e-10);
    double g2 = trap([&](double t) { return p.g[0].value(t) * p.g[0].value(t); }, 0, 1);
    CHECK(std::abs(g2 - 1) <= 1e-8);
    CHECK(p.g[0].value(0.2) == 0.0);
    CHECK(p.g[0].value(0.8) == 0.0);
    // phi = -Lap Phi against a radial finite-difference Laplacian
    for (double r : {0.1, 0.4, 0.7}) {
        double h = 1e-4;
        double d2 = (p.Phi(r + h) - 2 * p.Phi(r) + p.Phi(r - h)) / (h * h);
        double d1 = (p.Phi(r + h) - p.Phi(r - h)) / (2 * h);
        CHECK(-(d2 + d1 / r) == doctest::Approx(p.phi(r)).epsilon(1e-6));
    }
    Profiles many = make_profiles(1.0, 7);
    for (std::size_t i = 0; i + 1 < many.g.size(); ++i) CHECK(many.g[i].t1 <= many.g[i + 1].t0);
    CHECK(many.g.front().t0 >= 0.25);
    CHECK(many.g.back().t1 <= 0.75 + 1e-15);
}

TEST_CASE("parameter exponents") {
    auto a = BlockParams::a1(16, 1.25, 0.05);
    CHECK(a.r_perp == doctest::Approx(std::pow(16, -0.9)));
    CHECK(a.r_par == doctest::Approx(std::pow(16, -0.8)));
    CHECK(a.mu == doctest::Approx(std::pow(16, 1.6)));
    CHECK(a.tau == doctest::Approx(std::pow(16, 0.55)));
    CHECK(a.tubes == 1);
    auto b = BlockParams::a2(16, 1.5, 0.05);
    CHECK(b.r_perp == doctest::Approx(std::pow(16, -0.9)));
    CHECK(b.tau == doctest::Approx(4096));
    CHECK_THROWS_AS(BlockParams::a1(16, 1.25, 0.0), Error);
}

TEST_CASE("jet identities at lambda 16, N 96") {
    JetFixture fx;
    BlockSet bs(fx.g, fx.bp, prof(), 96);
    CHECK(bs.max_wavenumber() <= bs.band());
    for (std::size_t k = 0; k < bs.size(); ++k)
        for (double t : {0.0, 0.37}) {
            Field W = bs.W(k, t), Wt = bs.Wtc(k, t), Wc = bs.Wc(k, t);
            Field cc = differentiate(differentiate(Wc, DiffOp::Curl), DiffOp::Curl);
            CHECK(rel_diff(cc, W + Wt) <= 1e-8);
            Field dv = differentiate(W + Wt, DiffOp::Div);
            CHECK(coef_norm(dv) <= 1e-8 * bs.max_wavenumber() * coef_norm(W));
            Field prod = times_constant_vector(mul(bs.psi(k, t), bs.phi(k)), bs.k1(k));
            CHECK(rel_diff(prod, W) <= 1e-12);
            CHECK(std::abs(lp_norm(W, 2) / std::pow(2 * M_PI, 1.5) - 1) <= 0.05);
        }
}

TEST_CASE("jet travels along k1") {
    JetFixture fx;
    BlockSet bs(fx.g, fx.bp, prof(), 48, 7);
    const double dt = 0.013;
    for (std::size_t k = 0; k < bs.size(); ++k) {
        auto e = bs.k1(k);
        std::array<double, 3> s{fx.bp.mu * dt * e[0], fx.bp.mu * dt * e[1], fx.bp.mu * dt * e[2]};
        CHECK(rel_diff(bs.psi(k, 0.2 + dt), translate(bs.psi(k, 0.2), s)) <= 1e-12);
        // analytic time derivative against a centered difference
        double h = 1e-6;
        Field fd = (1.0 / (2 * h)) * (bs.W(k, 0.2 + h) - bs.W(k, 0.2 - h));
        CHECK(rel_diff(fd, bs.W(k, 0.2, 1)) <= 1e-6);
    }
}

TEST_CASE("mikado identities") {
    GeometrySet g = build_lambda();
    auto bp = BlockParams::a2(16, 1.5, 0.05);
    choose_shifts(g, bp.r_perp, bp.lambda);
    BlockSet bs(g, bp, prof(), 96);
    for (std::size_t k = 0; k < bs.size(); ++k) {
        Field W = bs.W(k, 0.0);
        CHECK(rel_diff(W, bs.W(k, 0.71)) == 0.0);
        CHECK(coef_norm(differentiate(W, DiffOp::Div)) <= 1e-10 * bs.max_wavenumber() * coef_norm(W));
        Field ww = outer(W, W);
        CHECK(coef_norm(differentiate(ww, DiffOp::Div)) <= 1e-8 * bs.max_wavenumber() * coef_norm(ww));
        Field cc = differentiate(differentiate(bs.Wc(k, 0.0), DiffOp::Curl), DiffOp::Curl);
        CHECK(rel_diff(cc, W) <= 1e-8);
        CHECK(coef_norm(bs.Wtc(k, 0.0)) == 0.0);
        auto m = bs.mean_ww(k);
        for (int c = 0; c < 9; ++c) CHECK(std::abs(ww.mean(c).real() / 1.0 - m[c]) <= 1e-12);
    }
}

TEST_CASE("resolution errors") {
    GeometrySet g = build_lambda();
    auto bp = BlockParams::a1(16, 1.25, 0.05);
    CHECK_THROWS_AS(BlockSet(g, bp, prof(), 16), Error);
    try {
        BlockSet(g, bp, prof(), 16);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ResolutionError);
    }
    TemporalBlock tb{prof().g[0], bp.tau, bp.sigma};
    CHECK_THROWS_AS(temporal_blocks(tb, 50), Error);
}

TEST_CASE("temporal blocks") {
    for (auto bp : {BlockParams::a1(16, 1.25, 0.05), BlockParams::a1(32, 1.5, 0.05)}) {
        TemporalBlock tb{prof().g[0], bp.tau, bp.sigma};
        const int m = std::max(2001, tb.required_samples());
        auto s = temporal_blocks(tb, m);
        CHECK(s.h[0] == 0.0);
        double hmax = 0, mean = 0, d4 = 0;
        for (int j = 0; j < m; ++j) {
            hmax = std::max(hmax, std::abs(s.h[j]));
            mean += (j == 0 || j == m - 1 ? 0.5 : 1.0) * s.g[j] * s.g[j] / (m - 1);
            d4 = std::max(d4, std::abs(tb.g2(s.t[j], 4)));
        }
        CHECK(hmax <= 1.0);
        CHECK(std::abs(mean - 1) <= 1e-6);
        const double dt = 1.0 / (m - 1);
        std::vector<double> hs(s.h);
        for (auto& v : hs) v /= tb.sigma;
        auto dh = fd_derivative(hs, dt);
        double worst = 0;
        for (int j = 0; j < m; ++j) worst = std::max(worst, std::abs(dh[j] - (s.g[j] * s.g[j] - 1)));
        CHECK(worst <= 10 * std::pow(dt, 4) * d4);
    }
}

TEST_CASE("scaling slopes") {
    auto rows = verify_block_scaling(default_scaling_requests(), {8, 16, 32}, 1.25, 0.05, 1.5, 0.05);
    int ok = 0;
    for (const auto& r : rows) {
        CHECK_FALSE(r.skipped);
        if (!r.skipped && r.residual <= 0.15) ++ok;
    }
    CHECK(ok >= 6);
    CHECK(rows[0].residual <= 0.05);                                 // psi, p = 2: slope 0
    CHECK(rows[1].predicted == doctest::Approx(0.5 * (-1 + 0.2)));   // psi, p = 1
    CHECK(rows[1].residual <= 0.15);
    CHECK(rows[9].predicted == doctest::Approx(-(0.55) / 2));        // g, gamma = 1
    CHECK(rows[9].residual <= 0.15);
    auto csv = scaling_csv(rows);
    CHECK(csv.rfind("family,N,M,p_or_gamma,lambda_list,measured_slope,predicted_slope,residual", 0) == 0);
}
