#include "doctest.h"

#include <cmath>

#include "cid/nsr.hpp"
#include "cid/perturbation.hpp"
#include "util.hpp"

using namespace cid;

namespace {

const GeometrySet& geom() {
    static GeometrySet g = build_lambda();
    return g;
}

ModelParams model(Regime r) {
    ModelParams mp;
    mp.alpha = r == Regime::A1 ? 1.25 : 1.5;
    return mp;
}

PerturbationParams params(Regime r, double lambda) {
    PerturbationParams p;
    p.regime = r;
    p.lambda = lambda;
    p.alpha = model(r).alpha;
    p.eps = r == Regime::A1 ? 0.032 : 0.02;
    return p;
}

// zero velocity with a prescribed (spatially varying) stress
class StressOnly : public Background {
public:
    StressOnly(Field R) : R_(std::move(R)) {}
    int n() const override { return R_.n(); }
    Field u(double) const override { return Field(R_.n(), 3); }
    Field u_t(double) const override { return Field(R_.n(), 3); }
    Field stress(double) const override { return R_; }
    int band() const override { return 1; }

private:
    Field R_;
};

Field random_stress(int n, double scale, unsigned long seed) {
    Field v = testutil::random_field(n, 3, 2, seed);
    Field R = inverse_divergence(v);
    R *= scale / max_abs(R);
    return R;
}

double max_component(const std::vector<double>& u, std::size_t np, std::size_t q, int comps) {
    double s = 0;
    for (int c = 0; c < comps; ++c) s += u[c * np + q] * u[c * np + q];
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("chi cutoff branches and bounds") {
    CHECK(chi_cutoff(0) == 1);
    CHECK(chi_cutoff(1) == 1);
    CHECK(chi_cutoff(2) == 2);
    CHECK(chi_cutoff(7.5) == 7.5);
    double prev = 1;
    for (int i = 1; i < 200; ++i) {
        double z = 1 + i / 200.0, c = chi_cutoff(z);
        CHECK(c >= z / 2);
        CHECK(c <= 2 * z);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK_THROWS_AS(chi_cutoff(-1), Error);
    CHECK(smooth_step(-0.1) == 0);
    CHECK(smooth_step(1.2) == 1);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("time cutoff is one on the stress support and vanishes past half theta") {
    const double th = 1.0 / 16;
    TimeCutoff f({{0.5, 0.6}, {0.2, 0.3}, {0.31, 0.35}}, th);
    // the gap 0.30..0.31 is below theta and gets merged
    CHECK(f.support().size() == 2);
    for (int i = 0; i <= 1000; ++i) {
        double t = i / 1000.0, v = f(t);
        CHECK(v >= 0);
        CHECK(v <= 1);
        bool inside = (t >= 0.2 && t <= 0.35) || (t >= 0.5 && t <= 0.6);
        if (inside) CHECK(v == 1);
        double d = std::min({std::abs(t - 0.2), std::abs(t - 0.35), std::abs(t - 0.5), std::abs(t - 0.6)});
        if (!inside && d > th / 2) CHECK(v == 0);
    }
    CHECK(TimeCutoff()(0.123) == 1);
}

TEST_CASE("effective band of a band-limited field") {
    Field f = testutil::random_field(32, 3, 5, 11);
    CHECK(effective_band(f) == 5);
    CHECK(effective_band(Field(32, 1)) == 0);
}

TEST_CASE("rho: floor on zero stress, domain bound, linear branch") {
    const int n = 64;
    StressOnly bg(Field(n, 9));
    Perturbation P(geom(), bg, params(Regime::A1, 16));
    const double c = std::pow(2.0, -P.params().eps_r / 4);
    CHECK(P.rho_floor() == doctest::Approx(2 / geom().eps_u * c).epsilon(1e-15));

    auto rho0 = to_physical(P.build_rho(Field(n, 9)));
    for (double r : rho0) CHECK(r == doctest::Approx(P.rho_floor()).epsilon(1e-13));

    // |R| is constant in space for R = r (cos x1 A + sin x1 B) with A, B orthonormal and trace free,
    // so rho is a constant and its grid values are exact
    const double h = 1 / std::sqrt(2.0);
    for (double z : {0.5, 1.5, 3.0}) {
        Field R = sample(n, 9, [&](const std::array<double, 3>& x, double* v) {
            for (int i = 0; i < 9; ++i) v[i] = 0;
            v[0] = z * c * h * std::cos(x[0]);
            v[4] = -v[0];
            v[1] = v[3] = z * c * h * std::sin(x[0]);
        });
        auto rho = to_physical(P.build_rho(R));
        const double expect = 2 / geom().eps_u * c * chi_cutoff(z);
        for (double r : rho) {
            CHECK(r == doctest::Approx(expect).epsilon(1e-12));
            CHECK(z * c / r <= geom().eps_u * (1 + 1e-12));
        }
        if (z >= 2) CHECK(rho[0] == doctest::Approx(2 / geom().eps_u * z * c).epsilon(1e-12));
    }

    // random stress: the bound |R/rho| <= eps_u, up to the truncation of the non-polynomial rho
    Field R = random_stress(n, 5 * c, 3);
    auto r = to_physical(R);
    auto rho = to_physical(P.build_rho(R));
    const std::size_t np = rho.size();
    double worst = 0;
    for (std::size_t q = 0; q < np; ++q) worst = std::max(worst, max_component(r, np, q, 9) / rho[q]);
    CHECK(worst <= geom().eps_u * (1 + 1e-3));
    CHECK(worst >= geom().eps_u / 2 * (1 - 1e-3));
}

TEST_CASE("amplitudes: constant at zero stress, zero where f vanishes") {
    const int n = 64;
    StressOnly bg(Field(n, 9));
    Perturbation P(geom(), bg, params(Regime::A1, 16));
    auto A = P.amplitudes(0.4);
    Mat3 id{1, 0, 0, 0, 1, 0, 0, 0, 1};
    auto g2 = gamma2(id, geom());
    for (std::size_t k = 0; k < geom().size(); ++k) {
        double expect = std::sqrt(P.rho_floor() * g2[k]);
        for (double a : to_physical(A.a[k])) CHECK(a == doctest::Approx(expect).epsilon(1e-12));
    }

    ModelParams mp = model(Regime::A1);
    SyntheticBackground win(64, 0.01, mp, 5, 1, Interval{0.55, 0.75});
    Perturbation Q(geom(), win, params(Regime::A1, 16));
    CHECK(Q.cutoff()(0.2) == 0);
    auto B = Q.amplitudes(0.2);
    for (const auto& a : B.a) CHECK(coef_norm(a) == 0);
    auto pieces = Q.assemble(0.2);
    CHECK(coef_norm(pieces.total()) == 0);
    auto R = Q.reynolds(0.2).total();
    CHECK(coef_norm(R) == 0);
}

TEST_CASE("geometric-domain violation is reported with its location") {
    const int n = 16;
    GeometrySet g = geom();
    g.eps_u = 3.9;  // Id - R/rho then has a negative eigenvalue, so some weight must be negative
    Field R(n, 9);
    const double s = 10 / std::sqrt(6.0);
    for (int i = 0; i < 3; ++i) R.at(4 * i, 0, 0, 0) = (i == 0 ? 2 : -1) * s;
    StressOnly bg(R);
    try {
        Perturbation P(g, bg, params(Regime::A2, 8));
        FAIL("expected an out-of-domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutOfDomain);
        CHECK(std::string(e.what()).find("x = (") != std::string::npos);
    }
}

TEST_CASE("time nodes integrate the temporal profiles") {
    ModelParams mp = model(Regime::A2);
    SyntheticBackground bg(64, 0.01, mp, 3, 1);
    Perturbation P(geom(), bg, params(Regime::A2, 16));
    CHECK(P.temporal_overlap() == 0);
    auto nodes = P.time_nodes(4);
    double one = 0;
    std::vector<double> sq(P.temporal().size(), 0.0);
    for (auto [t, w] : nodes) {
        one += w;
        for (std::size_t k = 0; k < sq.size(); ++k) sq[k] += w * P.temporal()[k].g2(t);
    }
    CHECK(one == doctest::Approx(1).epsilon(1e-13));
    for (double s : sq) CHECK(s == doctest::Approx(1).epsilon(1e-6));
}

TEST_CASE("perturbation identities, A1 at lambda 16") {
    const Regime r = Regime::A1;
    ModelParams mp = model(r);
    SyntheticBackground bg(64, 0.01, mp, 3, 1);
    Perturbation P(geom(), bg, params(r, 16));
    CHECK(P.bands().highest <= P.bands().limit);
    auto times = P.check_times(1);
    std::vector<double> ts{times[1], times.back()};

    std::vector<Perturbation::Sides> canc, curl, tmp, osc, inv, e2e;
    for (double t : ts) {
        canc.push_back(P.cancellation(t));
        curl.push_back(P.curl_form(t));
        tmp.push_back(P.temporal_corrector_identity(t));
        osc.push_back(P.oscillation_corrector_identity(t));
        auto R = P.reynolds(t);
        Field Rt = R.total();
        CHECK(max_asymmetry(Rt) <= 1e-12 * max_abs(Rt));
        CHECK(max_trace(Rt) <= 1e-12 * max_abs(Rt));
        inv.push_back(P.reynolds_identity(Rt));
        e2e.push_back(P.end_to_end(t));

        Field w = P.total(t);
        for (int c = 0; c < 3; ++c) CHECK(std::abs(w.mean(c)) <= 1e-14 * coef_norm(w));
        CHECK(parseval_l2(differentiate(w, DiffOp::Div)) <= 1e-8 * parseval_l2(differentiate(w, DiffOp::Grad)));
    }
    auto c1 = check_sides("cancellation", 1e-6, canc);
    auto c2 = check_sides("curl-form", 1e-8, curl);
    auto c3 = check_sides("temporal-corrector", 1e-4, tmp);
    auto c4 = check_sides("oscillation-corrector", 1e-4, osc);
    auto c5 = check_sides("inverse-divergence", 1e-6, inv);
    auto c6 = check_sides("end-to-end", 1e-4, e2e);
    for (const auto& c : {c1, c2, c3, c4, c5, c6}) {
        INFO(c.to_json().dump());
        CHECK(c.pass);
    }
}

TEST_CASE("perturbation identities, A2 at lambda 16") {
    const Regime r = Regime::A2;
    ModelParams mp = model(r);
    SyntheticBackground bg(64, 0.01, mp, 4, 1);
    Perturbation P(geom(), bg, params(r, 16));
    CHECK_THROWS_AS(P.temporal_corrector_identity(0.1), Error);
    double t = P.check_times(1)[2];
    auto pieces = P.assemble(t);
    CHECK(coef_norm(pieces.wt) == 0);
    std::vector<IdentityCheck> cs{
        check_sides("cancellation", 1e-6, {P.cancellation(t)}),
        check_sides("curl-form", 1e-8, {P.curl_form(t)}),
        check_sides("oscillation-corrector", 1e-4, {P.oscillation_corrector_identity(t)}),
        check_sides("inverse-divergence", 1e-6, {P.reynolds_identity(P.reynolds(t).total())}),
        check_sides("end-to-end", 1e-4, {P.end_to_end(t)}),
    };
    for (const auto& c : cs) {
        INFO(c.to_json().dump());
        CHECK(c.pass);
    }
}

TEST_CASE("perturbation is confined to the support of the cutoff") {
    ModelParams mp = model(Regime::A1);
    SyntheticBackground bg(64, 0.01, mp, 5, 1, Interval{0.3, 0.5});
    Perturbation P(geom(), bg, params(Regime::A1, 16));
    auto supp = P.cutoff().support();
    REQUIRE(supp.size() == 1);
    CHECK(supp[0][0] >= 0.3 - P.params().theta / 2);
    CHECK(supp[0][1] <= 0.5 + P.params().theta / 2);
    for (int i = 0; i <= 10; ++i) {
        double t = i / 10.0;
        if (P.cutoff()(t) != 0) continue;
        CHECK(coef_norm(P.total(t)) == 0);
    }
}

TEST_CASE("synthetic background solves the relaxed system exactly") {
    ModelParams mp = model(Regime::A2);
    SyntheticBackground bg(32, 0.3, mp, 9, 2);
    for (double t : {0.1, 0.45}) {
        Field r = nsr_residual(bg.u(t), bg.u_t(t), bg.stress(t), mp);
        CHECK(parseval_l2(r) <= 1e-12 * parseval_l2(bg.u_t(t)));
    }
}

TEST_CASE("series background interpolates its samples") {
    ModelParams mp = model(Regime::A1);
    SyntheticBackground bg(16, 0.1, mp, 2, 1);
    TimeSeries u, R;
    u.t_final = R.t_final = 1;
    for (int j = 0; j < 41; ++j) {
        u.samples.push_back(bg.u(j / 40.0));
        R.samples.push_back(bg.stress(j / 40.0));
    }
    SeriesBackground s(u, R);
    CHECK(s.band() == 1);
    CHECK(s.stress_support().empty());
    CHECK(rel_diff(s.u(0.5), bg.u(0.5)) <= 1e-12);
    CHECK(rel_diff(s.u(0.513), bg.u(0.513)) <= 1e-5);
    CHECK(rel_diff(s.u_t(0.513), bg.u_t(0.513)) <= 1e-3);
}

TEST_CASE("check_sides weighting") {
    Field a = testutil::random_field(8, 3, 2, 1), b = a;
    b.axpy(1e-3, testutil::random_field(8, 3, 2, 2));
    auto c = check_sides("x", 1e-2, {{a, b}, {a, a}}, {1.0, 3.0}, {1.0, 1.0});
    CHECK(c.residual == doctest::Approx(parseval_l2(a - b) / 2).epsilon(1e-12));
    CHECK(c.pass == (c.residual <= 1e-2));
}
