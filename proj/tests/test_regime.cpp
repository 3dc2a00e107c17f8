#include "doctest.h"

#include <chrono>

#include "cid/regime.hpp"

using namespace cid;

namespace {

Exponents ex(const char* a, const char* s, const char* g, const char* p) {
    return {parse_q(a), parse_q(s), parse_xq(g), parse_xq(p)};
}

const Constraint& find(const Certificate& c, const std::string& id) {
    for (const auto& k : c.constraints)
        if (k.id == id) return k;
    throw std::runtime_error("missing constraint " + id);
}

// independent re-substitution: lambda-exponents of the block parameters as (const, eps-coefficient)
struct Aff {
    mpq_class c0, c1;
};
Aff operator+(Aff a, Aff b) { return {a.c0 + b.c0, a.c1 + b.c1}; }
Aff operator*(mpq_class k, Aff a) { return {k * a.c0, k * a.c1}; }

}  // namespace

TEST_CASE("rational parsing") {
    CHECK(parse_q("1.4") == mpq_class(7, 5));
    CHECK(parse_q("-0.25") == mpq_class(-1, 4));
    CHECK(parse_q("6/8") == mpq_class(3, 4));
    CHECK(parse_xq("inf").inf);
    CHECK(parse_xq("inf").recip() == 0);
    CHECK_THROWS_AS(parse_q("abc"), Error);
    CHECK_THROWS_AS(parse_q("1/0"), Error);
}

TEST_CASE("A1 membership") {
    auto v = in_A1(ex("3/2", "0", "inf", "4/3"));
    CHECK(v.member);
    CHECK(v.margin == mpq_class(1, 4));
    auto w = in_A1(ex("5/4", "0", "inf", "2"));
    CHECK_FALSE(w.member);
    CHECK(w.margin == 0);
    for (const char* p : {"1", "1.4", "3/2", "199/100"}) CHECK(in_A1(ex("5/4", "0", "inf", p)).member);
    CHECK_THROWS_AS(in_A1(ex("1", "0", "inf", "1")), Error);
}

TEST_CASE("A2 membership") {
    auto v = in_A2(ex("1", "0", "3/2", "inf"));
    CHECK(v.member);
    CHECK(v.margin == mpq_class(1, 3));
    auto w = in_A2(ex("1", "0", "2", "inf"));
    CHECK_FALSE(w.member);
    CHECK(w.margin == 0);
    auto z = in_A2(ex("3/2", "0", "inf", "inf"));
    CHECK_FALSE(z.member);
    CHECK(z.margin == -2);
    for (const char* g : {"1", "5/4", "1.9"}) CHECK(in_A2(ex("1", "0", g, "inf")).member);
}

TEST_CASE("domain checks") {
    CHECK_THROWS_AS(certify(ex("2", "0", "inf", "1")), Error);
    CHECK_THROWS_AS(certify(ex("1/2", "0", "inf", "1")), Error);
    CHECK_THROWS_AS(certify(ex("5/4", "3", "inf", "1")), Error);
    CHECK_THROWS_AS(certify(ex("5/4", "0", "inf", "1/2")), Error);
    try {
        certify(ex("5/4", "-1", "inf", "1"));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutOfDomain);
    }
}

TEST_CASE("epsilon selection") {
    auto e = ex("5/4", "0", "inf", "1");
    CHECK(epsilon_bound(e, Regime::A1) == mpq_class(3, 80));
    CHECK(pick_epsilon(e, Regime::A1, 160) == mpq_class(3, 80));
    auto f = ex("3/2", "0", "1", "inf");
    CHECK(epsilon_bound(f, Regime::A2) == mpq_class(1, 40));
    mpq_class eps = pick_epsilon(f, Regime::A2, 1000);
    CHECK(eps <= mpq_class(1, 40));
    CHECK(eps > 0);
    mpq_class k = 1000 * (2 - mpq_class(3, 2) - 8 * eps);
    CHECK(k.get_den() == 1);
    // one step larger would break the bound
    CHECK((k - 1) / 8000 + eps > mpq_class(1, 40));
    try {
        pick_epsilon(e, Regime::A1, 2);
        FAIL("expected infeasible-b");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::InfeasibleB);
    }
}

TEST_CASE("worked constraint margins by re-substitution") {
    auto e = ex("5/4", "0", "inf", "1.4");
    auto c = certify(e);
    REQUIRE(c.regime == Regime::A1);
    const mpq_class eps = c.scheme.eps, a = e.alpha;
    Aff lam{1, 0}, rperp{-1, 2}, rpar{-1, 4}, mu{2 * a - 1, 2}, tau{4 * a - 5, 11}, sigma{0, 2};
    Aff hyp = (2 * a - 1) * lam + rperp + mpq_class(1, 2) * rpar + mpq_class(-1, 2) * tau;
    auto& k = find(c, "principal-hyperdissipation");
    CHECK(k.c0 == hyp.c0);
    CHECK(k.c1 == hyp.c1);
    CHECK(k.margin == mpq_class(-3, 2) * eps);
    Aff tc = (2 * a - 1) * lam + mpq_class(-1) * mu;
    CHECK(find(c, "temporal-corrector-hyperdissipation").margin == tc.c0 + tc.c1 * eps);
    CHECK(find(c, "temporal-corrector-hyperdissipation").margin == -2 * eps);
    Aff osc = mpq_class(-1) * mu + sigma + tau;
    CHECK(find(c, "temporal-corrector-oscillation").margin == osc.c0 + osc.c1 * eps);
    CHECK(find(c, "temporal-corrector-oscillation").margin == 2 * a - 4 + 11 * eps);
    Aff pt = mu + 2 * rperp + mpq_class(-1, 2) * rpar + mpq_class(-1, 2) * tau;
    CHECK(find(c, "principal-time-derivative").margin == pt.c0 + pt.c1 * eps);
    CHECK(find(c, "principal-oscillation").margin == -2 * eps);
    CHECK(find(c, "rho-identity").pass);
    CHECK(c.pass);

    auto e2 = ex("3/2", "0", "5/4", "inf");
    auto d = certify(e2);
    REQUIRE(d.regime == Regime::A2);
    const mpq_class eps2 = d.scheme.eps, a2 = e2.alpha;
    Aff rp2{1 - a2, -8}, tau2{2 * a2, 0};
    Aff hyp2 = (2 * a2 - 1) * lam + rp2 + mpq_class(-1, 2) * tau2;
    CHECK(find(d, "principal-hyperdissipation").margin == hyp2.c0 + hyp2.c1 * eps2);
    CHECK(find(d, "principal-hyperdissipation").margin == -8 * eps2);
    CHECK(find(d, "principal-oscillation").margin == a2 - 2 + 8 * eps2);
    CHECK(find(d, "rho-identity").pass);
    CHECK(d.rho == (2 * a2 - 2 + 16 * eps2) / (2 * a2 - 2 + 14 * eps2));
    CHECK(d.pass);
}

TEST_CASE("certify verdicts and determinism") {
    auto t0 = std::chrono::steady_clock::now();
    auto c = certify(ex("5/4", "0", "inf", "1.4"));
    CHECK(c.pass);
    for (const auto& k : c.constraints)
        if (k.exponent) CHECK(k.margin < 0);
    CHECK(c.scheme.b % 2 == 0);
    CHECK(c.scheme.b > 1000 / (c.scheme.eps * c.scheme.eta_star));
    CHECK(c.scheme.beta < mpq_class(1) / (100 * c.scheme.b * c.scheme.b));
    CHECK(c.scheme.b_rounds <= 3);
    auto f = certify(ex("5/4", "0", "inf", "2"));
    CHECK_FALSE(f.pass);
    CHECK(f.constraints.empty());
    CHECK_FALSE(f.regime.has_value());
    CHECK(certify(ex("5/4", "0", "inf", "1.4")).dump() == c.dump());
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 1.0);
    // both regimes: A1 is preferred
    auto both = certify(ex("5/4", "0", "1", "1"));
    CHECK(both.a1.member);
    CHECK(both.a2.member);
    CHECK(both.regime == Regime::A1);
}

TEST_CASE("shrinking eps keeps passing constraints with positive eps coefficient") {
    for (auto e : {ex("5/4", "0", "inf", "1.4"), ex("3/2", "0", "5/4", "inf"), ex("7/4", "1/10", "2", "1")}) {
        auto c = certify(e);
        REQUIRE(c.regime.has_value());
        for (const auto& k : c.constraints) {
            if (!k.exponent || k.c1 <= 0 || !k.pass) continue;
            for (int d = 2; d <= 16; d *= 2) CHECK(k.c0 + k.c1 * (c.scheme.eps / d) < 0);
        }
    }
}
