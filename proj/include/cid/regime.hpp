#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "cid/blocks.hpp"
#include "json.hpp"

namespace cid {

// exact rational or +infinity; 1/inf = 0
struct XQ {
    bool inf = false;
    mpq_class v = 0;

    XQ() = default;
    XQ(const mpq_class& q) : v(q) {}
    static XQ infinity() { XQ x; x.inf = true; return x; }
    mpq_class recip() const;
    std::string str() const;
};

// accepts "inf", integers, "a/b" and finite decimals ("1.4" -> 7/5)
XQ parse_xq(const std::string& s);
mpq_class parse_q(const std::string& s);
std::string qstr(const mpq_class& q);

struct Exponents {
    mpq_class alpha, s;
    XQ gamma, p;
    // out-of-domain unless alpha in [1,2), s in [0,3), gamma, p in [1, inf]
    void validate() const;
};

struct RegimeVerdict {
    bool applicable = false;  // A1 is only defined for alpha >= 5/4
    bool member = false;
    mpq_class margin = 0;     // RHS - s, membership iff margin > 0
};

RegimeVerdict in_A1(const Exponents& e);  // throws out-of-domain for alpha outside [5/4, 2)
RegimeVerdict in_A2(const Exponents& e);

// (1/20) min{2 - alpha, regime margin}
mpq_class epsilon_bound(const Exponents& e, Regime r);
// largest eps <= bound with b eps in N (A1) or b (2 - alpha - 8 eps) in N (A2); infeasible-b otherwise
mpq_class pick_epsilon(const Exponents& e, Regime r, const mpz_class& b);

struct SchemeParams {
    mpz_class a = 10;  // recorded, not validated against the unknown threshold a_0
    mpz_class b = 0;
    mpq_class beta, eps, eps_r, eta, eta_star;
    int b_rounds = 0;
};

// an affine lambda-exponent c0 + c1 eps, or an exact side condition
struct Constraint {
    std::string id;
    std::string statement;
    bool exponent = true;  // true: pass iff margin < 0
    mpq_class c0 = 0, c1 = 0, margin = 0;
    bool pass = false;
};

struct Certificate {
    Exponents input;
    RegimeVerdict a1, a2;
    std::optional<Regime> regime;
    mpq_class lps_gap = 0;  // 2 alpha - 1 + s - 2 alpha/gamma - 3/p
    SchemeParams scheme;
    std::vector<Constraint> constraints;
    mpq_class rho = 0;
    bool pass = false;

    nlohmann::ordered_json to_json() const;
    std::string dump() const;  // deterministic text
};

Certificate check_constraints_A1(const SchemeParams& sp, const Exponents& e);
Certificate check_constraints_A2(const SchemeParams& sp, const Exponents& e);

struct CertifyOptions {
    mpq_class eta_star = mpq_class(1, 2);
    std::optional<mpz_class> b;
    mpz_class a = 10;
};

// b starts at the smallest even integer > (1000/eta_* + 1)/bound, which absorbs the integrality loss in eps,
// then at most 3 rounds of b = smallest even integer > 1000/(eps eta_*) confirm it
SchemeParams make_scheme(const Exponents& e, Regime r, const CertifyOptions& opt);
Certificate certify(const Exponents& e, const CertifyOptions& opt = {});

}  // namespace cid
