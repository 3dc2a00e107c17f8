#include "cid/regime.hpp"

#include <algorithm>
#include <cctype>

namespace cid {

mpq_class XQ::recip() const {
    if (inf) return 0;
    if (v == 0) throw Error(ErrorKind::OutOfDomain, "reciprocal of zero exponent");
    mpq_class r = 1 / v;
    r.canonicalize();
    return r;
}

std::string qstr(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    return c.get_str();
}

std::string XQ::str() const { return inf ? "inf" : qstr(v); }

mpq_class parse_q(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw Error(ErrorKind::InvalidParameter, "empty rational");
    auto bad = [&] { return Error(ErrorKind::InvalidParameter, "not a rational number: " + raw); };
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        if (s.find('/') != std::string::npos) throw bad();
        std::string sign, ip = s.substr(0, dot), fp = s.substr(dot + 1);
        if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) {
            sign = ip[0] == '-' ? "-" : "";
            ip = ip.substr(1);
        }
        if (ip.empty()) ip = "0";
        if (fp.empty() || !std::all_of(ip.begin(), ip.end(), ::isdigit) || !std::all_of(fp.begin(), fp.end(), ::isdigit))
            throw bad();
        mpz_class num(sign + ip + fp, 10), den(1);
        for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
        mpq_class q(num, den);
        q.canonicalize();
        return q;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || ((c == '-' || c == '+') && i == 0))) throw bad();
    }
    if (s[0] == '+') s = s.substr(1);
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw bad();
    if (q.get_den() == 0) throw bad();
    q.canonicalize();
    return q;
}

XQ parse_xq(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "inf" || t == "infinity" || t == "+inf" || t == "\xe2\x88\x9e") return XQ::infinity();
    return XQ(parse_q(s));
}

void Exponents::validate() const {
    if (alpha < 1 || alpha >= 2) throw Error(ErrorKind::OutOfDomain, "alpha must lie in [1, 2)");
    if (s < 0 || s >= 3) throw Error(ErrorKind::OutOfDomain, "s must lie in [0, 3)");
    if (!gamma.inf && gamma.v < 1) throw Error(ErrorKind::OutOfDomain, "gamma must lie in [1, inf]");
    if (!p.inf && p.v < 1) throw Error(ErrorKind::OutOfDomain, "p must lie in [1, inf]");
}

RegimeVerdict in_A1(const Exponents& e) {
    e.validate();
    if (e.alpha < mpq_class(5, 4)) throw Error(ErrorKind::OutOfDomain, "A1 is defined for alpha in [5/4, 2)");
    RegimeVerdict v;
    v.applicable = true;
    v.margin = (4 * e.alpha - 5) * e.gamma.recip() + 3 * e.p.recip() + 1 - 2 * e.alpha - e.s;
    v.margin.canonicalize();
    v.member = v.margin > 0;
    return v;
}

RegimeVerdict in_A2(const Exponents& e) {
    e.validate();
    RegimeVerdict v;
    v.applicable = true;
    v.margin = 2 * e.alpha * e.gamma.recip() + (2 * e.alpha - 2) * e.p.recip() + 1 - 2 * e.alpha - e.s;
    v.margin.canonicalize();
    v.member = v.margin > 0;
    return v;
}

mpq_class epsilon_bound(const Exponents& e, Regime r) {
    mpq_class m = r == Regime::A1 ? in_A1(e).margin : in_A2(e).margin;
    mpq_class b = std::min(mpq_class(2 - e.alpha), m) / 20;
    b.canonicalize();
    return b;
}

mpq_class pick_epsilon(const Exponents& e, Regime r, const mpz_class& b) {
    if (b <= 0) throw Error(ErrorKind::InvalidParameter, "b must be positive");
    mpq_class bound = epsilon_bound(e, r);
    if (bound <= 0) throw Error(ErrorKind::OutOfDomain, "no positive epsilon bound; input is not in the regime");
    mpq_class eps;
    if (r == Regime::A1) {
        mpq_class x = b * bound;
        mpz_class k;
        mpz_fdiv_q(k.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
        eps = mpq_class(k, b);
    } else {
        // eps = (b(2-alpha) - n) / (8b) with n the smallest integer keeping eps <= bound
        mpq_class top = b * (2 - e.alpha);
        mpq_class lo = top - 8 * b * bound;
        mpz_class n;
        mpz_cdiv_q(n.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
        if (n < 1) n = 1;
        eps = (top - n) / (8 * b);
    }
    eps.canonicalize();
    if (eps <= 0)
        throw Error(ErrorKind::InfeasibleB, "no positive admissible epsilon for b = " + b.get_str() + "; increase b");
    return eps;
}

namespace {

mpz_class smallest_even_above(const mpq_class& x) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    mpz_class n = f + 1;
    if (n % 2 != 0) n += 1;
    return n;
}

Constraint exponent(const std::string& id, const std::string& st, const mpq_class& c0, const mpq_class& c1,
                    const mpq_class& eps) {
    Constraint c;
    c.id = id;
    c.statement = st;
    c.c0 = c0;
    c.c1 = c1;
    c.c0.canonicalize();
    c.c1.canonicalize();
    c.margin = c.c0 + c.c1 * eps;
    c.margin.canonicalize();
    c.pass = c.margin < 0;
    return c;
}

Constraint side(const std::string& id, const std::string& st, bool ok, const mpq_class& margin = 0) {
    Constraint c;
    c.id = id;
    c.statement = st;
    c.exponent = false;
    c.margin = margin;
    c.margin.canonicalize();
    c.pass = ok;
    return c;
}

bool is_natural(const mpq_class& q) { return q.get_den() == 1 && q > 0; }

void common_sides(Certificate& c, const SchemeParams& sp, const Exponents& e, Regime r) {
    mpq_class bound = epsilon_bound(e, r);
    c.constraints.push_back(side("eps-bound", "eps <= (1/20) min{2 - alpha, regime margin}", sp.eps <= bound,
                                 sp.eps - bound));
    mpq_class lim = 1000 / (sp.eps * sp.eta_star);
    c.constraints.push_back(side("b-size", "b even and b > 1000/(eps eta_*)", sp.b % 2 == 0 && sp.b > lim,
                                 lim - mpq_class(sp.b)));
    mpq_class bmax = mpq_class(1) / (100 * sp.b * sp.b);
    c.constraints.push_back(side("beta-range", "0 < beta < 1/(100 b^2)", sp.beta > 0 && sp.beta < bmax, sp.beta - bmax));
    c.constraints.push_back(side("eps-r", "eps_R < eps/10", sp.eps_r < sp.eps / 10, sp.eps_r - sp.eps / 10));
    c.constraints.push_back(side("eta-range", "eta_*/2 < eta < eta_* < 1",
                                 sp.eta_star / 2 < sp.eta && sp.eta < sp.eta_star && sp.eta_star < 1,
                                 sp.eta - sp.eta_star));
}

void finish(Certificate& c) {
    c.pass = c.regime.has_value() && !c.constraints.empty() &&
             std::all_of(c.constraints.begin(), c.constraints.end(), [](const Constraint& k) { return k.pass; });
}

}  // namespace

Certificate check_constraints_A1(const SchemeParams& sp, const Exponents& e) {
    Certificate c;
    c.input = e;
    c.regime = Regime::A1;
    c.scheme = sp;
    const mpq_class ip = e.p.recip(), ig = e.gamma.recip(), a = e.alpha, eps = sp.eps;
    const mpq_class base = e.s - 3 * ip + 2 * a - 1 - (4 * a - 5) * ig;
    c.constraints.push_back(exponent("principal-in-LgWsp", "lambda^s r_perp^{2/p-1} r_par^{1/p-1/2} tau^{1/2-1/gamma}",
                                     base, mpq_class(3, 2) + 8 * ip - 11 * ig, eps));
    c.constraints.push_back(
        exponent("principal-time-derivative", "mu r_perp^2 r_par^{-1/2} tau^{-1/2}", 0, mpq_class(-3, 2), eps));
    c.constraints.push_back(
        exponent("principal-hyperdissipation", "lambda^{2alpha-1} r_perp r_par^{1/2} tau^{-1/2}", 0, mpq_class(-3, 2), eps));
    c.constraints.push_back(exponent("temporal-corrector-hyperdissipation", "lambda^{2alpha-1} mu^{-1}", 0, -2, eps));
    c.constraints.push_back(exponent("principal-oscillation", "lambda^{-1} r_perp^{-1}", 0, -2, eps));
    c.constraints.push_back(exponent("temporal-corrector-oscillation", "mu^{-1} sigma tau", 2 * a - 4, 11, eps));
    c.constraints.push_back(exponent("stress-decay",
                                     "s + 2alpha - 1 - 3/p - (4alpha-5)/gamma + eps(2 + 8/p - 11/gamma) + 10 eps",
                                     base, 12 + 8 * ip - 11 * ig, eps));
    common_sides(c, sp, e, Regime::A1);
    c.constraints.push_back(side("eps-integrality", "b eps is a positive integer", is_natural(sp.b * eps)));
    c.rho = (3 - 8 * eps) / (3 - 9 * eps);
    c.rho.canonicalize();
    mpq_class lhs = (3 - 8 * eps) * (1 - 1 / c.rho);
    lhs.canonicalize();
    c.constraints.push_back(side("rho-identity", "(3 - 8 eps)(1 - 1/rho) = eps", lhs == eps, lhs - eps));
    c.lps_gap = 2 * a - 1 + e.s - 2 * a * ig - 3 * ip;
    c.lps_gap.canonicalize();
    finish(c);
    return c;
}

Certificate check_constraints_A2(const SchemeParams& sp, const Exponents& e) {
    Certificate c;
    c.input = e;
    c.regime = Regime::A2;
    c.scheme = sp;
    const mpq_class ip = e.p.recip(), ig = e.gamma.recip(), a = e.alpha, eps = sp.eps;
    const mpq_class base = e.s + 2 * a - 1 - 2 * a * ig - (2 * a - 2) * ip;
    c.constraints.push_back(
        exponent("principal-in-LgWsp", "lambda^s r_perp^{2/p-1} tau^{1/2-1/gamma}", base, 8 - 16 * ip, eps));
    c.constraints.push_back(exponent("principal-time-derivative", "sigma lambda^{-1} r_perp tau^{1/2}", 0, -6, eps));
    c.constraints.push_back(exponent("principal-hyperdissipation", "lambda^{2alpha-1} r_perp tau^{-1/2}", 0, -8, eps));
    c.constraints.push_back(exponent("principal-oscillation", "lambda^{-1} r_perp^{-1}", a - 2, 8, eps));
    c.constraints.push_back(exponent("stress-decay",
                                     "s + 2alpha - 1 - 2alpha/gamma - (2alpha-2)/p + eps(9 - 16/p) + 10 eps", base,
                                     19 - 16 * ip, eps));
    common_sides(c, sp, e, Regime::A2);
    c.constraints.push_back(
        side("eps-integrality", "b (2 - alpha - 8 eps) is a positive integer", is_natural(sp.b * (2 - a - 8 * eps))));
    c.rho = (2 * a - 2 + 16 * eps) / (2 * a - 2 + 14 * eps);
    c.rho.canonicalize();
    // r_perp^{2/rho - 1} = lambda^{1 - alpha - 6 eps} with r_perp = lambda^{1 - alpha - 8 eps}
    mpq_class lhs = (1 - a - 8 * eps) * (2 / c.rho - 1), rhs = 1 - a - 6 * eps;
    lhs.canonicalize();
    rhs.canonicalize();
    c.constraints.push_back(side("rho-identity", "r_perp^{2/rho-1} = lambda^{1-alpha-6eps}", lhs == rhs, lhs - rhs));
    c.lps_gap = 2 * a - 1 + e.s - 2 * a * ig - 3 * ip;
    c.lps_gap.canonicalize();
    finish(c);
    return c;
}

SchemeParams make_scheme(const Exponents& e, Regime r, const CertifyOptions& opt) {
    if (opt.eta_star <= 0 || opt.eta_star >= 1) throw Error(ErrorKind::InvalidParameter, "eta_* must lie in (0, 1)");
    SchemeParams sp;
    sp.a = opt.a;
    sp.eta_star = opt.eta_star;
    if (opt.b) {
        sp.b = *opt.b;
        sp.eps = pick_epsilon(e, r, sp.b);
    } else {
        // the provisional eps loses at most 1/b to integrality, so seed with b bound > 1000/eta_* + 1
        mpz_class b = smallest_even_above((1000 / opt.eta_star + 1) / epsilon_bound(e, r));
        for (int round = 1; round <= 3; ++round) {
            sp.b_rounds = round;
            mpq_class eps = pick_epsilon(e, r, b);
            mpq_class lim = 1000 / (eps * opt.eta_star);
            if (b > lim) break;
            b = smallest_even_above(lim);
        }
        sp.b = b;
        sp.eps = pick_epsilon(e, r, b);
    }
    sp.beta = mpq_class(1) / (200 * sp.b * sp.b);
    sp.eps_r = sp.eps / 20;
    sp.eta = 3 * sp.eta_star / 4;
    sp.beta.canonicalize();
    sp.eps_r.canonicalize();
    sp.eta.canonicalize();
    return sp;
}

Certificate certify(const Exponents& e, const CertifyOptions& opt) {
    e.validate();
    Certificate c;
    RegimeVerdict a1;
    if (e.alpha >= mpq_class(5, 4)) a1 = in_A1(e);
    RegimeVerdict a2 = in_A2(e);
    if (a1.member) c = check_constraints_A1(make_scheme(e, Regime::A1, opt), e);
    else if (a2.member) c = check_constraints_A2(make_scheme(e, Regime::A2, opt), e);
    else {
        c.input = e;
        c.lps_gap = 2 * e.alpha - 1 + e.s - 2 * e.alpha * e.gamma.recip() - 3 * e.p.recip();
        c.lps_gap.canonicalize();
        c.pass = false;
    }
    c.a1 = a1;
    c.a2 = a2;
    return c;
}

nlohmann::ordered_json Certificate::to_json() const {
    using J = nlohmann::ordered_json;
    J j;
    j["input"] = {{"alpha", qstr(input.alpha)}, {"s", qstr(input.s)}, {"gamma", input.gamma.str()}, {"p", input.p.str()}};
    j["lps_gap"] = qstr(lps_gap);
    auto verdict = [](const RegimeVerdict& v) {
        return J{{"applicable", v.applicable}, {"member", v.member}, {"margin", v.applicable ? qstr(v.margin) : "n/a"}};
    };
    j["regimes"] = {{"A1", verdict(a1)}, {"A2", verdict(a2)}};
    j["regime"] = regime ? J(to_string(*regime)) : J(nullptr);
    if (regime) {
        j["scheme"] = {{"a", scheme.a.get_str()},       {"b", scheme.b.get_str()},     {"b_rounds", scheme.b_rounds},
                       {"beta", qstr(scheme.beta)},     {"eps", qstr(scheme.eps)},     {"eps_R", qstr(scheme.eps_r)},
                       {"eta", qstr(scheme.eta)},       {"eta_star", qstr(scheme.eta_star)}};
        j["rho"] = qstr(rho);
        J list = J::array();
        for (const auto& k : constraints) {
            J item{{"id", k.id}, {"statement", k.statement}, {"kind", k.exponent ? "lambda-exponent" : "exact"}};
            if (k.exponent) {
                item["exponent"] = {{"const", qstr(k.c0)}, {"eps_coeff", qstr(k.c1)}};
            }
            item["margin"] = qstr(k.margin);
            item["pass"] = k.pass;
            list.push_back(item);
        }
        j["constraints"] = list;
    } else {
        j["constraints"] = J::array();
        j["note"] = "input is in neither supercritical regime; no constraints evaluated";
    }
    j["pass"] = pass;
    return j;
}

std::string Certificate::dump() const { return to_json().dump(2) + "\n"; }

}  // namespace cid
