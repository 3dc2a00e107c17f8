#include "cid/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "cid/field.hpp"

namespace cid {

namespace {

int idot(const IVec3& a, const IVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
IVec3 icross(const IVec3& a, const IVec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
Vec3 scaled(const IVec3& v, int den) { return {double(v[0]) / den, double(v[1]) / den, double(v[2]) / den}; }

// Frame from k1 and k, with k2 = k x k1 (right-handed). Exactness is checked in integers.
Direction make_frame(const IVec3& k1, const IVec3& k, int den) {
    IVec3 c = icross(k, k1);
    for (int& x : c) {
        if (x % den) throw Error(ErrorKind::ConstructionFailure, "frame cross product is not on the lattice");
        x /= den;
    }
    Direction d;
    d.k = k;
    d.k1 = k1;
    d.k2 = c;
    return d;
}

void check_frames(const GeometrySet& g) {
    const int d2 = g.n_lambda * g.n_lambda;
    for (const auto& d : g.directions) {
        if (idot(d.k, d.k) != d2 || idot(d.k1, d.k1) != d2 || idot(d.k2, d.k2) != d2 || idot(d.k, d.k1) != 0 ||
            idot(d.k, d.k2) != 0 || idot(d.k1, d.k2) != 0)
            throw Error(ErrorKind::ConstructionFailure, "frame is not exactly orthonormal");
        IVec3 c = icross(d.k, d.k1);
        for (int i = 0; i < 3; ++i)
            if (c[i] != g.n_lambda * d.k2[i]) throw Error(ErrorKind::ConstructionFailure, "frame is not right-handed");
    }
}

void finish(GeometrySet& g, bool need_span) {
    check_frames(g);
    const int K = static_cast<int>(g.size());
    Eigen::MatrixXd A(6, K);
    for (int i = 0; i < K; ++i) {
        auto s = svec(g.k1k1(i));
        for (int r = 0; r < 6; ++r) A(r, i) = s[r];
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    if (need_span && cod.rank() < 6) throw Error(ErrorKind::ConstructionFailure, "directions do not span Sym(3)");
    Eigen::MatrixXd P = cod.pseudoInverse();  // K x 6, minimum-norm solve
    g.pinv_rows.assign(K, {});
    for (int i = 0; i < K; ++i)
        for (int r = 0; r < 6; ++r) g.pinv_rows[i][r] = P(i, r);
    g.gamma2_id = gamma2({1, 0, 0, 0, 1, 0, 0, 0, 1}, g, false);
    for (double w : g.gamma2_id)
        if (!(w > 0)) throw Error(ErrorKind::ConstructionFailure, "gamma^2(Id) is not positive");
}

}  // namespace

Vec3 Direction::unit_k(int den) const { return scaled(k, den); }
Vec3 Direction::unit_k1(int den) const { return scaled(k1, den); }
Vec3 Direction::unit_k2(int den) const { return scaled(k2, den); }

Mat3 GeometrySet::k1k1(std::size_t i) const {
    Vec3 v = directions[i].unit_k1(n_lambda);
    Mat3 m;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) m[3 * a + b] = v[a] * v[b];
    return m;
}

std::array<double, 6> svec(const Mat3& s) {
    // linear and injective on symmetric input, so A w = svec(S) gives sum w_k k1 (x) k1 = S
    return {s[0], s[4], s[8], 0.5 * (s[1] + s[3]), 0.5 * (s[2] + s[6]), 0.5 * (s[5] + s[7])};
}

GeometrySet build_lambda(unsigned long seed) {
    GeometrySet g;
    g.n_lambda = 3;
    const IVec3 base_k1{1, 2, 2}, base_k{2, 1, -2};
    // diagonal sign flips; det(D) = -1 flips handedness, so k is negated to compensate
    const int flips[4][3] = {{1, 1, 1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}};
    for (const auto& f : flips) {
        IVec3 k1{f[0] * base_k1[0], f[1] * base_k1[1], f[2] * base_k1[2]};
        IVec3 k{f[0] * base_k[0], f[1] * base_k[1], f[2] * base_k[2]};
        if (f[0] * f[1] * f[2] < 0)
            for (int& x : k) x = -x;
        g.directions.push_back(make_frame(k1, k, 3));
    }
    g.directions.push_back(make_frame({3, 0, 0}, {0, 3, 0}, 3));
    g.directions.push_back(make_frame({0, 3, 0}, {0, 0, 3}, 3));
    g.directions.push_back(make_frame({0, 0, 3}, {3, 0, 0}, 3));
    finish(g, true);
    g.eps_u_probe = estimate_epsilon_u(g, seed);
    g.eps_u = 0.5 * g.eps_u_probe;
    g.m_star = estimate_m_star(g, seed + 1);
    return g;
}

GeometrySet build_surrogate() {
    GeometrySet g;
    g.n_lambda = 1;
    g.surrogate = true;
    g.directions.push_back(make_frame({1, 0, 0}, {0, 1, 0}, 1));
    g.directions.push_back(make_frame({0, 1, 0}, {0, 0, 1}, 1));
    g.directions.push_back(make_frame({0, 0, 1}, {1, 0, 0}, 1));
    finish(g, false);
    // diagonal perturbations only: weights are S_ii, positive on a ball of radius 1 within diagonals
    g.eps_u_probe = 1.0;
    g.eps_u = 0.5;
    g.m_star = 0;
    return g;
}

std::vector<double> gamma2(const Mat3& s, const GeometrySet& g, bool check_ball) {
    if (check_ball) {
        double f = 0;
        for (int i = 0; i < 9; ++i) {
            double d = s[i] - ((i % 4 == 0) ? 1.0 : 0.0);
            f += d * d;
        }
        if (std::sqrt(f) > g.eps_u * (1 + 1e-12))
            throw Error(ErrorKind::OutOfDomain, "matrix lies outside the eps_u ball around Id");
    }
    auto v = svec(s);
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double acc = 0;
        for (int r = 0; r < 6; ++r) acc += g.pinv_rows[i][r] * v[r];
        w[i] = acc;
    }
    return w;
}

std::vector<double> gamma_decompose(const Mat3& s, const GeometrySet& g) {
    auto w = gamma2(s, g, true);
    for (double& x : w) {
        if (x < 0) throw Error(ErrorKind::OutOfDomain, "negative decomposition weight");
        x = std::sqrt(x);
    }
    return w;
}

double reconstruction_residual(const Mat3& s, const std::vector<double>& gam, const GeometrySet& g) {
    Mat3 r = s;
    for (std::size_t i = 0; i < g.size(); ++i) {
        Mat3 kk = g.k1k1(i);
        for (int c = 0; c < 9; ++c) r[c] -= gam[i] * gam[i] * kk[c];
    }
    double f = 0;
    for (double x : r) f += x * x;
    return std::sqrt(f);
}

namespace {

// random symmetric unit-Frobenius matrices, identical for a given seed
std::vector<Mat3> sphere_samples(unsigned long seed, int count) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<Mat3> out(count);
    for (auto& m : out) {
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) m[3 * a + b] = m[3 * b + a] = nd(rng);
        double f = 0;
        for (double x : m) f += x * x;
        f = std::sqrt(f);
        for (double& x : m) x /= f;
    }
    return out;
}

}  // namespace

bool probe_radius(const GeometrySet& g, double r, unsigned long seed, int samples) {
    auto es = sphere_samples(seed, samples);
    for (const auto& e : es) {
        Mat3 s;
        for (int c = 0; c < 9; ++c) s[c] = ((c % 4 == 0) ? 1.0 : 0.0) + r * e[c];
        for (double w : gamma2(s, g, false))
            if (!(w > 0)) return false;
    }
    return true;
}

double estimate_epsilon_u(const GeometrySet& g, unsigned long seed, int samples) {
    double lo = 0, hi = 1;
    while (probe_radius(g, hi, seed, samples)) hi *= 2;
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        if (probe_radius(g, mid, seed, samples)) lo = mid;
        else hi = mid;
    }
    return lo;
}

double estimate_m_star(const GeometrySet& g, unsigned long seed) {
    // directional difference quotients of gamma_k = sqrt(weight_k) up to order 4
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(0, 1);
    auto dirs = sphere_samples(seed + 17, 200);
    const double h = g.eps_u / 20;
    const double binom[5][5] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}};
    double total = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        double best = 0;
        for (std::size_t q = 0; q < dirs.size(); ++q) {
            const Mat3& e = dirs[q];
            const Mat3& p = dirs[(q + 1) % dirs.size()];
            double rad = 0.5 * g.eps_u * ud(rng);
            auto gam = [&](double t) {
                Mat3 s;
                for (int c = 0; c < 9; ++c) s[c] = ((c % 4 == 0) ? 1.0 : 0.0) + rad * p[c] + t * e[c];
                return std::sqrt(std::max(0.0, gamma2(s, g, false)[k]));
            };
            double sum = 0;
            for (int j = 0; j <= 4; ++j) {
                double d = 0;
                for (int i = 0; i <= j; ++i) d += ((i % 2) ? -1 : 1) * binom[j][i] * gam((0.5 * j - i) * h);
                sum += std::abs(d) / std::pow(h, j);
            }
            best = std::max(best, sum);
        }
        total += best;
    }
    return total;
}

int tube_count(double lambda, double r_perp) {
    return std::max(1, static_cast<int>(std::floor(lambda * r_perp + 1e-12)));
}

namespace {

double wrap(double u) {
    u = std::fmod(u + M_PI, 2 * M_PI);
    if (u < 0) u += 2 * M_PI;
    return u - M_PI;
}

struct Family {
    Vec3 k, k1, k2, alpha;
};

Family family(const GeometrySet& g, std::size_t i) {
    const auto& d = g.directions[i];
    return {d.unit_k(g.n_lambda), d.unit_k1(g.n_lambda), d.unit_k2(g.n_lambda), d.shift};
}

double axis_distance(const Family& f, const Vec3& x, double scale) {
    double u = 0, v = 0;
    for (int c = 0; c < 3; ++c) {
        u += f.k[c] * (x[c] - f.alpha[c]);
        v += f.k2[c] * (x[c] - f.alpha[c]);
    }
    u = wrap(scale * u);
    v = wrap(scale * v);
    return std::sqrt(u * u + v * v) / scale;
}

// One representative (a, b) per distinct closed axis line of a family in T^3. Offsets (a, b) and
// (a', b') give the same line iff their difference lies in n*M, M = {(z.K, z.K2) : z in Z^3}.
std::vector<std::pair<int, int>> axis_representatives(const Direction& d, int N, int n) {
    auto in_m = [&](int x, int y) {
        for (int t = 0; t < N * N; ++t) {
            bool ok = true;
            for (int c = 0; c < 3 && ok; ++c) ok = (x * d.k[c] + y * d.k2[c] + t * d.k1[c]) % (N * N) == 0;
            if (ok) return true;
        }
        return false;
    };
    auto same = [&](int x, int y) { return x % n == 0 && y % n == 0 && in_m(x / n, y / n); };
    std::vector<std::pair<int, int>> reps;
    const int period = n * N * N;
    for (int a = 0; a < period; ++a)
        for (int b = 0; b < period; ++b) {
            bool seen = false;
            for (const auto& r : reps)
                if (same(a - r.first, b - r.second)) { seen = true; break; }
            if (!seen) reps.emplace_back(a, b);
        }
    return reps;
}

// min distance from the axes of family a to the axes of family b, sampled along one period of every
// distinct axis of a; stops early once below `floor`
double pair_distance(const GeometrySet& g, const Family& a, const std::vector<std::pair<int, int>>& reps,
                     const Family& b, int n, double step, double floor) {
    const int N = g.n_lambda;
    const double scale = n * N;
    const int ns = static_cast<int>(std::ceil(2 * M_PI * N / step));
    double best = 1e300;
    for (const auto& r : reps)
        for (int s = 0; s < ns; ++s) {
            double t = s * step;
            Vec3 x;
            for (int c = 0; c < 3; ++c)
                x[c] = a.alpha[c] + (2 * M_PI / scale) * (r.first * a.k[c] + r.second * a.k2[c]) + t * a.k1[c];
            best = std::min(best, axis_distance(b, x, scale));
            if (best < floor) return best;
        }
    return best;
}

}  // namespace

double tube_clearance(const GeometrySet& g, double r_perp, double lambda) {
    const int n = tube_count(lambda, r_perp);
    const double rho = r_perp / (n * g.n_lambda);
    const double step = rho / 2;
    double best = 1e300;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto reps = axis_representatives(g.directions[i], g.n_lambda, n);
        for (std::size_t j = i + 1; j < g.size(); ++j)
            best = std::min(best, pair_distance(g, family(g, i), reps, family(g, j), n, step, -1) - 2 * rho - step / 2);
    }
    return best;
}

ShiftReport choose_shifts(GeometrySet& g, double r_perp, double lambda, unsigned long seed) {
    ShiftReport rep;
    if (g.size() <= 1) {
        for (auto& d : g.directions) d.shift = {0, 0, 0};
        rep.min_clearance = 1e300;
        return rep;
    }
    const int n = tube_count(lambda, r_perp);
    const double rho = r_perp / (n * g.n_lambda);
    const double step = rho / 2;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(0, 2 * M_PI);
    const int max_attempts = 400;
    std::vector<std::vector<std::pair<int, int>>> reps;
    for (const auto& d : g.directions) reps.push_back(axis_representatives(d, g.n_lambda, n));
    g.directions[0].shift = {0, 0, 0};
    double clearance = 1e300;
    for (std::size_t i = 1; i < g.size(); ++i) {
        bool placed = false;
        for (int att = 0; att < max_attempts && !placed; ++att) {
            ++rep.attempts;
            g.directions[i].shift = att == 0 ? Vec3{0, 0, 0} : Vec3{ud(rng), ud(rng), ud(rng)};
            Family fi = family(g, i);
            double worst = 1e300;
            for (std::size_t j = 0; j < i && worst > 0; ++j)
                worst = std::min(worst, pair_distance(g, fi, reps[i], family(g, j), n, step, 2 * rho + step / 2) -
                                            2 * rho - step / 2);
            if (worst > 0) {
                placed = true;
                clearance = std::min(clearance, worst);
            }
        }
        if (!placed)
            throw Error(ErrorKind::NoAdmissibleShifts,
                        "tubes cannot be separated at r_perp = " + std::to_string(r_perp) + "; shrink r_perp");
    }
    rep.min_clearance = clearance;
    // Monte Carlo quadrature of the pairwise product of tube indicators, relative to the tube volume
    std::uniform_real_distribution<double> u01(0, 1);
    const double scale = n * g.n_lambda;
    double worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        Family fi = family(g, i);
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (j == i) continue;
            Family fj = family(g, j);
            const int samples = 20000;
            int hits = 0;
            for (int q = 0; q < samples; ++q) {
                const auto& r = reps[i][q % reps[i].size()];
                double t = 2 * M_PI * g.n_lambda * u01(rng);
                double rad = rho * std::sqrt(u01(rng)), th = 2 * M_PI * u01(rng);
                Vec3 x;
                for (int c = 0; c < 3; ++c)
                    x[c] = fi.alpha[c] + (2 * M_PI / scale) * (r.first * fi.k[c] + r.second * fi.k2[c]) +
                           t * fi.k1[c] + rad * (std::cos(th) * fi.k[c] + std::sin(th) * fi.k2[c]);
                if (axis_distance(fj, x, scale) <= rho) ++hits;
            }
            worst = std::max(worst, double(hits) / samples);
        }
    }
    rep.overlap = worst;
    return rep;
}

nlohmann::json to_json(const GeometrySet& g) {
    nlohmann::json j;
    j["n_lambda"] = g.n_lambda;
    j["surrogate"] = g.surrogate;
    j["eps_u_probe"] = g.eps_u_probe;
    j["eps_u"] = g.eps_u;
    j["m_star"] = g.m_star;
    j["gamma2_id"] = g.gamma2_id;
    auto frac = [&](const IVec3& v) {
        nlohmann::json a = nlohmann::json::array();
        for (int x : v) a.push_back({{"num", x}, {"den", g.n_lambda}});
        return a;
    };
    for (const auto& d : g.directions)
        j["directions"].push_back({{"k", frac(d.k)}, {"k1", frac(d.k1)}, {"k2", frac(d.k2)}, {"shift", d.shift}});
    return j;
}

}  // namespace cid
