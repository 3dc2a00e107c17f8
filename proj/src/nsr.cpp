#include "cid/nsr.hpp"

#include "cid/ops.hpp"

#include <random>

namespace cid {

Field initial_stress(const Field& u, const Field& u_t, const ModelParams& mp) {
    Field lin = u_t + fractional_laplacian(u, mp.alpha, mp.nu);
    for (int c = 0; c < 3; ++c) lin.at(c, 0, 0, 0) = 0;
    Field R = inverse_divergence(lin);
    R += outer_tf(u, u, true);
    return R;
}

Field projected_div(const Field& T) {
    return freq_project(leray_project(differentiate(T, DiffOp::Div)), FreqMode::NonZero);
}

Field nsr_residual(const Field& u, const Field& u_t, const Field& R, const ModelParams& mp) {
    Field r = u_t + fractional_laplacian(u, mp.alpha, mp.nu);
    r += differentiate(outer(u, u, true), DiffOp::Div);
    r -= differentiate(R, DiffOp::Div);
    return freq_project(leray_project(r), FreqMode::NonZero);
}

Field random_solenoidal(int n, int band, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0, 1);
    Field f(n, 3);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k <= band && k < f.nz(); ++k)
                    if (std::abs(f.wave(i)) <= band && std::abs(f.wave(j)) <= band) f.at(c, i, j, k) = cplx(nd(rng), nd(rng));
    for (int c = 0; c < 3; ++c) f.at(c, 0, 0, 0) = 0;
    f.enforce_real();
    f = leray_project(f);
    double m = max_abs(f);
    if (m > 0) f *= 1 / m;
    return f;
}

}  // namespace cid
