#pragma once

#include <cmath>
#include <random>

#include "cid/ops.hpp"

namespace testutil {

// random real field with Gaussian coefficients on |xi_i| <= band, optionally mean free
inline cid::Field random_field(int n, int comps, int band, unsigned long seed, bool mean_free = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    cid::Field f(n, comps);
    for (int c = 0; c < comps; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < f.nz(); ++k) {
                    int a = f.wave(i), b = f.wave(j);
                    if (std::abs(a) > band || std::abs(b) > band || k > band) continue;
                    f.at(c, i, j, k) = cid::cplx(nd(rng), nd(rng));
                }
    if (mean_free)
        for (int c = 0; c < comps; ++c) f.at(c, 0, 0, 0) = 0;
    f.enforce_real();
    return f;
}

}  // namespace testutil
