#pragma once

#include <random>

#include "cid/field.hpp"

namespace cid {

// R(u_t + nu (-Lap)^alpha u) + u (x)o u; with pressure -|u|^2/3 the pair solves the relaxed system exactly
Field initial_stress(const Field& u, const Field& u_t, const ModelParams& mp);

// P_H P_{!=0}(u_t + nu (-Lap)^alpha u + div(u (x) u) - div R); products are not truncated
Field nsr_residual(const Field& u, const Field& u_t, const Field& R, const ModelParams& mp);

// Gaussian coefficients on |xi_i| <= band, Leray projected, mean free, scaled to sup norm 1
Field random_solenoidal(int n, int band, std::mt19937_64& rng);

// P_H P_{!=0} div T
Field projected_div(const Field& T);

}  // namespace cid
