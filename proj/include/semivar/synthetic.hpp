#pragma once

// Synthetic return series with known parameters.

#include <cstdint>
#include <vector>

#include "semivar/gaussmix.hpp"
#include "semivar/returns.hpp"

namespace semivar {

/// n log-returns of a jump-diffusion sampled every delta_t: a normal
/// diffusion step plus a Poisson(lambda dt) number of N(mu_q, sigma_q^2)
/// jumps (uncapped). lambda = 0 gives geometric Brownian motion.
std::vector<double> jump_diffusion_returns(const JumpDiffusionParams& params, std::size_t n, double delta_t,
                                           std::uint64_t seed);

/// Same as a dated ReturnSeries with generated labels.
ReturnSeries jump_diffusion_series(const JumpDiffusionParams& params, std::size_t n, double delta_t,
                                   std::uint64_t seed);

}  // namespace semivar
