#include "semivar/synthetic.hpp"

#include <cmath>

#include "semivar/rng.hpp"

namespace semivar {

std::vector<double> jump_diffusion_returns(const JumpDiffusionParams& params, std::size_t n, double delta_t,
                                           std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  const double drift = (params.mu - 0.5 * params.sigma * params.sigma) * delta_t;
  const double vol = params.sigma * std::sqrt(delta_t);
  std::vector<double> out(n);
  for (auto& r : out) {
    r = drift + vol * rng.normal();
    if (params.lambda > 0.0) {
      const auto k = rng.poisson(params.lambda * delta_t);
      for (std::uint64_t j = 0; j < k; ++j) r += params.mu_q + params.sigma_q * rng.normal();
    }
  }
  return out;
}

ReturnSeries jump_diffusion_series(const JumpDiffusionParams& params, std::size_t n, double delta_t,
                                   std::uint64_t seed) {
  return ReturnSeries::from_values(jump_diffusion_returns(params, n, delta_t, seed), delta_t);
}

}  // namespace semivar
