#pragma once

/**
 * @file semivariance.hpp
 * @brief Closed-form below-target semivariance.
 *
 * For W ~ N(m, s^2) and threshold D, with z = (D - m) / s,
 *
 *     E[(D - W)^2 ; W < D] = (D - m)^2 Phi(z) + s (D - m) phi(z) + s^2 Phi(z).
 *
 * The jump-diffusion semivariance is the Poisson-weighted sum of this over the
 * Gaussian mixture components; the pure diffusion is the single k = 0 term.
 */

#include "semivar/gaussmix.hpp"

namespace semivar {

struct SemivarianceQuery {
  double threshold = 0.0;  ///< D, a log-return level
  double horizon = 1.0;    ///< t in years
  int jump_cap = 5;        ///< m, jumps allowed per period
  int k_max = 1260;        ///< last mixture term kept

  /// Query with the series truncated at m * n terms, n = horizon / delta_t.
  static SemivarianceQuery for_horizon(double horizon, double threshold = 0.0, int jump_cap = 5,
                                       double delta_t = 1.0 / 252.0);
  void validate() const;
};

struct SemivarianceResult {
  double semivariance = 0.0;
  double semideviation = 0.0;
  double truncation_tail = 0.0;  ///< Poisson mass beyond k_max, not included
};

/// Semivariance of N(mean, sd^2) below `threshold`. Evaluated in a
/// cancellation-free form in the lower tail, so it keeps full relative
/// accuracy when the threshold is many standard deviations below the mean.
double normal_semivariance(double mean, double sd, double threshold);

/// Sum over k = 0..k_max of p_k * normal_semivariance(mu_k, sigma_k, D) with
/// mu_k = (mu - sigma^2/2) t + k mu_q and sigma_k^2 = sigma^2 t + k sigma_q^2.
SemivarianceResult jump_diffusion_semivariance(const JumpDiffusionParams& params,
                                               const SemivarianceQuery& query);

/// The lambda = 0 case: N((mu - sigma^2/2) t, sigma^2 t).
SemivarianceResult pure_diffusion_semivariance(double mu, double sigma, double t, double threshold);

/// Square-root-of-time rule applied to the semideviation.
double sqrt_time_semideviation(double daily_semideviation, int steps_per_year);

}  // namespace semivar
