#pragma once

/**
 * @file svjj.hpp
 * @brief Stochastic volatility with contemporaneous, correlated jumps in
 *        returns and variance (daily time unit).
 *
 * Discrete model for day t = 1..T-1, with e = (e1, e2) ~ N(0, V_{t-1} S),
 * S = [[1, rho sigma_nu], [rho sigma_nu, sigma_nu^2]]:
 *
 *     y_t         = mu + x^y_t 1{J_t >= 1} + e1
 *     V_t - V_t-1 = kappa (theta - V_{t-1}) + x^v_t 1{J_t >= 1} + e2
 *
 * J_t is the number of jumps on day t (truncated Poisson on {0..m}) and
 * (x^y_t, x^v_t) are the day's aggregate jump sizes. Given J_t = k >= 1,
 * x^v ~ Gamma(k, scale mu_nu) and x^y | x^v ~ N(k mu_y + rho_j x^v, k sigma_y^2),
 * the k-fold sums of exponential(mu_nu) volatility jumps and correlated
 * normal return jumps. On days with J_t = 0 the sizes carry the one-jump law
 * as a pseudo-prior; they do not enter the data density.
 *
 * Returns are in percent (log-return * 100), as are mu, mu_y, sigma_y, mu_nu;
 * V and theta are in percent^2.
 */

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace semivar {

struct SVJJParams {
  double mu = 0.03;
  double kappa = 0.5;
  double theta = 0.25;
  double rho = 0.0;
  double sigma_nu = 0.1;
  double mu_y = 0.0;
  double sigma_y = 1.0;
  double rho_j = 0.0;
  double mu_nu = 0.01;
  double lambda = 0.02;

  static constexpr std::size_t kCount = 10;
  /// "mu", "kappa", "theta", "rho", "sigma_nu", "mu_y", "sigma_y", "rho_j", "mu_nu", "lambda".
  static const std::array<std::string_view, kCount>& names() noexcept;
  std::array<double, kCount> to_array() const noexcept;
  static SVJJParams from_array(const std::array<double, kCount>& a) noexcept;

  /// Estimation domain: kappa, theta, sigma_nu, sigma_y, mu_nu > 0; |rho| < 1;
  /// lambda in [0, 1).
  /// @throws std::invalid_argument
  void validate() const;
  /// Simulation domain: as validate() but sigma_nu, sigma_y and mu_nu may be 0.
  void validate_for_simulation() const;
};

/// Factors re-expressing the parameters when returns are multiplied by f
/// (f = 0.01 turns percent units into fractions): mu, sigma_nu, mu_y and
/// sigma_y scale by f; theta and mu_nu by f^2; rho_j by 1 / f; kappa, rho and
/// lambda are unchanged.
std::array<double, SVJJParams::kCount> unit_factors(double f) noexcept;
SVJJParams rescale(const SVJJParams& params, double f) noexcept;

struct SVJJLatentState {
  std::vector<double> v;     ///< V_t, t = 0..T-1; V_0 conditions the start
  std::vector<int> jumps;    ///< J_t in {0..m}; J_0 unused (0)
  std::vector<double> xi_y;  ///< aggregate return jump on day t
  std::vector<double> xi_nu; ///< aggregate variance jump on day t, >= 0

  std::size_t size() const noexcept { return v.size(); }
  /// @throws std::invalid_argument on unequal lengths, V <= 0 or xi_nu < 0.
  void validate(int m) const;
};

/// Hyperparameters. Families are fixed: normal priors for mu, kappa, theta,
/// mu_y, rho_j (kappa and theta restricted to > 0); U(-1, 1) for rho;
/// inverse gamma (shape, scale) for sigma_nu^2 and sigma_y^2; gamma (shape,
/// scale) on the exponential rate 1 / mu_nu; Beta for lambda.
struct PriorSpec {
  double mu_mean = 0.0, mu_var = 1.0;
  double kappa_mean = 0.0, kappa_var = 1.0;
  double theta_mean = 0.0, theta_var = 1.0;
  double sigma_nu2_shape = 2.5, sigma_nu2_scale = 0.1;
  double mu_y_mean = 0.0, mu_y_var = 100.0;
  double rho_j_mean = 0.0, rho_j_var = 1.0;
  double sigma_y2_shape = 5.0, sigma_y2_scale = 20.0;
  double mu_nu_rate_shape = 20.0, mu_nu_rate_scale = 10.0;
  double lambda_a = 2.0, lambda_b = 40.0;

  /// @throws std::invalid_argument when a hyperparameter is outside its family's domain.
  void validate() const;
};

/// Returned for a singular covariance (V <= 0, sigma_nu <= 0 or |rho| >= 1).
inline constexpr double kSingularLogDensity = -1e300;

/// Log of the bivariate normal density of (dy, dv) with mean
/// (mu + jump_y, kappa (theta - v_prev) + jump_v) and covariance v_prev S.
double bivariate_log_density(double dy, double dv, double v_prev, double jump_y, double jump_v,
                             const SVJJParams& params) noexcept;

/// Day t >= 1 of the data: dy = y[t], dv = V_t - V_{t-1}, jump terms from the
/// state (zero when J_t = 0). `jumps_override` >= 0 replaces J_t.
double bivariate_loglik(std::size_t t, std::span<const double> y, const SVJJParams& params,
                        const SVJJLatentState& state, int jumps_override = -1);

/// Log density of the aggregate jump sizes (x^y, x^v) given k >= 1 jumps.
double jump_size_log_density(double xi_y, double xi_nu, int k, const SVJJParams& params) noexcept;

/// log p_k for the truncated Poisson count with daily intensity lambda.
std::vector<double> jump_count_log_prior(double lambda, int m);

/// Posterior of J_t over {0..m}: proportional to p_k * exp(bivariate_loglik
/// with J_t = k) * f(x^y_t, x^v_t | max(k, 1)). The size factor is the
/// pseudo-prior for k = 0; for m = 1 it cancels to the Bernoulli form.
std::vector<double> jump_count_posterior(std::size_t t, std::span<const double> y, const SVJJParams& params,
                                         const SVJJLatentState& state, int m);

}  // namespace semivar
