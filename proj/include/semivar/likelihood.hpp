#pragma once

/**
 * @file likelihood.hpp
 * @brief Per-period densities and maximum-likelihood fitting of the
 *        constant-volatility models.
 *
 * Parameter vector layout used with the optimizer:
 *   pure diffusion:  [mu, sigma]
 *   jump models:     [mu, sigma, lambda, mu_q, sigma_q]
 * All rates are per year; the densities are for one step of length delta_t.
 */

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "semivar/de.hpp"
#include "semivar/gaussmix.hpp"
#include "semivar/returns.hpp"

namespace semivar {

enum class ModelKind { pure_diffusion, ball_torous, generalized_m_jump };

/// Per-observation log-density floor, log(1e-300). Densities that underflow
/// contribute this value instead of -inf, so the objective stays totally
/// ordered for the optimizer.
inline const double kLogDensityFloor = std::log(1e-300);

struct ModelSpec {
  ModelKind kind = ModelKind::generalized_m_jump;
  int m = 5;  ///< jump cap, generalized model only
  double delta_t = kDailyStep;
  std::array<Bound, 5> bounds{};  ///< mu, sigma, lambda, mu_q, sigma_q

  /// Default boxes: mu [-2, 2], sigma [1e-4, 2], lambda [0, 1/dt],
  /// mu_q [-0.5, 0.5], sigma_q [1e-6, 0.5].
  static ModelSpec defaults(ModelKind kind, int m = 5, double delta_t = kDailyStep);

  /// Sets the lambda upper bound (per year); capped at 1 / delta_t.
  ModelSpec& with_lambda_cap(double cap);

  std::size_t dimension() const noexcept { return kind == ModelKind::pure_diffusion ? 2 : 5; }
  std::vector<Bound> active_bounds() const;
  std::vector<double> to_vector(const JumpDiffusionParams& p) const;
  /// Jump fields are zero for the pure diffusion.
  JumpDiffusionParams from_vector(std::span<const double> x) const;
  bool contains(const JumpDiffusionParams& p) const;

  /// @throws std::invalid_argument on non-finite or inverted bounds, lambda
  ///         bound above 1 / delta_t, m < 1 or delta_t <= 0.
  void validate() const;
};

struct FitResult {
  JumpDiffusionParams params;
  double log_likelihood = 0.0;
  bool converged = false;  ///< final DE generation improved the best by < 1e-8
  long evaluations = 0;
};

/// (1 - lambda dt) N(a, sigma^2 dt) + lambda dt N(a + mu_q, sigma^2 dt + sigma_q^2),
/// a = (mu - sigma^2/2) dt.
/// @throws std::invalid_argument when lambda dt is outside [0, 1].
double ball_torous_density(double y, const JumpDiffusionParams& params, double delta_t);

/// sum_{k=0}^{m} p_k N(a + k mu_q, sigma^2 dt + k sigma_q^2) with the
/// truncated Poisson weights of poisson_weights(lambda dt, m).
/// @throws std::invalid_argument when lambda dt > 1 or m < 1.
double generalized_density(double y, const JumpDiffusionParams& params, double delta_t, int m);

/// Density of one step under `spec`.
double model_density(double y, const JumpDiffusionParams& params, const ModelSpec& spec);

/// sum_t max(log f(y_t), kLogDensityFloor).
/// @throws std::invalid_argument on an empty sample or params outside the box.
double log_likelihood(std::span<const double> returns, const JumpDiffusionParams& params, const ModelSpec& spec);
inline double log_likelihood(const ReturnSeries& returns, const JumpDiffusionParams& params,
                             const ModelSpec& spec) {
  return log_likelihood(returns.values(), params, spec);
}

/// Closed-form pure-diffusion MLE: sigma^2 = v / dt and mu = m / dt + sigma^2 / 2
/// with m the sample mean and v the 1/N sample variance.
/// @throws DataError with fewer than 2 observations or zero spread.
JumpDiffusionParams normal_mle(std::span<const double> returns, double delta_t);

/// Maximizes the likelihood with differential evolution over the spec's box.
/// `config.bounds` is overwritten by the spec. `seeds` are extra initial
/// population members (parameter sets, clamped into the box).
/// @throws NumericalError when every candidate has a non-finite likelihood.
FitResult fit(std::span<const double> returns, const ModelSpec& spec, DEConfig config,
              const DEMemory* memory = nullptr, std::span<const JumpDiffusionParams> seeds = {});

}  // namespace semivar
