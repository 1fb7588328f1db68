#pragma once

/**
 * @file gaussmix.hpp
 * @brief Scalar probability kernel for the constant-volatility jump-diffusion.
 *
 * Over a horizon t the log-return of a Merton jump-diffusion is a Poisson
 * mixture of Gaussians: with k jumps it is N((mu - sigma^2/2) t + k mu_q,
 * sigma^2 t + k sigma_q^2), and k ~ Poisson(lambda t).
 */

#include <cstddef>
#include <vector>

namespace semivar {

/// Constant-volatility jump-diffusion parameters. Time unit: years.
struct JumpDiffusionParams {
  double mu = 0.0;       ///< drift per year
  double sigma = 0.1;    ///< diffusion volatility per sqrt(year), > 0
  double lambda = 0.0;   ///< jump intensity per year, >= 0
  double mu_q = 0.0;     ///< mean log jump size
  double sigma_q = 0.0;  ///< std of log jump size, >= 0

  /// @throws std::invalid_argument when sigma <= 0, lambda < 0, sigma_q < 0 or
  ///         any field is not finite.
  void validate() const;
};

struct PoissonWeights {
  std::vector<double> weights;  ///< p_0 .. p_m; p_m holds the tail mass
  double lambda_t = 0.0;
  int m = 1;
};

struct MixtureComponent {
  double weight;
  double mean;
  double variance;
};

struct Moments {
  double mean;
  double variance;
};

double std_normal_pdf(double x) noexcept;
/// Phi(x) via erfc; relative accuracy near machine precision in both tails.
double std_normal_cdf(double x) noexcept;
double normal_pdf(double x, double mean, double variance) noexcept;

/// Truncated Poisson law of the number of jumps in one period: p_k is the
/// Poisson probability for k < m and p_m = 1 - sum_{k<m} p_k.
/// @throws std::invalid_argument when m < 1 or lambda_t < 0.
PoissonWeights poisson_weights(double lambda_t, int m);

/// Upper bound on P(more than m jumps in a period) when lambda * dt < 1:
/// 1 - sum_{k=0}^{m} e^{-1} / k!. Summed from the tail for accuracy.
double poisson_tail_bound(int m);

/// Poisson probabilities P(N = k), k = 0..k_max, for N ~ Poisson(lambda_t).
/// Built by the multiplicative recurrence outward from the mode so that large
/// lambda_t neither overflows nor underflows the central terms.
std::vector<double> poisson_pmf(double lambda_t, int k_max);

/// Mixture components k = 0..k_max of the t-horizon log-return. The weights
/// sum to 1 minus the Poisson tail beyond k_max.
std::vector<MixtureComponent> mixture_components(const JumpDiffusionParams& params, double t,
                                                 int k_max);

/// A Gaussian mixture with its components fixed; cheap repeated evaluation.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<MixtureComponent> components);
  GaussianMixture(const JumpDiffusionParams& params, double t, int k_max);

  double density(double y) const noexcept;
  const std::vector<MixtureComponent>& components() const noexcept { return components_; }
  double total_weight() const noexcept;
  Moments moments() const noexcept;

 private:
  std::vector<MixtureComponent> components_;
  std::vector<double> norm_;  // weight / sqrt(2 pi variance)
};

double mixture_density(double y, const JumpDiffusionParams& params, double t, int k_max);

/// Mean and variance of the compound Poisson sum of jumps over t:
/// (lambda t mu_q, lambda t (sigma_q^2 + mu_q^2)).
Moments compound_poisson_moments(const JumpDiffusionParams& params, double t);

/// Normal law the t-horizon log-return approaches when many jumps occur:
/// N((mu - sigma^2/2 + lambda mu_q) t, (sigma^2 + lambda (sigma_q^2 + mu_q^2)) t).
Moments normal_limit_params(const JumpDiffusionParams& params, double t);

/// Series truncation m * n with n = t / delta_t periods (at least one period).
int default_k_max(double t, double delta_t, int m = 5);

}  // namespace semivar
