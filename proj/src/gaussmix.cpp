#include "semivar/gaussmix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace semivar {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

}  // namespace

void JumpDiffusionParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(lambda) ||
      !std::isfinite(mu_q) || !std::isfinite(sigma_q)) {
    throw std::invalid_argument("jump-diffusion parameters must be finite");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (sigma_q < 0.0) throw std::invalid_argument("sigma_q must be >= 0");
}

double std_normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x, double mean, double variance) noexcept {
  const double z = x - mean;
  return kInvSqrt2Pi / std::sqrt(variance) * std::exp(-0.5 * z * z / variance);
}

std::vector<double> poisson_pmf(double lambda_t, int k_max) {
  if (lambda_t < 0.0 || !std::isfinite(lambda_t)) throw std::invalid_argument("lambda_t must be >= 0");
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(k_max) + 1, 0.0);
  if (lambda_t == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const int mode = std::min(k_max, static_cast<int>(std::floor(lambda_t)));
  const double log_mode = -lambda_t + mode * std::log(lambda_t) - std::lgamma(mode + 1.0);
  p[static_cast<std::size_t>(mode)] = std::exp(log_mode);
  for (int k = mode; k < k_max; ++k) p[k + 1] = p[k] * lambda_t / (k + 1);
  for (int k = mode; k > 0; --k) p[k - 1] = p[k] * k / lambda_t;
  return p;
}

PoissonWeights poisson_weights(double lambda_t, int m) {
  if (m < 1) throw std::invalid_argument("jump cap m must be >= 1, got " + std::to_string(m));
  PoissonWeights w;
  w.lambda_t = lambda_t;
  w.m = m;
  w.weights = poisson_pmf(lambda_t, m);
  // p_m = 1 - sum_{k<m} p_k = P(N >= m), evaluated as the regularized lower
  // incomplete gamma P(m, lambda t) so that small tails keep their digits.
  w.weights[m] = lambda_t == 0.0 ? 0.0 : boost::math::gamma_p(static_cast<double>(m), lambda_t);
  return w;
}

double poisson_tail_bound(int m) {
  if (m < 1) throw std::invalid_argument("jump cap m must be >= 1");
  // sum_{k > m} e^{-1} / k!, smallest terms first.
  double term = std::exp(-1.0);
  for (int k = 1; k <= m + 1; ++k) term /= k;
  std::vector<double> terms;
  while (term > 0.0 && term > 1e-40) {
    terms.push_back(term);
    term /= static_cast<double>(m + 1 + terms.size());
  }
  double tail = 0.0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) tail += *it;
  return tail;
}

std::vector<MixtureComponent> mixture_components(const JumpDiffusionParams& params, double t,
                                                 int k_max) {
  params.validate();
  if (!(t > 0.0)) throw std::invalid_argument("horizon t must be > 0");
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  const auto p = poisson_pmf(params.lambda * t, k_max);
  const double base_mean = (params.mu - 0.5 * params.sigma * params.sigma) * t;
  const double base_var = params.sigma * params.sigma * t;
  std::vector<MixtureComponent> out;
  out.reserve(p.size());
  for (int k = 0; k <= k_max; ++k) {
    out.push_back({p[k], base_mean + k * params.mu_q, base_var + k * params.sigma_q * params.sigma_q});
  }
  return out;
}

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  std::erase_if(components_, [](const MixtureComponent& c) { return c.weight <= 0.0; });
  norm_.reserve(components_.size());
  for (const auto& c : components_) {
    if (!(c.variance > 0.0)) throw std::invalid_argument("mixture component variance must be > 0");
    norm_.push_back(c.weight * kInvSqrt2Pi / std::sqrt(c.variance));
  }
}

GaussianMixture::GaussianMixture(const JumpDiffusionParams& params, double t, int k_max)
    : GaussianMixture(mixture_components(params, t, k_max)) {}

double GaussianMixture::density(double y) const noexcept {
  double f = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const double z = y - components_[k].mean;
    f += norm_[k] * std::exp(-0.5 * z * z / components_[k].variance);
  }
  return f;
}

double GaussianMixture::total_weight() const noexcept {
  double w = 0.0;
  for (const auto& c : components_) w += c.weight;
  return w;
}

Moments GaussianMixture::moments() const noexcept {
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (const auto& c : components_) {
    w += c.weight;
    m1 += c.weight * c.mean;
    m2 += c.weight * (c.variance + c.mean * c.mean);
  }
  const double mean = m1 / w;
  return {mean, m2 / w - mean * mean};
}

double mixture_density(double y, const JumpDiffusionParams& params, double t, int k_max) {
  return GaussianMixture(params, t, k_max).density(y);
}

Moments compound_poisson_moments(const JumpDiffusionParams& params, double t) {
  const double lt = params.lambda * t;
  return {lt * params.mu_q, lt * (params.sigma_q * params.sigma_q + params.mu_q * params.mu_q)};
}

Moments normal_limit_params(const JumpDiffusionParams& params, double t) {
  const double s2 = params.sigma * params.sigma;
  return {(params.mu - 0.5 * s2 + params.lambda * params.mu_q) * t,
          (s2 + params.lambda * (params.sigma_q * params.sigma_q + params.mu_q * params.mu_q)) * t};
}

int default_k_max(double t, double delta_t, int m) {
  const auto n = std::max(1L, std::lround(t / delta_t));
  return static_cast<int>(m * n);
}

}  // namespace semivar
