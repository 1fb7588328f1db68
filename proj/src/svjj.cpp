#include "semivar/svjj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "semivar/gaussmix.hpp"

namespace semivar {

const std::array<std::string_view, SVJJParams::kCount>& SVJJParams::names() noexcept {
  static const std::array<std::string_view, kCount> n{"mu",      "kappa", "theta", "rho",   "sigma_nu",
                                                      "mu_y",    "sigma_y", "rho_j", "mu_nu", "lambda"};
  return n;
}

std::array<double, SVJJParams::kCount> SVJJParams::to_array() const noexcept {
  return {mu, kappa, theta, rho, sigma_nu, mu_y, sigma_y, rho_j, mu_nu, lambda};
}

SVJJParams SVJJParams::from_array(const std::array<double, kCount>& a) noexcept {
  return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9]};
}

namespace {

void check_common(const SVJJParams& p) {
  for (double x : p.to_array()) {
    if (!std::isfinite(x)) throw std::invalid_argument("SVJJ parameters must be finite");
  }
  if (!(p.kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  if (!(p.theta > 0.0)) throw std::invalid_argument("theta must be > 0");
  if (!(std::abs(p.rho) < 1.0)) throw std::invalid_argument("rho must lie in (-1, 1)");
  if (!(p.lambda >= 0.0 && p.lambda < 1.0)) throw std::invalid_argument("lambda must lie in [0, 1)");
}

}  // namespace

void SVJJParams::validate() const {
  check_common(*this);
  if (!(sigma_nu > 0.0)) throw std::invalid_argument("sigma_nu must be > 0");
  if (!(sigma_y > 0.0)) throw std::invalid_argument("sigma_y must be > 0");
  if (!(mu_nu > 0.0)) throw std::invalid_argument("mu_nu must be > 0");
}

void SVJJParams::validate_for_simulation() const {
  check_common(*this);
  if (sigma_nu < 0.0 || sigma_y < 0.0 || mu_nu < 0.0) {
    throw std::invalid_argument("sigma_nu, sigma_y and mu_nu must be >= 0");
  }
}

std::array<double, SVJJParams::kCount> unit_factors(double f) noexcept {
  return {f, 1.0, f * f, 1.0, f, f, f, 1.0 / f, f * f, 1.0};
}

SVJJParams rescale(const SVJJParams& params, double f) noexcept {
  auto a = params.to_array();
  const auto k = unit_factors(f);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] *= k[j];
  return SVJJParams::from_array(a);
}

void SVJJLatentState::validate(int m) const {
  const auto n = v.size();
  if (jumps.size() != n || xi_y.size() != n || xi_nu.size() != n) {
    throw std::invalid_argument("latent state vectors must have equal lengths");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (!(v[t] > 0.0)) throw std::invalid_argument("V must be > 0 (day " + std::to_string(t) + ")");
    if (!(xi_nu[t] >= 0.0)) throw std::invalid_argument("xi_nu must be >= 0 (day " + std::to_string(t) + ")");
    if (jumps[t] < 0 || jumps[t] > m) throw std::invalid_argument("jump count out of range (day " + std::to_string(t) + ")");
  }
}

void PriorSpec::validate() const {
  const auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be > 0");
  };
  positive(mu_var, "mu prior variance");
  positive(kappa_var, "kappa prior variance");
  positive(theta_var, "theta prior variance");
  positive(sigma_nu2_shape, "sigma_nu^2 prior shape");
  positive(sigma_nu2_scale, "sigma_nu^2 prior scale");
  positive(mu_y_var, "mu_y prior variance");
  positive(rho_j_var, "rho_j prior variance");
  positive(sigma_y2_shape, "sigma_y^2 prior shape");
  positive(sigma_y2_scale, "sigma_y^2 prior scale");
  positive(mu_nu_rate_shape, "mu_nu rate prior shape");
  positive(mu_nu_rate_scale, "mu_nu rate prior scale");
  positive(lambda_a, "lambda prior a");
  positive(lambda_b, "lambda prior b");
}

double bivariate_log_density(double dy, double dv, double v_prev, double jump_y, double jump_v,
                             const SVJJParams& p) noexcept {
  const double one_minus_r2 = 1.0 - p.rho * p.rho;
  if (!(v_prev > 0.0) || !(p.sigma_nu > 0.0) || !(one_minus_r2 > 0.0)) return kSingularLogDensity;
  const double e1 = dy - p.mu - jump_y;
  const double e2 = dv - p.kappa * (p.theta - v_prev) - jump_v;
  const double s = p.sigma_nu;
  const double quad = (s * s * e1 * e1 - 2.0 * p.rho * s * e1 * e2 + e2 * e2) / (s * s * v_prev * one_minus_r2);
  const double log_det = 2.0 * std::log(v_prev) + 2.0 * std::log(s) + std::log(one_minus_r2);
  return -std::log(2.0 * std::numbers::pi) - 0.5 * log_det - 0.5 * quad;
}

double bivariate_loglik(std::size_t t, std::span<const double> y, const SVJJParams& params,
                        const SVJJLatentState& state, int jumps_override) {
  if (t == 0 || t >= y.size() || t >= state.size()) throw std::out_of_range("bivariate_loglik: day out of range");
  const int k = jumps_override >= 0 ? jumps_override : state.jumps[t];
  const double jy = k >= 1 ? state.xi_y[t] : 0.0;
  const double jv = k >= 1 ? state.xi_nu[t] : 0.0;
  return bivariate_log_density(y[t], state.v[t] - state.v[t - 1], state.v[t - 1], jy, jv, params);
}

double jump_size_log_density(double xi_y, double xi_nu, int k, const SVJJParams& p) noexcept {
  if (k < 1 || !(xi_nu > 0.0) || !(p.mu_nu > 0.0) || !(p.sigma_y > 0.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  const double log_gamma = (k - 1) * std::log(xi_nu) - xi_nu / p.mu_nu - std::lgamma(static_cast<double>(k)) -
                           k * std::log(p.mu_nu);
  const double var = k * p.sigma_y * p.sigma_y;
  const double z = xi_y - k * p.mu_y - p.rho_j * xi_nu;
  const double log_normal = -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * z * z / var;
  return log_gamma + log_normal;
}

std::vector<double> jump_count_log_prior(double lambda, int m) {
  const auto w = poisson_weights(lambda, m);
  std::vector<double> out(w.weights.size());
  std::transform(w.weights.begin(), w.weights.end(), out.begin(), [](double p) {
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  });
  return out;
}

std::vector<double> jump_count_posterior(std::size_t t, std::span<const double> y, const SVJJParams& params,
                                         const SVJJLatentState& state, int m) {
  const auto log_prior = jump_count_log_prior(params.lambda, m);
  const double ll0 = bivariate_loglik(t, y, params, state, 0);
  const double ll1 = bivariate_loglik(t, y, params, state, 1);  // same for every k >= 1
  std::vector<double> logw(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) {
    logw[k] = log_prior[k] + (k == 0 ? ll0 : ll1) +
              jump_size_log_density(state.xi_y[t], state.xi_nu[t], std::max(k, 1), params);
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> prob(logw.size(), 0.0);
  if (!std::isfinite(top)) {
    prob[0] = 1.0;  // every configuration impossible: fall back to no jump
    return prob;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    prob[k] = std::exp(logw[k] - top);
    total += prob[k];
  }
  for (double& p : prob) p /= total;
  return prob;
}

}  // namespace semivar
