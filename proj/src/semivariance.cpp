#include "semivar/semivariance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semivar {

namespace {

// Below z = -3 the direct formula loses digits to cancellation: both
// (z^2 + 1) Phi(z) and -z phi(z) approach phi(z) / |z| while their sum is of
// order phi(z) / |z|^3.
constexpr double kTailSwitch = -3.0;

// Standardized semivariance g(z) = E[(z - X)^2 ; X < z], X ~ N(0, 1).
double standard_semivariance(double z) {
  if (z > kTailSwitch) {
    const double cdf = std_normal_cdf(z);
    return (z * z + 1.0) * cdf + z * std_normal_pdf(z);
  }
  // With x = -z: g = phi(x) * J2(x), J_n(x) = int_0^inf s^n exp(-x s - s^2/2) ds.
  // J_n / J_{n-1} = n / (x + J_{n+1} / J_n), evaluated backward.
  const double x = -z;
  double r = 0.0;
  for (int n = 80; n >= 2; --n) r = n / (x + r);
  const double r2 = r;
  const double r1 = 1.0 / (x + r2);
  const double j0 = 1.0 / (x + r1);
  return std_normal_pdf(x) * j0 * r1 * r2;
}

}  // namespace

SemivarianceQuery SemivarianceQuery::for_horizon(double horizon, double threshold, int jump_cap,
                                                 double delta_t) {
  SemivarianceQuery q;
  q.threshold = threshold;
  q.horizon = horizon;
  q.jump_cap = jump_cap;
  q.k_max = default_k_max(horizon, delta_t, jump_cap);
  return q;
}

void SemivarianceQuery::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (jump_cap < 1) throw std::invalid_argument("jump cap must be >= 1");
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  if (!std::isfinite(threshold)) throw std::invalid_argument("threshold must be finite");
}

double normal_semivariance(double mean, double sd, double threshold) {
  if (!(sd > 0.0)) throw std::invalid_argument("normal_semivariance: sd must be > 0");
  return sd * sd * standard_semivariance((threshold - mean) / sd);
}

SemivarianceResult jump_diffusion_semivariance(const JumpDiffusionParams& params,
                                               const SemivarianceQuery& query) {
  params.validate();
  query.validate();
  const auto components = mixture_components(params, query.horizon, query.k_max);
  double total = 0.0;
  double mass = 0.0;
  for (const auto& c : components) {
    mass += c.weight;
    if (c.weight == 0.0) continue;
    total += c.weight * normal_semivariance(c.mean, std::sqrt(c.variance), query.threshold);
  }
  SemivarianceResult r;
  r.semivariance = total;
  r.semideviation = std::sqrt(total);
  r.truncation_tail = std::clamp(1.0 - mass, 0.0, 1.0);
  return r;
}

SemivarianceResult pure_diffusion_semivariance(double mu, double sigma, double t, double threshold) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (!(t > 0.0)) throw std::invalid_argument("horizon must be > 0");
  SemivarianceResult r;
  r.semivariance = normal_semivariance((mu - 0.5 * sigma * sigma) * t, std::sqrt(sigma * sigma * t), threshold);
  r.semideviation = std::sqrt(r.semivariance);
  return r;
}

double sqrt_time_semideviation(double daily_semideviation, int steps_per_year) {
  if (daily_semideviation < 0.0 || steps_per_year < 0) {
    throw std::invalid_argument("sqrt-time scaling needs nonnegative inputs");
  }
  return daily_semideviation * std::sqrt(static_cast<double>(steps_per_year));
}

}  // namespace semivar
