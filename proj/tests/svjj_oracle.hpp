#pragma once

// Brute-force posterior for the SVJJ sampler checks, shared by the unit tests
// and the acceptance binary. Only the library's types and the path simulator
// are used; every density is written out here.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "semivar/svjj.hpp"
#include "semivar/svjj_mcmc.hpp"
#include "semivar/svjj_simulate.hpp"
#include "test_support.hpp"

namespace testing_support {

using semivar::PriorSpec;
using semivar::SamplerView;
using semivar::SVJJLatentState;
using semivar::SVJJParams;

inline double log_normal_pdf(double x, double m, double var) {
  return -0.5 * std::log(2 * std::numbers::pi * var) - 0.5 * (x - m) * (x - m) / var;
}

// Joint log posterior of everything, written out term by term without the
// library's conditionals: diffusion pair by explicit 2x2 inversion, jump sizes
// in closed form, counts from Boost's Poisson with the tail folded into m.
struct Problem {
  std::vector<double> y;
  SVJJParams p;
  SVJJLatentState st;
  PriorSpec pr;
  int m = 3;

  SamplerView view() const { return {y, p, st, pr, m}; }

  double log_prior(const SVJJParams& q) const {
    if (!(q.kappa > 0 && q.theta > 0 && std::abs(q.rho) < 1 && q.sigma_nu > 0 && q.sigma_y > 0 && q.mu_nu > 0 &&
          q.lambda > 0 && q.lambda < 1)) {
      return -INFINITY;
    }
    const double snu2 = q.sigma_nu * q.sigma_nu, sy2 = q.sigma_y * q.sigma_y, rate = 1 / q.mu_nu;
    return log_normal_pdf(q.mu, pr.mu_mean, pr.mu_var) + log_normal_pdf(q.kappa, pr.kappa_mean, pr.kappa_var) +
           log_normal_pdf(q.theta, pr.theta_mean, pr.theta_var) + log_normal_pdf(q.mu_y, pr.mu_y_mean, pr.mu_y_var) +
           log_normal_pdf(q.rho_j, pr.rho_j_mean, pr.rho_j_var) +
           std::log(boost::math::pdf(boost::math::inverse_gamma_distribution<double>(pr.sigma_nu2_shape, pr.sigma_nu2_scale), snu2)) +
           std::log(boost::math::pdf(boost::math::inverse_gamma_distribution<double>(pr.sigma_y2_shape, pr.sigma_y2_scale), sy2)) +
           std::log(boost::math::pdf(boost::math::gamma_distribution<double>(pr.mu_nu_rate_shape, pr.mu_nu_rate_scale), rate)) +
           std::log(boost::math::pdf(boost::math::beta_distribution<double>(pr.lambda_a, pr.lambda_b), q.lambda));
  }

  double log_joint(const SVJJParams& q, const SVJJLatentState& s) const {
    double lp = log_prior(q);
    if (!std::isfinite(lp)) return lp;
    std::vector<double> log_pj(static_cast<std::size_t>(m) + 1);
    const boost::math::poisson_distribution<double> pois(q.lambda);
    for (int j = 0; j <= m; ++j) {
      log_pj[j] = std::log(j < m ? boost::math::pdf(pois, j) : boost::math::cdf(boost::math::complement(pois, m - 1)));
    }
    for (std::size_t t = 1; t < y.size(); ++t) {
      const double vp = s.v[t - 1];
      if (!(vp > 0) || !(s.v[t] > 0) || !(s.xi_nu[t] > 0)) return -INFINITY;
      const int j = s.jumps[t];
      const double c00 = vp, c01 = vp * q.rho * q.sigma_nu, c11 = vp * q.sigma_nu * q.sigma_nu;
      const double det = c00 * c11 - c01 * c01;
      const double e1 = y[t] - q.mu - (j ? s.xi_y[t] : 0.0);
      const double e2 = s.v[t] - vp - q.kappa * (q.theta - vp) - (j ? s.xi_nu[t] : 0.0);
      lp += -std::log(2 * std::numbers::pi) - 0.5 * std::log(det) -
            0.5 * (c11 * e1 * e1 - 2 * c01 * e1 * e2 + c00 * e2 * e2) / det;
      lp += log_pj[j];
      const int k = std::max(j, 1);
      const double x = s.xi_nu[t];
      lp += (k - 1) * std::log(x) - x / q.mu_nu - std::lgamma(k) - k * std::log(q.mu_nu);
      lp += log_normal_pdf(s.xi_y[t], k * q.mu_y + q.rho_j * x, k * q.sigma_y * q.sigma_y);
    }
    return lp;
  }

  std::function<double(double)> over_param(std::function<void(SVJJParams&, double)> set) const {
    return [this, set](double x) {
      auto q = p;
      set(q, x);
      return log_joint(q, st);
    };
  }

  std::function<double(double)> over_state(std::function<void(SVJJLatentState&, double)> set) const {
    return [this, set](double x) {
      auto s = st;
      set(s, x);
      return log_joint(p, s);
    };
  }
};

inline Problem make_problem(double rho, std::uint64_t seed) {
  const SVJJParams truth{0.05, 0.6, 0.8, rho, 0.25, -1.0, 1.5, 0.2, 0.3, 0.08};
  const auto path = semivar::simulate_daily_path(truth, 300, truth.theta, 3, seed);
  Problem pr;
  for (double r : path.log_returns) pr.y.push_back(100 * r);
  pr.st = path.state;
  Gen gen(seed);
  for (std::size_t t = 0; t < pr.st.size(); ++t) {
    pr.st.v[t] = std::max(pr.st.v[t], 0.05);
    if (pr.st.jumps[t] == 0) {
      // One-jump pseudo-prior sizes, as the sampler keeps them.
      pr.st.xi_nu[t] = -truth.mu_nu * std::log(gen.uniform(0, 1));
      pr.st.xi_y[t] = gen.normal(truth.mu_y + truth.rho_j * pr.st.xi_nu[t], truth.sigma_y);
    }
  }
  // The current draw need not be the truth.
  pr.p = truth;
  pr.p.mu = 0.02;
  pr.p.kappa = 0.5;
  pr.p.theta = 0.9;
  pr.p.sigma_nu = 0.3;
  pr.p.sigma_y = 1.3;
  pr.p.lambda = 0.1;
  return pr;
}

inline std::size_t first_day_with(const Problem& pr, int jumps) {
  for (std::size_t t = 1; t + 1 < pr.st.size(); ++t) {
    if (pr.st.jumps[t] == jumps) return t;
  }
  return 0;
}

// Walks out from `center` until the log density has fallen 40 below its peak.
inline std::pair<double, double> support(const std::function<double(double)>& log_f, double center, double step,
                                  double floor = -INFINITY) {
  double peak = log_f(center);
  for (int i = -400; i <= 400; ++i) {
    const double x = center + 0.05 * i * step;
    if (x > floor) peak = std::max(peak, log_f(x));
  }
  double lo = center, hi = center;
  while (lo - step > floor && log_f(lo) > peak - 40) lo -= step;
  if (lo - step <= floor) lo = floor;
  while (log_f(hi) > peak - 40) hi += step;
  return {lo, hi};
}

// Trapezoid CDF on a fine grid. The integrands are smooth and vanish at the
// ends, so this is far more accurate than the tests need and, unlike adaptive
// quadrature, is not fooled by roundoff in a joint summed over hundreds of days.
class GridCdf {
 public:
  GridCdf(std::vector<double> density, double lo, double hi)
      : lo_(lo), h_((hi - lo) / static_cast<double>(density.size() - 1)), f_(std::move(density)), cum_(f_.size(), 0.0) {
    for (std::size_t i = 1; i < f_.size(); ++i) cum_[i] = cum_[i - 1] + 0.5 * (f_[i - 1] + f_[i]);
  }
  double operator()(double x) const {
    const double u = (x - lo_) / h_;
    if (u <= 0) return 0.0;
    if (u >= static_cast<double>(f_.size() - 1)) return 1.0;
    const auto i = static_cast<std::size_t>(u);
    const double w = u - static_cast<double>(i);
    // Integral of the linear interpolant up to x.
    return (cum_[i] + w * f_[i] + 0.5 * w * w * (f_[i + 1] - f_[i])) / cum_.back();
  }

 private:
  double lo_, h_;
  std::vector<double> f_, cum_;
};

struct Oracle {
  GridCdf cdf;
  double lo, hi;
};

inline Oracle oracle(const std::function<double(double)>& log_f, double center, double step, double floor = -INFINITY) {
  const auto [lo, hi] = support(log_f, center, step, floor);
  const int n = 8001;
  std::vector<double> logs(n);
  double peak = -INFINITY;
  for (int i = 0; i < n; ++i) peak = std::max(peak, logs[i] = log_f(lo + (hi - lo) * i / (n - 1)));
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::isfinite(logs[i]) ? std::exp(logs[i] - peak) : 0.0;
  return {GridCdf(std::move(f), lo, hi), lo, hi};
}

}  // namespace testing_support
