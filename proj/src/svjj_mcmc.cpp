#include "semivar/svjj_mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "semivar/errors.hpp"
#include "semivar/gaussmix.hpp"

namespace semivar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double jump_y_of(const SVJJLatentState& s, std::size_t t) { return s.jumps[t] >= 1 ? s.xi_y[t] : 0.0; }
double jump_v_of(const SVJJLatentState& s, std::size_t t) { return s.jumps[t] >= 1 ? s.xi_nu[t] : 0.0; }
int effective_count(const SVJJLatentState& s, std::size_t t) { return std::max(s.jumps[t], 1); }

// Residuals of day t >= 1 under the current draw.
struct DayResidual {
  double e1, e2, v_prev;
};

DayResidual residual(const SamplerView& s, std::size_t t) {
  const auto& p = s.params;
  const double vp = s.state.v[t - 1];
  const double e1 = s.y[t] - p.mu - jump_y_of(s.state, t);
  const double e2 = (s.state.v[t] - vp) - p.kappa * (p.theta - vp) - jump_v_of(s.state, t);
  return {e1, e2, vp};
}

// Sufficient statistics of the diffusion residuals: sums of e1^2/V, e2^2/V,
// e1 e2/V over days 1..T-1.
struct ResidualSums {
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;
  double n = 0.0;
};

ResidualSums residual_sums(const SamplerView& s) {
  ResidualSums r;
  for (std::size_t t = 1; t < s.y.size(); ++t) {
    const auto d = residual(s, t);
    r.s11 += d.e1 * d.e1 / d.v_prev;
    r.s22 += d.e2 * d.e2 / d.v_prev;
    r.s12 += d.e1 * d.e2 / d.v_prev;
    r.n += 1.0;
  }
  return r;
}

// Robert (1995) exponential rejection for N(0,1) restricted to [a, inf), a > 0.
double std_normal_tail(double a, Rng& rng) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential(1.0 / alpha);
    const double d = z - alpha;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

// N(0,1) restricted to [a, b].
double std_normal_interval(double a, double b, Rng& rng) {
  if (a >= b) return a;
  if (!std::isfinite(a) && !std::isfinite(b)) return rng.normal();
  if (b <= 0.0 && std::isfinite(b)) return -std_normal_interval(-b, -a, rng);
  if (a >= 0.0) {
    // Tail or slab on the positive side.
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    if (b - a > 1.0 / alpha) {
      if (a < 0.5) {
        for (;;) {
          const double z = rng.normal();
          if (z >= a && z <= b) return z;
        }
      }
      for (;;) {
        const double z = std_normal_tail(a, rng);
        if (z <= b) return z;
      }
    }
    for (;;) {
      const double z = a + (b - a) * rng.uniform();
      if (rng.uniform() <= std::exp(0.5 * (a * a - z * z))) return z;
    }
  }
  // a < 0 < b
  if (b - a >= std::sqrt(2.0 * std::numbers::pi)) {
    for (;;) {
      const double z = rng.normal();
      if (z >= a && z <= b) return z;
    }
  }
  for (;;) {
    const double z = a + (b - a) * rng.uniform();
    if (rng.uniform() <= std::exp(-0.5 * z * z)) return z;
  }
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

double sample_variance(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / (n - 1.0);
}

}  // namespace

// --- initialization ---------------------------------------------------------

int most_likely_jump_count(double xi_nu, double mu_nu, int m) {
  if (m < 1) throw std::invalid_argument("jump cap m must be >= 1");
  if (!(mu_nu > 0.0)) throw std::invalid_argument("mu_nu must be > 0");
  // f(k+1) / f(k) = xi / (mu_nu k): increase k while the ratio exceeds 1.
  int k = 1;
  while (k < m && xi_nu > mu_nu * k) ++k;
  return k;
}

InitialEstimate init_latent_state(std::span<const double> y, int m, const InitOptions& options) {
  const std::size_t n = y.size();
  if (n < 90) throw DataError("SVJJ initialization needs at least 90 observations, got " + std::to_string(n));
  if (m < 1) throw std::invalid_argument("jump cap m must be >= 1");
  const std::size_t w = std::min(options.variance_window, n);
  if (w < 2) throw std::invalid_argument("variance window must be >= 2");

  InitialEstimate out;
  auto& st = out.state;
  st.v.assign(n, 0.0);
  st.jumps.assign(n, 0);
  st.xi_y.assign(n, 0.0);
  st.xi_nu.assign(n, 0.0);

  const double total_var = sample_variance(y);
  const double v_floor = total_var > 0.0 ? 1e-6 * total_var : 1e-12;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t first = t + 1 >= w ? t + 1 - w : 0;
    st.v[t] = std::max(sample_variance(y.subspan(first, w)), v_floor);
  }

  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  const double median = quantile_sorted(sorted, 0.5);
  std::vector<double> dev(n);
  for (std::size_t t = 0; t < n; ++t) dev[t] = std::abs(y[t] - median);
  std::sort(dev.begin(), dev.end());
  double scale = 1.4826 * quantile_sorted(dev, 0.5);
  if (!(scale > 0.0)) scale = std::sqrt(total_var);
  // A constant series can still show a rounding-level variance.
  out.degenerate = sorted.front() == sorted.back() || !(scale > 0.0);

  std::vector<std::size_t> jump_days;
  if (!out.degenerate) {
    for (std::size_t t = 1; t < n; ++t) {
      if (std::abs(y[t] - median) > options.jump_threshold * scale) jump_days.push_back(t);
    }
  }

  double mean_v = std::accumulate(st.v.begin(), st.v.end(), 0.0) / static_cast<double>(n);
  double up_sum = 0.0;
  int up_count = 0;
  for (auto t : jump_days) {
    const double dv = st.v[t] - st.v[t - 1];
    if (dv > 0.0) {
      up_sum += dv;
      ++up_count;
    }
  }
  auto& p = out.params;
  p.mu_nu = up_count > 0 ? up_sum / up_count : 0.01 * mean_v;
  const double xi_floor = 0.01 * p.mu_nu;

  double jy_sum = 0.0, jy_sq = 0.0;
  for (auto t : jump_days) {
    st.xi_y[t] = y[t];
    st.xi_nu[t] = std::max(st.v[t] - st.v[t - 1], xi_floor);
    st.jumps[t] = most_likely_jump_count(st.xi_nu[t], p.mu_nu, m);
    jy_sum += y[t];
    jy_sq += y[t] * y[t];
  }
  const double nj = static_cast<double>(jump_days.size());
  out.jump_fraction = nj / static_cast<double>(n - 1);

  double nonjump_sum = 0.0;
  std::size_t nonjump_count = 0;
  for (std::size_t t = 1; t < n; ++t) {
    if (st.jumps[t] == 0) {
      nonjump_sum += y[t];
      ++nonjump_count;
    }
  }
  p.mu = nonjump_count > 0 ? nonjump_sum / static_cast<double>(nonjump_count) : 0.0;
  p.theta = mean_v;
  p.kappa = 0.1;
  p.rho = 0.0;
  std::vector<double> dv;
  for (std::size_t t = 1; t < n; ++t) {
    if (st.jumps[t] == 0) dv.push_back(st.v[t] - st.v[t - 1]);
  }
  const double dv_sd = dv.size() > 1 ? std::sqrt(sample_variance(dv)) : 0.0;
  p.sigma_nu = std::max(dv_sd / std::sqrt(p.theta), 0.1 * std::sqrt(p.theta));
  p.mu_y = nj > 0 ? jy_sum / nj : 0.0;
  const double jy_var = nj > 1 ? (jy_sq - nj * p.mu_y * p.mu_y) / (nj - 1.0) : 0.0;
  p.sigma_y = jy_var > 0.0 ? std::sqrt(jy_var) : 2.0 * std::sqrt(std::max(total_var, 1e-12));
  p.rho_j = 0.0;
  p.lambda = std::clamp(out.jump_fraction, 1e-4, 0.5);

  for (std::size_t t = 0; t < n; ++t) {
    if (st.jumps[t] == 0) {
      st.xi_y[t] = p.mu_y;
      st.xi_nu[t] = p.mu_nu;
    }
  }
  return out;
}

// --- conditionals -----------------------------------------------------------

NormalLaw mu_conditional(const SamplerView& s) {
  const auto& p = s.params;
  const double r2 = 1.0 - p.rho * p.rho;
  double prec = 1.0 / s.priors.mu_var;
  double num = s.priors.mu_mean / s.priors.mu_var;
  for (std::size_t t = 1; t < s.y.size(); ++t) {
    const auto d = residual(s, t);
    const double a = s.y[t] - jump_y_of(s.state, t) - p.rho * d.e2 / p.sigma_nu;
    const double w = d.v_prev * r2;
    prec += 1.0 / w;
    num += a / w;
  }
  return {num / prec, 1.0 / prec};
}

TruncatedNormalLaw kappa_conditional(const SamplerView& s) {
  const auto& p = s.params;
  const double r2 = 1.0 - p.rho * p.rho;
  double prec = 1.0 / s.priors.kappa_var;
  double num = s.priors.kappa_mean / s.priors.kappa_var;
  for (std::size_t t = 1; t < s.y.size(); ++t) {
    const auto d = residual(s, t);
    const double c = (s.state.v[t] - d.v_prev) - jump_v_of(s.state, t) - p.rho * p.sigma_nu * d.e1;
    const double x = p.theta - d.v_prev;
    const double w = p.sigma_nu * p.sigma_nu * d.v_prev * r2;
    prec += x * x / w;
    num += x * c / w;
  }
  return {num / prec, 1.0 / prec, 0.0, kInf};
}

TruncatedNormalLaw theta_conditional(const SamplerView& s) {
  const auto& p = s.params;
  const double r2 = 1.0 - p.rho * p.rho;
  double prec = 1.0 / s.priors.theta_var;
  double num = s.priors.theta_mean / s.priors.theta_var;
  for (std::size_t t = 1; t < s.y.size(); ++t) {
    const auto d = residual(s, t);
    const double c = (s.state.v[t] - d.v_prev) - jump_v_of(s.state, t) - p.rho * p.sigma_nu * d.e1;
    const double z = c + p.kappa * d.v_prev;  // = kappa theta + noise
    const double w = p.sigma_nu * p.sigma_nu * d.v_prev * r2;
    prec += p.kappa * p.kappa / w;
    num += p.kappa * z / w;
  }
  return {num / prec, 1.0 / prec, 0.0, kInf};
}

BivariateNormalLaw jump_mean_conditional(const SamplerView& s) {
  const auto& p = s.params;
  // x^y / sqrt(k) = sqrt(k) mu_y + rho_j x^v / sqrt(k) + sigma_y z.
  double a00 = 0.0, a01 = 0.0, a11 = 0.0, b0 = 0.0, b1 = 0.0;
  for (std::size_t t = 1; t < s.y.size(); ++t) {
    const double k = effective_count(s.state, t);
    const double xy = s.state.xi_y[t];
    const double xv = s.state.xi_nu[t];
    a00 += k;
    a01 += xv;
    a11 += xv * xv / k;
    b0 += xy;
    b1 += xy * xv / k;
  }
  const double inv_s2 = 1.0 / (p.sigma_y * p.sigma_y);
  const double p00 = a00 * inv_s2 + 1.0 / s.priors.mu_y_var;
  const double p01 = a01 * inv_s2;
  const double p11 = a11 * inv_s2 + 1.0 / s.priors.rho_j_var;
  const double h0 = b0 * inv_s2 + s.priors.mu_y_mean / s.priors.mu_y_var;
  const double h1 = b1 * inv_s2 + s.priors.rho_j_mean / s.priors.rho_j_var;
  const double det = p00 * p11 - p01 * p01;
  const double c00 = p11 / det, c01 = -p01 / det, c11 = p00 / det;
  return {{c00 * h0 + c01 * h1, c01 * h0 + c11 * h1}, {c00, c01, c11}};
}

InverseGammaLaw sigma_y2_conditional(const SamplerView& s) {
  const auto& p = s.params;
  double ss = 0.0;
  double n = 0.0;
  for (std::size_t t = 1; t < s.y.size(); ++t) {
    const double k = effective_count(s.state, t);
    const double z = s.state.xi_y[t] - k * p.mu_y - p.rho_j * s.state.xi_nu[t];
    ss += z * z / k;
    n += 1.0;
  }
  return {s.priors.sigma_y2_shape + 0.5 * n, s.priors.sigma_y2_scale + 0.5 * ss};
}

GammaLaw mu_nu_rate_conditional(const SamplerView& s) {
  double count = 0.0, total = 0.0;
  for (std::size_t t = 1; t < s.y.size(); ++t) {
    count += effective_count(s.state, t);
    total += s.state.xi_nu[t];
  }
  return {s.priors.mu_nu_rate_shape + count, 1.0 / (1.0 / s.priors.mu_nu_rate_scale + total)};
}

InverseGammaLaw sigma_nu2_proposal(const SamplerView& s) {
  const auto r = residual_sums(s);
  const double r2 = 1.0 - s.params.rho * s.params.rho;
  return {s.priors.sigma_nu2_shape + 0.5 * r.n, s.priors.sigma_nu2_scale + r.s22 / (2.0 * r2)};
}

NormalLaw xi_y_conditional(const SamplerView& s, std::size_t t) {
  const auto& p = s.params;
  const int k = effective_count(s.state, t);
  const double prior_mean = k * p.mu_y + p.rho_j * s.state.xi_nu[t];
  const double prior_var = k * p.sigma_y * p.sigma_y;
  if (s.state.jumps[t] == 0) return {prior_mean, prior_var};
  const double vp = s.state.v[t - 1];
  const double e2 = (s.state.v[t] - vp) - p.kappa * (p.theta - vp) - s.state.xi_nu[t];
  const double lik_mean = s.y[t] - p.mu - p.rho * e2 / p.sigma_nu;
  const double lik_var = vp * (1.0 - p.rho * p.rho);
  const double prec = 1.0 / prior_var + 1.0 / lik_var;
  return {(prior_mean / prior_var + lik_mean / lik_var) / prec, 1.0 / prec};
}

TruncatedNormalLaw xi_nu_conditional(const SamplerView& s, std::size_t t) {
  const auto& p = s.params;
  const int k = s.state.jumps[t];
  if (k < 1) throw std::invalid_argument("xi_nu_conditional: day has no jump");
  const double vp = s.state.v[t - 1];
  const double e1 = s.y[t] - p.mu - s.state.xi_y[t];
  const double d = (s.state.v[t] - vp) - p.kappa * (p.theta - vp);
  const double w = p.sigma_nu * p.sigma_nu * vp * (1.0 - p.rho * p.rho);
  const double jv = k * p.sigma_y * p.sigma_y;
  const double prec = 1.0 / w + p.rho_j * p.rho_j / jv;
  const double num = (d - p.rho * p.sigma_nu * e1) / w + p.rho_j * (s.state.xi_y[t] - k * p.mu_y) / jv - 1.0 / p.mu_nu;
  return {num / prec, 1.0 / prec, 0.0, kInf};
}

double v_log_conditional(const SamplerView& s, std::size_t t, double v) {
  if (!(v > 0.0)) return -kInf;
  const auto& st = s.state;
  double lp = bivariate_log_density(s.y[t], v - st.v[t - 1], st.v[t - 1], jump_y_of(st, t), jump_v_of(st, t), s.params);
  if (t + 1 < s.y.size()) {
    lp += bivariate_log_density(s.y[t + 1], st.v[t + 1] - v, v, jump_y_of(st, t + 1), jump_v_of(st, t + 1), s.params);
  }
  return lp;
}

double rho_log_conditional(const SamplerView& s, double rho) {
  if (!(std::abs(rho) < 1.0)) return -kInf;
  const auto r = residual_sums(s);
  const double sig = s.params.sigma_nu;
  const double r2 = 1.0 - rho * rho;
  return -0.5 * r.n * std::log(r2) - (sig * sig * r.s11 - 2.0 * rho * sig * r.s12 + r.s22) / (2.0 * sig * sig * r2);
}

double sigma_nu2_log_conditional(const SamplerView& s, double s2) {
  if (!(s2 > 0.0)) return -kInf;
  const auto r = residual_sums(s);
  const double rho = s.params.rho;
  const double r2 = 1.0 - rho * rho;
  const double sig = std::sqrt(s2);
  const double loglik = -0.5 * r.n * std::log(s2) - (s2 * r.s11 - 2.0 * rho * sig * r.s12 + r.s22) / (2.0 * s2 * r2);
  const double log_prior = -(s.priors.sigma_nu2_shape + 1.0) * std::log(s2) - s.priors.sigma_nu2_scale / s2;
  return loglik + log_prior;
}

namespace {

std::vector<double> jump_count_histogram(const SamplerView& s) {
  std::vector<double> counts(static_cast<std::size_t>(s.m) + 1, 0.0);
  for (std::size_t t = 1; t < s.y.size(); ++t) counts[static_cast<std::size_t>(s.state.jumps[t])] += 1.0;
  return counts;
}

double count_loglik(const std::vector<double>& counts, double lambda, int m) {
  const auto lp = jump_count_log_prior(lambda, m);
  double ll = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0.0) ll += counts[k] * lp[k];
  }
  return ll;
}

}  // namespace

double lambda_log_conditional(const SamplerView& s, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) return -kInf;
  const auto counts = jump_count_histogram(s);
  return (s.priors.lambda_a - 1.0) * std::log(lambda) + (s.priors.lambda_b - 1.0) * std::log1p(-lambda) +
         count_loglik(counts, lambda, s.m);
}

double draw(const NormalLaw& law, Rng& rng) { return law.mean + std::sqrt(law.variance) * rng.normal(); }

double draw(const TruncatedNormalLaw& law, Rng& rng) {
  const double sd = std::sqrt(law.variance);
  const double a = (law.lower - law.mean) / sd;
  const double b = (law.upper - law.mean) / sd;
  const double x = law.mean + sd * std_normal_interval(a, b, rng);
  return std::clamp(x, law.lower, law.upper);
}

double draw(const InverseGammaLaw& law, Rng& rng) { return 1.0 / rng.gamma(law.shape, 1.0 / law.scale); }

double draw(const GammaLaw& law, Rng& rng) { return rng.gamma(law.shape, law.scale); }

std::array<double, 2> draw(const BivariateNormalLaw& law, Rng& rng) {
  const double l00 = std::sqrt(law.cov[0]);
  const double l10 = law.cov[1] / l00;
  const double l11 = std::sqrt(std::max(law.cov[2] - l10 * l10, 0.0));
  const double z0 = rng.normal();
  const double z1 = rng.normal();
  return {law.mean[0] + l00 * z0, law.mean[1] + l10 * z0 + l11 * z1};
}

bool update_rho(const SamplerView& s, double& rho, Rng& rng) {
  const auto r = residual_sums(s);
  const double corr = std::clamp(r.s12 / std::sqrt(r.s11 * r.s22), -0.999, 0.999);
  const double var = std::max((1.0 - corr * corr) * (1.0 - corr * corr) / r.n, 1e-10);
  const TruncatedNormalLaw proposal{corr, var, -1.0, 1.0};
  double candidate = draw(proposal, rng);
  if (!(std::abs(candidate) < 1.0)) return false;
  const auto log_q = [&](double x) { return -0.5 * (x - corr) * (x - corr) / var; };
  const double log_ratio =
      rho_log_conditional(s, candidate) - rho_log_conditional(s, rho) + log_q(rho) - log_q(candidate);
  if (std::log(rng.uniform_open()) < log_ratio) {
    rho = candidate;
    return true;
  }
  return false;
}

bool update_sigma_nu(const SamplerView& s, double& sigma_nu, Rng& rng) {
  const auto r = residual_sums(s);
  const double rho = s.params.rho;
  const double r2 = 1.0 - rho * rho;
  const InverseGammaLaw ig{s.priors.sigma_nu2_shape + 0.5 * r.n, s.priors.sigma_nu2_scale + r.s22 / (2.0 * r2)};
  const double c = rho * r.s12 / r2;
  if (c == 0.0) {
    sigma_nu = std::sqrt(draw(ig, rng));
    return true;
  }
  // In u = 1 / sigma_nu the target is u^k exp(-B u^2 + c u). The inverse gamma
  // alone misses the c u term badly under strong correlation, so propose
  // N(mode, 1 / (2B)): same Gaussian tail as the target, bounded weights.
  const double k = 2.0 * ig.shape - 1.0, big_b = ig.scale;
  const double mode = (c + std::sqrt(c * c + 8.0 * big_b * k)) / (4.0 * big_b);
  const double sd = 1.0 / std::sqrt(2.0 * big_b);
  const double candidate = mode + sd * rng.normal();
  if (!(candidate > 0.0)) return false;
  const auto log_w = [&](double u) { return k * std::log(u) + c * u - 2.0 * big_b * mode * u; };
  const double log_ratio = log_w(candidate) - log_w(1.0 / sigma_nu);
  if (log_ratio >= 0.0 || std::log(rng.uniform_open()) < log_ratio) {
    sigma_nu = 1.0 / candidate;
    return true;
  }
  return false;
}

bool update_lambda(const SamplerView& s, double& lambda, Rng& rng) {
  const auto counts = jump_count_histogram(s);
  double successes = 0.0;
  for (std::size_t k = 1; k < counts.size(); ++k) successes += counts[k];
  const double failures = counts[0];
  const double candidate = rng.beta(s.priors.lambda_a + successes, s.priors.lambda_b + failures);
  if (!(candidate >= 0.0 && candidate < 1.0)) return false;
  // Target / Beta proposal = prod p_{J_t}(lambda) / (lambda^s (1 - lambda)^f).
  const auto log_w = [&](double l) {
    return count_loglik(counts, l, s.m) - successes * std::log(l) - failures * std::log1p(-l);
  };
  const double log_ratio = log_w(candidate) - log_w(lambda);
  if (log_ratio >= 0.0 || std::log(rng.uniform_open()) < log_ratio) {
    lambda = candidate;
    return true;
  }
  return false;
}

bool update_v(const SamplerView& s, std::size_t t, double step, double& v, Rng& rng) {
  const double candidate = v + step * rng.normal();
  if (!(candidate > 0.0)) return false;
  const double log_ratio = v_log_conditional(s, t, candidate) - v_log_conditional(s, t, v);
  if (log_ratio >= 0.0 || std::log(rng.uniform_open()) < log_ratio) {
    v = candidate;
    return true;
  }
  return false;
}

bool update_xi_nu(const SamplerView& s, std::size_t t, double& xi_nu, Rng& rng) {
  const int k = s.state.jumps[t];
  const auto law = xi_nu_conditional(s, t);
  const double candidate = draw(law, rng);
  if (k == 1 || !(xi_nu > 0.0)) {
    xi_nu = candidate;
    return true;
  }
  if (!(candidate > 0.0)) return false;
  const double log_ratio = (k - 1) * (std::log(candidate) - std::log(xi_nu));
  if (log_ratio >= 0.0 || std::log(rng.uniform_open()) < log_ratio) {
    xi_nu = candidate;
    return true;
  }
  return false;
}

// --- chain ------------------------------------------------------------------

void McmcConfig::validate() const {
  if (burn_in < 0) throw std::invalid_argument("burn-in must be >= 0");
  if (iterations <= burn_in) throw std::invalid_argument("iterations must exceed burn-in");
  if (m < 1) throw std::invalid_argument("jump cap m must be >= 1");
  if (!(return_scale > 0.0)) throw std::invalid_argument("return scale must be > 0");
  if (state_thin < 1) throw std::invalid_argument("state thinning must be >= 1");
  if (!(v_step > 0.0)) throw std::invalid_argument("V step must be > 0");
  if (adapt_interval < 1) throw std::invalid_argument("adaptation interval must be >= 1");
  priors.validate();
}

namespace {

std::vector<double> column(const ChainOutput& c, std::size_t j) {
  std::vector<double> x;
  x.reserve(c.draws.size());
  for (const auto& d : c.draws) x.push_back(d[j]);
  return x;
}

double batch_means_se(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return std::numeric_limits<double>::quiet_NaN();
  const auto batches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t size = n / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * size; i < (b + 1) * size; ++i) s += x[i];
    means.push_back(s / static_cast<double>(size));
  }
  return std::sqrt(sample_variance(means) / static_cast<double>(batches));
}

void check_finite_params(const SVJJParams& p, int iteration) {
  const auto a = p.to_array();
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (!std::isfinite(a[j])) {
      throw NumericalError("MCMC: parameter " + std::string(SVJJParams::names()[j]) + " became non-finite at iteration " +
                           std::to_string(iteration));
    }
  }
}

}  // namespace

SVJJParams ChainOutput::posterior_mean() const {
  std::array<double, SVJJParams::kCount> a{};
  for (std::size_t j = 0; j < a.size(); ++j) {
    const auto x = column(*this, j);
    a[j] = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  }
  return SVJJParams::from_array(a);
}

SVJJParams ChainOutput::posterior_sd() const {
  std::array<double, SVJJParams::kCount> a{};
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::sqrt(sample_variance(column(*this, j)));
  return SVJJParams::from_array(a);
}

SVJJParams ChainOutput::mc_standard_error() const {
  std::array<double, SVJJParams::kCount> a{};
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = batch_means_se(column(*this, j));
  return SVJJParams::from_array(a);
}

std::pair<SVJJParams, SVJJParams> ChainOutput::credible_interval(double level) const {
  std::array<double, SVJJParams::kCount> lo{}, hi{};
  const double tail = 0.5 * (1.0 - level);
  for (std::size_t j = 0; j < lo.size(); ++j) {
    auto x = column(*this, j);
    std::sort(x.begin(), x.end());
    lo[j] = quantile_sorted(x, tail);
    hi[j] = quantile_sorted(x, 1.0 - tail);
  }
  return {SVJJParams::from_array(lo), SVJJParams::from_array(hi)};
}

ChainOutput run_mcmc(std::span<const double> log_returns, const McmcConfig& config) {
  config.validate();
  std::vector<double> y(log_returns.begin(), log_returns.end());
  for (double& r : y) r *= config.return_scale;
  const std::size_t n = y.size();

  ChainOutput out;
  out.initial = init_latent_state(y, config.m, config.init);
  SVJJLatentState state = out.initial.state;
  SVJJParams params = out.initial.params;
  const std::vector<double> v_scale = state.v;
  double step = config.v_step;

  Rng rng(config.seed);
  const SamplerView view{y, params, state, config.priors, config.m};

  std::map<std::string, std::pair<double, double>> acc;  // accepted, tried (post burn-in)
  auto tally = [&](const char* name, bool accepted, bool record) {
    if (!record) return;
    auto& a = acc[name];
    a.first += accepted ? 1.0 : 0.0;
    a.second += 1.0;
  };

  out.mean_v.assign(n, 0.0);
  out.mean_jump_y.assign(n, 0.0);
  out.jump_probability.assign(n, 0.0);
  const int kept = config.iterations - config.burn_in;
  out.draws.reserve(static_cast<std::size_t>(kept));

  double window_accept = 0.0, window_tries = 0.0;
  for (int g = 1; g <= config.iterations; ++g) {
    const bool record = g > config.burn_in;

    params.mu = draw(mu_conditional(view), rng);
    params.kappa = draw(kappa_conditional(view), rng);
    params.theta = draw(theta_conditional(view), rng);
    {
      double rho = params.rho;
      tally("rho", update_rho(view, rho, rng), record);
      params.rho = rho;
    }
    {
      double sigma_nu = params.sigma_nu;
      tally("sigma_nu", update_sigma_nu(view, sigma_nu, rng), record);
      params.sigma_nu = sigma_nu;
    }
    {
      const auto mj = draw(jump_mean_conditional(view), rng);
      params.mu_y = mj[0];
      params.rho_j = mj[1];
    }
    params.sigma_y = std::sqrt(draw(sigma_y2_conditional(view), rng));
    params.mu_nu = 1.0 / draw(mu_nu_rate_conditional(view), rng);
    {
      double lambda = params.lambda;
      tally("lambda", update_lambda(view, lambda, rng), record);
      params.lambda = lambda;
    }
    check_finite_params(params, g);

    for (std::size_t t = 1; t < n; ++t) {
      const auto prob = jump_count_posterior(t, y, params, state, config.m);
      double u = rng.uniform();
      int k = 0;
      while (k < config.m && u >= prob[k]) u -= prob[k++];
      state.jumps[t] = k;
      if (k == 0) {
        state.xi_nu[t] = params.mu_nu > 0.0 ? rng.exponential(params.mu_nu) : 0.0;
        state.xi_y[t] = params.mu_y + params.rho_j * state.xi_nu[t] + params.sigma_y * rng.normal();
      } else {
        double xv = state.xi_nu[t];
        const bool ok = update_xi_nu(view, t, xv, rng);
        if (k >= 2) tally("xi_nu", ok, record);
        state.xi_nu[t] = xv;
        state.xi_y[t] = draw(xi_y_conditional(view, t), rng);
      }
    }

    for (std::size_t t = 1; t < n; ++t) {
      double v = state.v[t];
      const bool ok = update_v(view, t, step * v_scale[t], v, rng);
      if (!std::isfinite(v)) throw NumericalError("MCMC: V became non-finite on day " + std::to_string(t));
      state.v[t] = v;
      tally("v", ok, record);
      if (!record) {
        window_accept += ok ? 1.0 : 0.0;
        window_tries += 1.0;
      }
    }

    if (!record && g % config.adapt_interval == 0 && window_tries > 0.0) {
      const double rate = window_accept / window_tries;
      if (rate > 0.5) step *= 1.25;
      if (rate < 0.3) step *= 0.8;
      window_accept = window_tries = 0.0;
    }

    if (record) {
      out.draws.push_back(params.to_array());
      out.draw_iterations.push_back(g);
      for (std::size_t t = 0; t < n; ++t) {
        out.mean_v[t] += state.v[t];
        out.mean_jump_y[t] += jump_y_of(state, t);
        out.jump_probability[t] += state.jumps[t] >= 1 ? 1.0 : 0.0;
      }
      if (config.store_states && (g - config.burn_in) % config.state_thin == 0) {
        out.states.push_back(state);
        out.state_iterations.push_back(g);
      }
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    out.mean_v[t] /= kept;
    out.mean_jump_y[t] /= kept;
    out.jump_probability[t] /= kept;
  }
  for (const auto& [name, a] : acc) out.acceptance[name] = a.second > 0.0 ? a.first / a.second : 0.0;
  out.last_state = state;
  out.last_params = params;
  out.v_step = step;
  return out;
}

// --- diagnostics ------------------------------------------------------------

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  std::vector<double> acf(max_lag + 1, 1.0);
  if (n < 2) return acf;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) return acf;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) ck += (x[i] - mean) * (x[i + k] - mean);
    acf[k] = k < n ? ck / c0 : 0.0;
  }
  return acf;
}

Diagnostics diagnostics(const ChainOutput& chain, std::span<const double> y_percent) {
  if (chain.states.empty() || chain.draws.empty()) {
    return diagnostics(chain, y_percent, chain.posterior_mean(), chain.mean_v, chain.mean_jump_y);
  }
  // Posterior means of V and of the jumps are fitted to the same returns and
  // shrink the residuals; a joint draw of parameters and state does not.
  Diagnostics out;
  double mean_sum = 0.0, var_sum = 0.0;
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    const auto& st = chain.states[i];
    const auto k = static_cast<std::size_t>(chain.state_iterations[i] - chain.draw_iterations.front());
    std::vector<double> jump_y(st.size());
    for (std::size_t t = 0; t < st.size(); ++t) jump_y[t] = jump_y_of(st, t);
    out = diagnostics(chain, y_percent, SVJJParams::from_array(chain.draws[k]), st.v, jump_y);
    mean_sum += out.residual_mean;
    var_sum += out.residual_variance;
  }
  const auto n = static_cast<double>(chain.states.size());
  out.residual_mean = mean_sum / n;
  out.residual_variance = var_sum / n;
  return out;
}

Diagnostics diagnostics(const ChainOutput& chain, std::span<const double> y, const SVJJParams& params,
                        std::span<const double> v, std::span<const double> jump_y) {
  if (chain.draws.empty()) throw std::invalid_argument("diagnostics: empty chain");
  if (v.size() != y.size() || jump_y.size() != y.size()) {
    throw std::invalid_argument("diagnostics: state length differs from the data");
  }
  Diagnostics d;
  const auto mean = chain.posterior_mean().to_array();
  const auto sd = chain.posterior_sd().to_array();
  const auto se = chain.mc_standard_error().to_array();
  for (std::size_t j = 0; j < SVJJParams::kCount; ++j) {
    ParameterDiagnostics pd;
    pd.name = SVJJParams::names()[j];
    const auto x = column(chain, j);
    pd.acf = autocorrelation(x, 50);
    pd.mean = mean[j];
    pd.sd = sd[j];
    pd.mc_se = se[j];
    const bool constant = std::all_of(x.begin(), x.end(), [&](double v0) { return v0 == x.front(); });
    pd.non_mixing = constant || pd.acf.back() > 0.9;
    d.parameters.push_back(std::move(pd));
  }
  for (std::size_t t = 1; t < y.size(); ++t) {
    d.residuals.push_back((y[t] - params.mu - jump_y[t]) / std::sqrt(v[t - 1]));
  }
  const double nr = static_cast<double>(d.residuals.size());
  d.residual_mean = std::accumulate(d.residuals.begin(), d.residuals.end(), 0.0) / nr;
  double ss = 0.0;
  for (double r : d.residuals) ss += (r - d.residual_mean) * (r - d.residual_mean);
  d.residual_variance = ss / (nr - 1.0);
  auto sorted = d.residuals;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / nr;
    d.qq.emplace_back(-std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p), sorted[i]);
  }
  return d;
}

void write_chain_csv(std::ostream& out, const ChainOutput& chain, double unit_factor) {
  const auto k = unit_factors(unit_factor);
  const auto old = out.precision(17);
  out << "iteration";
  for (auto name : SVJJParams::names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < chain.draws.size(); ++i) {
    out << chain.draw_iterations[i];
    for (std::size_t j = 0; j < SVJJParams::kCount; ++j) out << ',' << chain.draws[i][j] * k[j];
    out << '\n';
  }
  out.precision(old);
}

void write_posterior_summary_csv(std::ostream& out, const ChainOutput& chain, double unit_factor) {
  const auto k = unit_factors(unit_factor);
  const auto old = out.precision(10);
  const auto mean = chain.posterior_mean().to_array();
  const auto sd = chain.posterior_sd().to_array();
  const auto se = chain.mc_standard_error().to_array();
  const auto [lo, hi] = chain.credible_interval(0.95);
  const auto loa = lo.to_array(), hia = hi.to_array();
  out << "parameter,mean,sd,mc_se,q025,q975\n";
  for (std::size_t j = 0; j < SVJJParams::kCount; ++j) {
    out << SVJJParams::names()[j] << ',' << mean[j] * k[j] << ',' << sd[j] * k[j] << ',' << se[j] * k[j] << ','
        << loa[j] * k[j] << ',' << hia[j] * k[j] << '\n';
  }
  out.precision(old);
}

void write_acf_csv(std::ostream& out, const Diagnostics& d) {
  out << "parameter,lag,acf\n";
  for (const auto& p : d.parameters) {
    for (std::size_t k = 0; k < p.acf.size(); ++k) out << p.name << ',' << k << ',' << p.acf[k] << '\n';
  }
}

void write_qq_csv(std::ostream& out, const Diagnostics& d) {
  out << "normal_quantile,residual\n";
  for (const auto& [q, r] : d.qq) out << q << ',' << r << '\n';
}

}  // namespace semivar
