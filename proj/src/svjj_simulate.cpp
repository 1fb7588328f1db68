#include "semivar/svjj_simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "semivar/errors.hpp"
#include "semivar/parallel.hpp"

namespace semivar {

void SimulationConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be > 0");
  if (paths < 1) throw std::invalid_argument("paths must be >= 1");
  if (!(euler_dt > 0.0)) throw std::invalid_argument("Euler step must be > 0");
  if (!(time_unit > 0.0)) throw std::invalid_argument("time unit must be > 0");
  if (!(return_scale > 0.0)) throw std::invalid_argument("return scale must be > 0");
  if (v0 && !(*v0 >= 0.0)) throw std::invalid_argument("v0 must be >= 0");
}

std::vector<double> simulate_jump_times(double rate, double horizon, Rng& rng) {
  if (rate < 0.0) throw std::invalid_argument("jump rate must be >= 0");
  std::vector<double> times;
  if (rate == 0.0) return times;
  double t = rng.exponential(1.0 / rate);
  while (t <= horizon) {
    times.push_back(t);
    t += rng.exponential(1.0 / rate);
  }
  return times;
}

EulerState euler_step(EulerState s, const SVJJParams& p, double dt, double z1, double z2) noexcept {
  const double vp = std::max(s.v, 0.0);
  const double root = std::sqrt(vp * dt);
  EulerState out;
  out.y = s.y + p.mu * dt + root * z1;
  out.v = s.v + p.kappa * (p.theta - vp) * dt +
          p.sigma_nu * root * (p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * z2);
  return out;
}

namespace {

void apply_jump(EulerState& s, const SVJJParams& p, Rng& rng) {
  const double xv = p.mu_nu > 0.0 ? rng.exponential(p.mu_nu) : 0.0;
  const double xy = p.mu_y + p.rho_j * xv + p.sigma_y * rng.normal();
  s.y += xy;
  s.v += xv;
}

}  // namespace

PathSummary simulate_horizon_return(const SVJJParams& params, const SimulationConfig& config, Rng& rng) {
  const double horizon = config.horizon / config.time_unit;
  const double h = config.euler_dt / config.time_unit;
  const auto jumps = simulate_jump_times(params.lambda, horizon, rng);
  EulerState s{0.0, config.v0.value_or(params.theta)};
  std::size_t next_jump = 0;
  const auto steps = static_cast<long>(std::ceil(horizon / h - 1e-9));
  for (long i = 0; i < steps; ++i) {
    double t = static_cast<double>(i) * h;
    const double end = std::min(static_cast<double>(i + 1) * h, horizon);
    while (next_jump < jumps.size() && jumps[next_jump] <= end) {
      const double tj = jumps[next_jump];
      if (tj > t) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        s = euler_step(s, params, tj - t, z1, z2);
        t = tj;
      }
      apply_jump(s, params, rng);
      ++next_jump;
    }
    if (end > t) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      s = euler_step(s, params, end - t, z1, z2);
    }
  }
  return {s.y / config.return_scale, static_cast<int>(jumps.size()), s.v};
}

std::vector<double> simulate_horizon_returns(const SVJJParams& params, const SimulationConfig& config) {
  config.validate();
  params.validate_for_simulation();
  std::vector<double> out(static_cast<std::size_t>(config.paths));
  parallel_for(out.size(), resolve_threads(config.threads), [&](std::size_t i) {
    Rng rng = Rng::substream(config.seed, i);
    out[i] = simulate_horizon_return(params, config, rng).log_return;
  });
  return out;
}

DailyPath simulate_daily_path(const SVJJParams& params, std::size_t days, double v0, int m, std::uint64_t seed,
                              double return_scale) {
  params.validate_for_simulation();
  if (days < 2) throw std::invalid_argument("need at least 2 days");
  if (!(v0 > 0.0)) throw std::invalid_argument("v0 must be > 0");
  if (m < 1) throw std::invalid_argument("jump cap m must be >= 1");
  Rng rng(seed);
  DailyPath path;
  auto& st = path.state;
  st.v.assign(days, 0.0);
  st.jumps.assign(days, 0);
  st.xi_y.assign(days, 0.0);
  st.xi_nu.assign(days, 0.0);
  path.log_returns.assign(days, 0.0);
  st.v[0] = v0;
  path.log_returns[0] = (params.mu + std::sqrt(v0) * rng.normal()) / return_scale;
  for (std::size_t t = 1; t < days; ++t) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    auto s = euler_step({0.0, st.v[t - 1]}, params, 1.0, z1, z2);
    const int k = static_cast<int>(std::min<std::uint64_t>(rng.poisson(params.lambda), static_cast<std::uint64_t>(m)));
    const double xv = k > 0 && params.mu_nu > 0.0 ? rng.gamma(k, params.mu_nu) : 0.0;
    const double xy = k > 0 ? k * params.mu_y + params.rho_j * xv + std::sqrt(static_cast<double>(k)) * params.sigma_y * rng.normal()
                            : 0.0;
    st.jumps[t] = k;
    st.xi_y[t] = xy;
    st.xi_nu[t] = xv;
    path.log_returns[t] = (s.y + xy) / return_scale;
    st.v[t] = s.v + xv;
  }
  return path;
}

double reference_bandwidth(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw std::invalid_argument("bandwidth needs at least 2 points");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : s) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const auto q = [&](double p) {
    const double h = (n - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    return s[lo] + (h - lo) * (s[hi] - s[lo]);
  };
  const double iqr = q(0.75) - q(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;  // IQR can vanish on lumpy samples
  if (!(spread > 0.0)) throw std::invalid_argument("kernel density needs a sample with nonzero spread");
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

DensityEstimate::DensityEstimate(std::vector<double> sample) : DensityEstimate(sample, reference_bandwidth(sample)) {}

DensityEstimate::DensityEstimate(std::vector<double> sample, double bandwidth)
    : sorted_(std::move(sample)), h_(bandwidth) {
  if (sorted_.size() < 2) throw std::invalid_argument("kernel density needs at least 2 points");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw std::invalid_argument("bandwidth must be > 0");
  std::sort(sorted_.begin(), sorted_.end());
}

double DensityEstimate::operator()(double x) const noexcept {
  constexpr double kWindow = 12.0;
  const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), x - kWindow * h_);
  const auto hi = std::upper_bound(lo, sorted_.end(), x + kWindow * h_);
  double sum = 0.0;
  for (auto it = lo; it != hi; ++it) {
    const double z = (x - *it) / h_;
    sum += std::exp(-0.5 * z * z);
  }
  return sum / (static_cast<double>(sorted_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
}

namespace {

QuadratureOptions density_quadrature_options() {
  QuadratureOptions o;
  o.abs_tol = 1e-10;
  o.rel_tol = 0.0;
  o.max_subdivisions = 20000;
  return o;
}

DensitySemivariance finish(const QuadratureResult& q) {
  if (!q.converged) {
    throw NumericalError("semivariance quadrature did not reach its tolerance (error estimate " +
                         std::to_string(q.error) + ")");
  }
  DensitySemivariance out;
  out.quadrature = q;
  out.result.semivariance = std::max(q.value, 0.0);
  out.result.semideviation = std::sqrt(out.result.semivariance);
  return out;
}

}  // namespace

DensitySemivariance semivariance_from_density(const DensityEstimate& density, double tau) {
  const double lower = density.min() - 10.0 * density.bandwidth();
  if (tau <= lower) {
    DensitySemivariance out;
    out.quadrature.converged = true;
    return out;
  }
  const auto f = [&](double r) { return (tau - r) * (tau - r) * density(r); };
  // Seeding the partition at bandwidth spacing keeps every kernel bump visible.
  std::vector<double> cuts;
  const double span = tau - lower;
  const auto pieces = static_cast<int>(std::min(256.0, std::ceil(span / (4.0 * density.bandwidth()))));
  for (int i = 1; i < pieces; ++i) cuts.push_back(lower + span * i / pieces);
  return finish(integrate(f, lower, tau, density_quadrature_options(), cuts));
}

DensitySemivariance semivariance_from_density(const std::function<double(double)>& pdf, double tau,
                                              double initial_width) {
  const auto f = [&](double r) { return (tau - r) * (tau - r) * pdf(r); };
  return finish(integrate_lower_tail(f, tau, initial_width, density_quadrature_options()));
}

double semivariance_standard_error(std::span<const double> sample, double tau) {
  const std::size_t n = sample.size();
  if (n < 2) throw std::invalid_argument("standard error needs at least 2 points");
  double sum = 0.0, sum2 = 0.0;
  for (double r : sample) {
    const double x = r < tau ? (tau - r) * (tau - r) : 0.0;
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = (sum2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
  return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
}

void write_density_grid_csv(std::ostream& out, const DensityEstimate& density, int points) {
  const double lo = density.min() - 4.0 * density.bandwidth();
  const double hi = density.max() + 4.0 * density.bandwidth();
  const auto old = out.precision(12);
  out << "x,density\n";
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    out << x << ',' << density(x) << '\n';
  }
  out.precision(old);
}

}  // namespace semivar
