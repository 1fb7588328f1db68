#include "semivar/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "semivar/errors.hpp"
#include "semivar/parallel.hpp"
#include "semivar/semivariance.hpp"

namespace semivar {

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::sqrt_time: return "sqrt";
    case Method::pure_diffusion: return "pure";
    case Method::jump_diffusion: return "jump";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "sqrt" || name == "sqrt_time") return Method::sqrt_time;
  if (name == "pure" || name == "pure_diffusion") return Method::pure_diffusion;
  if (name == "jump" || name == "jump_diffusion") return Method::jump_diffusion;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected sqrt, pure or jump)");
}

void RollingConfig::validate(double delta_t) const {
  if (window < 30) throw std::invalid_argument("rolling window must be >= 30");
  if (methods.empty()) throw std::invalid_argument("no rolling methods selected");
  if (!(lambda_cap > 0.0) || lambda_cap * delta_t > 1.0 + 1e-12) {
    throw std::invalid_argument("lambda cap must be in (0, 1/dt]");
  }
  if (m < 1) throw std::invalid_argument("jump cap m must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (memory_capacity == 0) throw std::invalid_argument("memory capacity must be >= 1");
  if (!(hysteresis >= 0.0)) throw std::invalid_argument("hysteresis must be >= 0");
}

const MethodEstimate* RollingRow::find(Method m) const noexcept {
  for (const auto& e : estimates) {
    if (e.method == m) return &e;
  }
  return nullptr;
}

double annualized_semideviation(const JumpDiffusionParams& params, const RollingConfig& config, double delta_t) {
  auto q = SemivarianceQuery::for_horizon(config.horizon, config.threshold, config.m, delta_t);
  return jump_diffusion_semivariance(params, q).semideviation;
}

namespace {

MethodEstimate failed(Method m, std::string note) {
  MethodEstimate e;
  e.method = m;
  e.semideviation = std::numeric_limits<double>::quiet_NaN();
  e.ok = false;
  e.note = std::move(note);
  return e;
}

MethodEstimate sqrt_estimate(std::span<const double> w, const RollingConfig& config, double delta_t) {
  MethodEstimate e;
  e.method = Method::sqrt_time;
  const double daily = std::sqrt(empirical_semivariance(w, config.threshold));
  const int steps = static_cast<int>(std::lround(config.horizon / delta_t));
  e.semideviation = sqrt_time_semideviation(daily, steps);
  return e;
}

// Closed-form MLE, clamped into the model box so that it is also a valid
// member of the jump model's search space.
JumpDiffusionParams clamped_normal_mle(std::span<const double> w, const ModelSpec& spec) {
  auto p = normal_mle(w, spec.delta_t);
  p.mu = std::clamp(p.mu, spec.bounds[0].low, spec.bounds[0].high);
  p.sigma = std::clamp(p.sigma, spec.bounds[1].low, spec.bounds[1].high);
  return p;
}

ModelSpec jump_spec_for(const RollingConfig& config, double delta_t) {
  auto spec = ModelSpec::defaults(config.jump_model, config.m, delta_t);
  spec.with_lambda_cap(config.lambda_cap);
  spec.validate();
  return spec;
}

MethodEstimate pure_estimate(std::span<const double> w, const RollingConfig& config, double delta_t) {
  const auto spec = ModelSpec::defaults(ModelKind::pure_diffusion, config.m, delta_t);
  MethodEstimate e;
  e.method = Method::pure_diffusion;
  try {
    const auto p = clamped_normal_mle(w, spec);
    e.params = p;
    e.log_likelihood = log_likelihood(w, p, spec);
    e.semideviation = pure_diffusion_semivariance(p.mu, p.sigma, config.horizon, config.threshold).semideviation;
  } catch (const std::exception& ex) {
    return failed(Method::pure_diffusion, ex.what());
  }
  return e;
}

// `previous`: last accepted solution when memory is on.
MethodEstimate jump_estimate(std::span<const double> w, std::size_t index, const RollingConfig& config,
                             const ModelSpec& spec, double delta_t, const DEMemory* memory,
                             const std::optional<JumpDiffusionParams>& previous) {
  MethodEstimate e;
  e.method = Method::jump_diffusion;
  try {
    // The nested pure-diffusion optimum (lambda = 0) is always a candidate,
    // so the jump fit can never score below it.
    auto nested = clamped_normal_mle(w, spec);
    nested.lambda = 0.0;
    nested.mu_q = 0.0;
    nested.sigma_q = spec.bounds[4].low;
    DEConfig de = config.de;
    de.seed = Rng::substream(config.de.seed, index)();
    de.threads = 1;
    const std::vector<JumpDiffusionParams> seeds{nested};
    auto result = fit(w, spec, de, memory, seeds);
    if (previous && spec.contains(*previous)) {
      const double prev_ll = log_likelihood(w, *previous, spec);
      if (prev_ll >= result.log_likelihood - config.hysteresis) {
        result.params = *previous;
        result.log_likelihood = prev_ll;
      }
    }
    e.params = result.params;
    e.log_likelihood = result.log_likelihood;
    e.evaluations = result.evaluations;
    e.semideviation = annualized_semideviation(result.params, config, delta_t);
  } catch (const std::exception& ex) {
    return failed(Method::jump_diffusion, ex.what());
  }
  return e;
}

bool wants(const RollingConfig& c, Method m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

}  // namespace

JumpWindowFitter::JumpWindowFitter(const RollingConfig& config, double delta_t)
    : config_(config), delta_t_(delta_t), spec_(jump_spec_for(config, delta_t)), memory_(config.memory_capacity) {
  config_.validate(delta_t);
}

MethodEstimate JumpWindowFitter::fit(std::span<const double> window, std::size_t index) {
  if (!config_.use_memory) return jump_estimate(window, index, config_, spec_, delta_t_, nullptr, std::nullopt);
  auto est = jump_estimate(window, index, config_, spec_, delta_t_, &memory_, previous_);
  if (est.ok) {
    previous_ = *est.params;
    memory_.push(spec_.to_vector(*est.params), spec_.active_bounds());
  }
  return est;
}

std::vector<RollingRow> roll(const ReturnSeries& returns, const RollingConfig& config) {
  const double dt = returns.delta_t();
  config.validate(dt);
  if (returns.size() < config.window) {
    throw DataError("rolling window of " + std::to_string(config.window) + " needs at least that many returns, got " +
                    std::to_string(returns.size()));
  }
  const auto spec = jump_spec_for(config, dt);
  const std::size_t n_rows = returns.size() - config.window + 1;
  std::vector<RollingRow> rows(n_rows);
  const auto values = returns.values();

  auto base_row = [&](std::size_t r) {
    RollingRow row;
    row.end_index = r + config.window - 1;
    row.date = returns.dates()[row.end_index];
    const auto w = values.subspan(r, config.window);
    for (Method m : config.methods) {
      if (m == Method::sqrt_time) row.estimates.push_back(sqrt_estimate(w, config, dt));
      if (m == Method::pure_diffusion) row.estimates.push_back(pure_estimate(w, config, dt));
    }
    return row;
  };

  const bool jump = wants(config, Method::jump_diffusion);
  if (jump && config.use_memory) {
    JumpWindowFitter fitter(config, dt);
    for (std::size_t r = 0; r < n_rows; ++r) {
      rows[r] = base_row(r);
      rows[r].estimates.push_back(fitter.fit(values.subspan(r, config.window), r));
    }
  } else {
    parallel_for(n_rows, resolve_threads(config.threads), [&](std::size_t r) {
      rows[r] = base_row(r);
      if (jump) {
        rows[r].estimates.push_back(
            jump_estimate(values.subspan(r, config.window), r, config, spec, dt, nullptr, std::nullopt));
      }
    });
  }

  // Keep the requested method order.
  for (auto& row : rows) {
    std::stable_sort(row.estimates.begin(), row.estimates.end(), [&](const auto& a, const auto& b) {
      const auto pos = [&](Method m) { return std::find(config.methods.begin(), config.methods.end(), m); };
      return pos(a.method) < pos(b.method);
    });
  }
  return rows;
}

std::vector<SweepSeries> lambda_constraint_sweep(const ReturnSeries& returns, const std::vector<double>& caps,
                                                 RollingConfig config) {
  const double dt = returns.delta_t();
  for (double cap : caps) {
    if (!(cap > 0.0) || cap * dt > 1.0 + 1e-12) throw std::invalid_argument("lambda caps must lie in (0, 1/dt]");
  }
  config.methods = {Method::jump_diffusion};
  std::vector<SweepSeries> out;
  for (double cap : caps) {
    config.lambda_cap = cap;
    const auto rows = roll(returns, config);
    SweepSeries s;
    s.cap = cap;
    for (const auto& row : rows) {
      s.dates.push_back(row.date);
      s.semideviation.push_back(row.estimates.front().semideviation);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_rolling_csv(std::ostream& out, const std::vector<RollingRow>& rows) {
  const auto old_precision = out.precision(17);
  out << "date,method,semideviation,mu,sigma,lambda,mu_q,sigma_q,loglik\n";
  for (const auto& row : rows) {
    for (const auto& e : row.estimates) {
      out << row.date << ',' << method_name(e.method) << ',';
      if (!e.ok) {
        out << "nan,nan,nan,nan,nan,nan,nan\n";
        continue;
      }
      out << e.semideviation;
      if (e.params) {
        const auto& p = *e.params;
        out << ',' << p.mu << ',' << p.sigma << ',' << p.lambda << ',' << p.mu_q << ',' << p.sigma_q;
      } else {
        out << ",,,,,";
      }
      out << ',';
      if (e.log_likelihood) out << *e.log_likelihood;
      out << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace semivar
