#include "semivar/likelihood.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "semivar/errors.hpp"

namespace semivar {

namespace {

// lambda * dt may exceed 1 by rounding when lambda sits on its 1/dt bound.
constexpr double kIntensitySlack = 1e-12;
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

}  // namespace

ModelSpec ModelSpec::defaults(ModelKind kind, int m, double delta_t) {
  ModelSpec s;
  s.kind = kind;
  s.m = m;
  s.delta_t = delta_t;
  s.bounds = {Bound{-2.0, 2.0}, Bound{1e-4, 2.0}, Bound{0.0, 1.0 / delta_t}, Bound{-0.5, 0.5},
              Bound{1e-6, 0.5}};
  return s;
}

ModelSpec& ModelSpec::with_lambda_cap(double cap) {
  bounds[2].high = std::min(cap, 1.0 / delta_t);
  return *this;
}

std::vector<Bound> ModelSpec::active_bounds() const {
  return {bounds.begin(), bounds.begin() + static_cast<std::ptrdiff_t>(dimension())};
}

std::vector<double> ModelSpec::to_vector(const JumpDiffusionParams& p) const {
  if (kind == ModelKind::pure_diffusion) return {p.mu, p.sigma};
  return {p.mu, p.sigma, p.lambda, p.mu_q, p.sigma_q};
}

JumpDiffusionParams ModelSpec::from_vector(std::span<const double> x) const {
  if (x.size() != dimension()) throw std::invalid_argument("parameter vector has the wrong dimension");
  JumpDiffusionParams p;
  p.mu = x[0];
  p.sigma = x[1];
  if (kind == ModelKind::pure_diffusion) {
    p.lambda = 0.0;
    p.mu_q = 0.0;
    p.sigma_q = 0.0;
  } else {
    p.lambda = x[2];
    p.mu_q = x[3];
    p.sigma_q = x[4];
  }
  return p;
}

bool ModelSpec::contains(const JumpDiffusionParams& p) const {
  const auto x = to_vector(p);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] >= bounds[j].low && x[j] <= bounds[j].high)) return false;
  }
  return true;
}

void ModelSpec::validate() const {
  if (!(delta_t > 0.0) || !std::isfinite(delta_t)) throw std::invalid_argument("delta_t must be > 0");
  if (kind == ModelKind::generalized_m_jump && m < 1) throw std::invalid_argument("jump cap m must be >= 1");
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    const auto& b = bounds[j];
    if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low < b.high)) {
      throw std::invalid_argument("parameter bound " + std::to_string(j) + " must satisfy low < high");
    }
  }
  if (bounds[1].low <= 0.0) throw std::invalid_argument("sigma lower bound must be > 0");
  if (bounds[2].low < 0.0) throw std::invalid_argument("lambda lower bound must be >= 0");
  if (bounds[2].high * delta_t > 1.0 + kIntensitySlack) {
    throw std::invalid_argument("lambda upper bound must be <= 1 / delta_t");
  }
  if (bounds[4].low < 0.0) throw std::invalid_argument("sigma_q lower bound must be >= 0");
}

double ball_torous_density(double y, const JumpDiffusionParams& params, double delta_t) {
  const double q = params.lambda * delta_t;
  if (!(q >= 0.0 && q <= 1.0 + kIntensitySlack)) throw std::invalid_argument("ball_torous_density: need 0 <= lambda dt <= 1");
  const double w = std::min(q, 1.0);
  const double a = (params.mu - 0.5 * params.sigma * params.sigma) * delta_t;
  const double v = params.sigma * params.sigma * delta_t;
  return (1.0 - w) * normal_pdf(y, a, v) +
         w * normal_pdf(y, a + params.mu_q, v + params.sigma_q * params.sigma_q);
}

double generalized_density(double y, const JumpDiffusionParams& params, double delta_t, int m) {
  const double q = params.lambda * delta_t;
  if (!(q >= 0.0 && q <= 1.0 + kIntensitySlack)) throw std::invalid_argument("generalized_density: need 0 <= lambda dt <= 1");
  const auto w = poisson_weights(std::min(q, 1.0), m);
  const double a = (params.mu - 0.5 * params.sigma * params.sigma) * delta_t;
  const double v = params.sigma * params.sigma * delta_t;
  const double sq2 = params.sigma_q * params.sigma_q;
  double f = 0.0;
  for (int k = 0; k <= m; ++k) {
    if (w.weights[k] == 0.0) continue;
    f += w.weights[k] * normal_pdf(y, a + k * params.mu_q, v + k * sq2);
  }
  return f;
}

double model_density(double y, const JumpDiffusionParams& params, const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::pure_diffusion:
      return normal_pdf(y, (params.mu - 0.5 * params.sigma * params.sigma) * spec.delta_t,
                        params.sigma * params.sigma * spec.delta_t);
    case ModelKind::ball_torous:
      return ball_torous_density(y, params, spec.delta_t);
    case ModelKind::generalized_m_jump:
      return generalized_density(y, params, spec.delta_t, spec.m);
  }
  return 0.0;
}

namespace {

// Hot loop of the optimizer: the mixture is set up once per parameter set.
double log_likelihood_unchecked(std::span<const double> returns, const JumpDiffusionParams& p,
                                const ModelSpec& spec) {
  const double dt = spec.delta_t;
  const double a = (p.mu - 0.5 * p.sigma * p.sigma) * dt;
  const double v = p.sigma * p.sigma * dt;
  std::vector<MixtureComponent> comps;
  switch (spec.kind) {
    case ModelKind::pure_diffusion:
      comps.push_back({1.0, a, v});
      break;
    case ModelKind::ball_torous: {
      const double w = std::min(p.lambda * dt, 1.0);
      comps.push_back({1.0 - w, a, v});
      comps.push_back({w, a + p.mu_q, v + p.sigma_q * p.sigma_q});
      break;
    }
    case ModelKind::generalized_m_jump: {
      const auto w = poisson_weights(std::min(p.lambda * dt, 1.0), spec.m);
      for (int k = 0; k <= spec.m; ++k) comps.push_back({w.weights[k], a + k * p.mu_q, v + k * p.sigma_q * p.sigma_q});
      break;
    }
  }
  std::erase_if(comps, [](const MixtureComponent& c) { return c.weight == 0.0; });
  // weight / sqrt(2 pi var) and -1 / (2 var), hoisted out of the data loop.
  std::vector<double> scale, curv;
  for (const auto& c : comps) {
    scale.push_back(c.weight * kInvSqrt2Pi / std::sqrt(c.variance));
    curv.push_back(-0.5 / c.variance);
  }
  double ll = 0.0;
  for (double y : returns) {
    double f = 0.0;
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const double z = y - comps[k].mean;
      f += scale[k] * std::exp(curv[k] * z * z);
    }
    ll += f > 0.0 ? std::max(std::log(f), kLogDensityFloor) : kLogDensityFloor;
  }
  return ll;
}

}  // namespace

double log_likelihood(std::span<const double> returns, const JumpDiffusionParams& params, const ModelSpec& spec) {
  if (returns.empty()) throw std::invalid_argument("log_likelihood: empty sample");
  spec.validate();
  if (!spec.contains(params)) throw std::invalid_argument("log_likelihood: parameters outside the bounds");
  return log_likelihood_unchecked(returns, params, spec);
}

JumpDiffusionParams normal_mle(std::span<const double> returns, double delta_t) {
  if (returns.size() < 2) throw DataError("normal_mle: need at least 2 observations");
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(returns.size());
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  var /= static_cast<double>(returns.size());
  if (!(var > 0.0)) throw DataError("normal_mle: sample has zero spread");
  JumpDiffusionParams p;
  const double s2 = var / delta_t;
  p.sigma = std::sqrt(s2);
  p.mu = mean / delta_t + 0.5 * s2;
  p.lambda = 0.0;
  p.mu_q = 0.0;
  p.sigma_q = 0.0;
  return p;
}

FitResult fit(std::span<const double> returns, const ModelSpec& spec, DEConfig config, const DEMemory* memory,
              std::span<const JumpDiffusionParams> seeds) {
  if (returns.empty()) throw std::invalid_argument("fit: empty sample");
  spec.validate();
  config.bounds = spec.active_bounds();
  std::vector<std::vector<double>> seed_vectors;
  for (const auto& s : seeds) seed_vectors.push_back(spec.to_vector(s));

  const auto objective = [&](std::span<const double> x) {
    return -log_likelihood_unchecked(returns, spec.from_vector(x), spec);
  };
  const auto outcome = de_minimize(objective, config, memory, seed_vectors);
  if (!std::isfinite(outcome.best_value)) throw NumericalError("fit: no candidate has a finite likelihood");

  FitResult r;
  r.params = spec.from_vector(outcome.best_vector);
  r.log_likelihood = -outcome.best_value;
  r.evaluations = outcome.evaluations;
  const auto& h = outcome.history;
  r.converged = h.size() < 2 || (h[h.size() - 2] - h.back()) < 1e-8;
  return r;
}

}  // namespace semivar
