#pragma once

/**
 * @file rolling.hpp
 * @brief Rolling-window semideviation estimates.
 *
 * Every window of daily returns is fitted and the fitted law is evaluated
 * over one year:
 *   sqrt_time       empirical daily semideviation times sqrt(steps per year)
 *   pure_diffusion  closed-form normal MLE, semivariance at t = 1
 *   jump_diffusion  DE fit of the m-jump model, series truncated at m * 252
 */

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semivar/de.hpp"
#include "semivar/likelihood.hpp"
#include "semivar/returns.hpp"

namespace semivar {

enum class Method { sqrt_time, pure_diffusion, jump_diffusion };

/// "sqrt", "pure", "jump".
std::string_view method_name(Method m) noexcept;
/// Accepts the short names and the long ones ("sqrt_time", ...).
/// @throws std::invalid_argument on an unknown name.
Method parse_method(std::string_view name);

struct RollingConfig {
  std::size_t window = 252;
  std::vector<Method> methods{Method::sqrt_time, Method::pure_diffusion, Method::jump_diffusion};
  double lambda_cap = 252.0;  ///< per year
  int m = 5;
  double threshold = 0.0;  ///< tau, a log-return level
  double horizon = 1.0;    ///< years over which the fitted law is evaluated
  ModelKind jump_model = ModelKind::generalized_m_jump;
  DEConfig de{};  ///< population, rates, iterations, seed; bounds are set per fit
  bool use_memory = true;
  std::size_t memory_capacity = 50;
  /// With memory on, the previous window's solution is kept when its
  /// log-likelihood on the new window is within this of the DE optimum.
  double hysteresis = 1e-7;
  unsigned threads = 1;  ///< windows in parallel when memory is off; 0 = all cores

  /// @throws std::invalid_argument on window < 30, lambda_cap outside (0, 1/dt]
  ///         for the given step, m < 1 or no methods.
  void validate(double delta_t) const;
};

struct MethodEstimate {
  Method method = Method::sqrt_time;
  double semideviation = 0.0;  ///< annualized, fraction per sqrt(year)
  std::optional<JumpDiffusionParams> params;
  std::optional<double> log_likelihood;
  long evaluations = 0;  ///< objective evaluations spent by the optimizer
  bool ok = true;
  std::string note;
};

struct RollingRow {
  std::string date;
  std::size_t end_index = 0;  ///< index of the window's last return
  std::vector<MethodEstimate> estimates;

  const MethodEstimate* find(Method m) const noexcept;
};

/// Jump-diffusion fits of successive windows, carrying the DE memory and the
/// last accepted solution from one fit to the next (the sequential path of
/// roll() with memory on). With memory off every fit is independent.
class JumpWindowFitter {
 public:
  /// @throws std::invalid_argument on an invalid config.
  JumpWindowFitter(const RollingConfig& config, double delta_t);

  /// Fits one window. `index` keys the DE seed: Rng::substream(config.de.seed, index).
  /// A failed fit is returned with ok = false and leaves the memory untouched.
  MethodEstimate fit(std::span<const double> window, std::size_t index);

  const DEMemory& memory() const noexcept { return memory_; }
  const ModelSpec& spec() const noexcept { return spec_; }

 private:
  RollingConfig config_;
  double delta_t_;
  ModelSpec spec_;
  DEMemory memory_;
  std::optional<JumpDiffusionParams> previous_;
};

/// One row per window end, starting at index window - 1.
/// @throws DataError when the series is shorter than the window.
std::vector<RollingRow> roll(const ReturnSeries& returns, const RollingConfig& config);

struct SweepSeries {
  double cap = 0.0;
  std::vector<std::string> dates;
  std::vector<double> semideviation;
};

/// Jump-diffusion semideviation series, one per lambda upper bound.
/// @throws std::invalid_argument for caps outside (0, 1/dt].
std::vector<SweepSeries> lambda_constraint_sweep(const ReturnSeries& returns, const std::vector<double>& caps,
                                                 RollingConfig config);

/// Annualized semideviation of the fitted jump-diffusion (closed-form
/// mixture sum at the configured horizon).
double annualized_semideviation(const JumpDiffusionParams& params, const RollingConfig& config, double delta_t);

/// Writes `date,method,semideviation,mu,sigma,lambda,mu_q,sigma_q,loglik`.
/// Parameter fields are empty for the sqrt_time method; failed fits carry
/// "nan" in every numeric field.
void write_rolling_csv(std::ostream& out, const std::vector<RollingRow>& rows);

}  // namespace semivar
