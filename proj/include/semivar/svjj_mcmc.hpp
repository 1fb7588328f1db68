#pragma once

/**
 * @file svjj_mcmc.hpp
 * @brief Gibbs / Metropolis sampler for the SVJJ model of svjj.hpp.
 *
 * One sweep updates, in order: mu, kappa, theta, rho, sigma_nu^2,
 * (mu_y, rho_j), sigma_y^2, mu_nu, lambda; then for every day the jump count,
 * the variance jump and the return jump; then every V_t (t >= 1) by
 * random-walk Metropolis. V_0 stays at its initial value.
 *
 * The full conditionals are exposed individually so that each can be checked
 * against an independent evaluation of the posterior.
 */

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semivar/returns.hpp"
#include "semivar/rng.hpp"
#include "semivar/svjj.hpp"

namespace semivar {

// --- initialization ---------------------------------------------------------

struct InitOptions {
  std::size_t variance_window = 63;  ///< three months of trading days
  double jump_threshold = 2.57;      ///< robust z-score above which a day is a jump day
};

struct InitialEstimate {
  SVJJLatentState state;
  SVJJParams params;
  double jump_fraction = 0.0;  ///< share of days flagged as jumps
  bool degenerate = false;     ///< sample without spread; no jumps flagged
};

/// Starting values from percent returns `y`:
///   V_t: variance of the trailing `variance_window` returns (the first full
///        window for early days);
///   jump days: |y_t - median| > threshold * 1.4826 * MAD;
///   x^y_t: the observed return; x^v_t: max(V_t - V_{t-1}, floor);
///   J_t: the k in 1..m maximizing the Gamma(k, scale mu_nu) density at x^v_t
///        (ties to the smaller k), 0 on other days;
///   lambda: fraction of jump days.
/// @throws DataError with fewer than 90 observations.
InitialEstimate init_latent_state(std::span<const double> y, int m, const InitOptions& options = {});

/// argmax over k in 1..m of the Gamma(k, scale mu_nu) density at xi_nu.
int most_likely_jump_count(double xi_nu, double mu_nu, int m);

// --- full conditionals ------------------------------------------------------

struct NormalLaw {
  double mean;
  double variance;
};

/// Normal restricted to (lower, upper).
struct TruncatedNormalLaw {
  double mean;
  double variance;
  double lower;
  double upper;
};

struct InverseGammaLaw {
  double shape;
  double scale;
};

struct GammaLaw {
  double shape;
  double scale;
};

struct BivariateNormalLaw {
  std::array<double, 2> mean;
  std::array<double, 3> cov;  ///< (var0, cov01, var1)
};

/// Inputs shared by the conditionals: percent returns and the current draw.
struct SamplerView {
  std::span<const double> y;
  const SVJJParams& params;
  const SVJJLatentState& state;
  const PriorSpec& priors;
  int m;
};

NormalLaw mu_conditional(const SamplerView& s);
TruncatedNormalLaw kappa_conditional(const SamplerView& s);
TruncatedNormalLaw theta_conditional(const SamplerView& s);
BivariateNormalLaw jump_mean_conditional(const SamplerView& s);  ///< (mu_y, rho_j)
InverseGammaLaw sigma_y2_conditional(const SamplerView& s);
GammaLaw mu_nu_rate_conditional(const SamplerView& s);  ///< law of 1 / mu_nu
/// Exact conditional of sigma_nu^2 when rho = 0; the Metropolis proposal otherwise.
InverseGammaLaw sigma_nu2_proposal(const SamplerView& s);
NormalLaw xi_y_conditional(const SamplerView& s, std::size_t t);
/// For J_t = k >= 1 the conditional of x^v_t is this law times x^(k-1).
TruncatedNormalLaw xi_nu_conditional(const SamplerView& s, std::size_t t);

/// Unnormalized log conditional of V_t (t >= 1): the day-t and day-(t+1)
/// bivariate terms that involve V_t. -inf for v <= 0.
double v_log_conditional(const SamplerView& s, std::size_t t, double v);

/// Unnormalized log conditional of rho on (-1, 1) and of s = sigma_nu^2 > 0.
double rho_log_conditional(const SamplerView& s, double rho);
double sigma_nu2_log_conditional(const SamplerView& s, double s2);
/// Unnormalized log conditional of lambda on [0, 1).
double lambda_log_conditional(const SamplerView& s, double lambda);

double draw(const NormalLaw& law, Rng& rng);
double draw(const TruncatedNormalLaw& law, Rng& rng);
double draw(const InverseGammaLaw& law, Rng& rng);
double draw(const GammaLaw& law, Rng& rng);
std::array<double, 2> draw(const BivariateNormalLaw& law, Rng& rng);

/// Metropolis updates; each returns true when the proposal was accepted.
bool update_rho(const SamplerView& s, double& rho, Rng& rng);
bool update_sigma_nu(const SamplerView& s, double& sigma_nu, Rng& rng);
bool update_lambda(const SamplerView& s, double& lambda, Rng& rng);
/// Random-walk step of size `step` for V_t.
bool update_v(const SamplerView& s, std::size_t t, double step, double& v, Rng& rng);
/// Draws x^v_t given J_t (exact for k = 1, independence Metropolis for k >= 2).
bool update_xi_nu(const SamplerView& s, std::size_t t, double& xi_nu, Rng& rng);

// --- chain ------------------------------------------------------------------

struct McmcConfig {
  int iterations = 20000;
  int burn_in = 5000;
  int m = 5;
  std::uint64_t seed = 1;
  double return_scale = 100.0;  ///< log-returns are multiplied by this (percent)
  int state_thin = 10;          ///< latent states stored every n-th kept iteration
  bool store_states = true;
  double v_step = 0.5;          ///< initial random-walk step, in units of the initial V_t
  int adapt_interval = 100;     ///< burn-in iterations between step-size updates
  PriorSpec priors{};
  InitOptions init{};

  /// @throws std::invalid_argument unless iterations > burn_in >= 0, m >= 1, ...
  void validate() const;
};

struct ChainOutput {
  std::vector<std::array<double, SVJJParams::kCount>> draws;  ///< every kept iteration
  std::vector<int> draw_iterations;
  std::vector<SVJJLatentState> states;  ///< thinned
  std::vector<int> state_iterations;
  SVJJLatentState last_state;
  SVJJParams last_params;
  std::vector<double> mean_v;          ///< posterior mean of V_t
  std::vector<double> mean_jump_y;     ///< posterior mean of x^y_t 1{J_t >= 1}
  std::vector<double> jump_probability; ///< posterior P(J_t >= 1)
  std::map<std::string, double> acceptance;  ///< post burn-in acceptance rates
  double v_step = 0.0;                 ///< random-walk step after adaptation
  InitialEstimate initial;

  SVJJParams posterior_mean() const;
  SVJJParams posterior_sd() const;
  /// Monte-Carlo standard errors by batch means (sqrt(n) batches).
  SVJJParams mc_standard_error() const;
  /// Central interval from the empirical quantiles of the kept draws.
  std::pair<SVJJParams, SVJJParams> credible_interval(double level = 0.95) const;
};

/// @throws DataError on too short data; NumericalError if the state becomes
///         numerically degenerate (the day index is reported).
ChainOutput run_mcmc(std::span<const double> log_returns, const McmcConfig& config);
inline ChainOutput run_mcmc(const ReturnSeries& returns, const McmcConfig& config) {
  return run_mcmc(returns.values(), config);
}

// --- diagnostics ------------------------------------------------------------

/// Sample autocorrelation at lags 0..max_lag. A constant series gives 1 at
/// every lag.
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag = 50);

struct ParameterDiagnostics {
  std::string name;
  std::vector<double> acf;
  double mean = 0.0;
  double sd = 0.0;
  double mc_se = 0.0;
  bool non_mixing = false;  ///< constant chain or lag-50 autocorrelation above 0.9
};

struct Diagnostics {
  std::vector<ParameterDiagnostics> parameters;
  std::vector<double> residuals;  ///< (y_t - mu - x^y_t 1{J_t>=1}) / sqrt(V_{t-1}), t >= 1
  double residual_mean = 0.0;
  double residual_variance = 0.0;
  std::vector<std::pair<double, double>> qq;  ///< (normal quantile, sorted residual)
};

/// With stored states, residual mean and variance are averaged over the
/// stored joint draws of parameters and state, and the residuals and QQ pairs
/// are those of the last stored draw. Without stored states the posterior
/// means (mean V, mean jump contribution) are used.
Diagnostics diagnostics(const ChainOutput& chain, std::span<const double> y_percent);
/// Residuals at the given parameters and state.
Diagnostics diagnostics(const ChainOutput& chain, std::span<const double> y_percent, const SVJJParams& params,
                        std::span<const double> v, std::span<const double> jump_y);

/// One row per kept draw: iteration followed by the ten parameters, rescaled
/// by unit_factors(unit_factor) (1 keeps the estimation units).
void write_chain_csv(std::ostream& out, const ChainOutput& chain, double unit_factor = 1.0);
/// parameter,mean,sd,mc_se,q025,q975 rows, rescaled likewise.
void write_posterior_summary_csv(std::ostream& out, const ChainOutput& chain, double unit_factor = 1.0);
/// Long format: parameter,lag,acf.
void write_acf_csv(std::ostream& out, const Diagnostics& d);
void write_qq_csv(std::ostream& out, const Diagnostics& d);

}  // namespace semivar
