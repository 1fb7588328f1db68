#pragma once

/**
 * @file svjj_simulate.hpp
 * @brief Monte-Carlo horizon returns of the SVJJ process, Gaussian kernel
 *        density estimation and semivariance by quadrature of the density.
 *
 * Parameters are in the estimation units of svjj.hpp (day, percent). The
 * horizon and Euler step are given in years and converted with `time_unit`
 * (years per parameter time unit); returned horizon returns are fractions
 * (divided by `return_scale`).
 *
 * Path construction: jump times are exact (exponential gaps). The diffusion
 * advances on the fixed Euler grid; when a jump falls inside a grid interval
 * the step is split at the jump time, the jump is applied, and the remainder
 * of the interval is stepped. Several jumps in one interval are all applied.
 */

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "semivar/quadrature.hpp"
#include "semivar/rng.hpp"
#include "semivar/semivariance.hpp"
#include "semivar/svjj.hpp"

namespace semivar {

struct SimulationConfig {
  double horizon = 1.0;            ///< years
  int paths = 1000;
  double euler_dt = 1.0 / 252.0;   ///< years
  std::uint64_t seed = 1;
  std::optional<double> v0;        ///< initial variance; theta when empty
  double time_unit = 1.0 / 252.0;  ///< years per parameter time unit
  double return_scale = 100.0;
  unsigned threads = 1;            ///< 0 = all cores; results do not depend on it

  /// @throws std::invalid_argument on horizon <= 0, paths < 1, euler_dt <= 0, ...
  void validate() const;
};

/// Ordered jump times in [0, horizon] of a Poisson process with the given
/// rate (same time unit as the horizon).
std::vector<double> simulate_jump_times(double rate, double horizon, Rng& rng);

struct EulerState {
  double y;
  double v;
};

/// Full-truncation Euler step of length dt with standard normals z1, z2:
/// Y' = Y + mu dt + sqrt(V+ dt) z1,
/// V' = V + kappa (theta - V+) dt + sigma_nu sqrt(V+ dt) (rho z1 + sqrt(1 - rho^2) z2),
/// V+ = max(V, 0).
EulerState euler_step(EulerState s, const SVJJParams& params, double dt, double z1, double z2) noexcept;

struct PathSummary {
  double log_return = 0.0;  ///< Y_horizon - Y_0, fraction
  int jumps = 0;
  double final_v = 0.0;     ///< parameter units
};

PathSummary simulate_horizon_return(const SVJJParams& params, const SimulationConfig& config, Rng& rng);

/// `config.paths` horizon returns; path i uses Rng::substream(seed, i).
std::vector<double> simulate_horizon_returns(const SVJJParams& params, const SimulationConfig& config);

struct DailyPath {
  std::vector<double> log_returns;  ///< fractions
  SVJJLatentState state;            ///< in parameter units
};

/// Daily series following the estimation model exactly: on day t a
/// Poisson(lambda) count of jumps (capped at m) with aggregate sizes is added to a
/// unit-step full-truncation Euler move from V_{t-1}. log_returns[0] is a
/// pure diffusion day; state.v[0] = v0.
DailyPath simulate_daily_path(const SVJJParams& params, std::size_t days, double v0, int m, std::uint64_t seed,
                              double return_scale = 100.0);

/// Gaussian kernel density estimate.
class DensityEstimate {
 public:
  /// Bandwidth 0.9 min(sd, IQR / 1.34) n^(-1/5).
  /// @throws std::invalid_argument with fewer than 2 points or zero spread.
  explicit DensityEstimate(std::vector<double> sample);
  DensityEstimate(std::vector<double> sample, double bandwidth);

  double bandwidth() const noexcept { return h_; }
  const std::vector<double>& sample() const noexcept { return sorted_; }  ///< sorted
  /// Kernel sum; points beyond 12 bandwidths are skipped (relative weight < 1e-31).
  double operator()(double x) const noexcept;
  double min() const noexcept { return sorted_.front(); }
  double max() const noexcept { return sorted_.back(); }

 private:
  std::vector<double> sorted_;
  double h_;
};

/// Normal-reference bandwidth of the sample.
double reference_bandwidth(std::span<const double> sample);

struct DensitySemivariance {
  SemivarianceResult result;
  QuadratureResult quadrature;
};

/// Integral of (tau - r)^2 f(r) over [min - 10 h, tau] with absolute tolerance
/// 1e-10. @throws NumericalError when the tolerance is not met.
DensitySemivariance semivariance_from_density(const DensityEstimate& density, double tau);

/// Same for an arbitrary density over (-inf, tau]: blocks of doubling width
/// leftwards from tau until a block adds less than 1e-12 of the total.
DensitySemivariance semivariance_from_density(const std::function<double(double)>& pdf, double tau,
                                              double initial_width = 1.0);

/// Standard error of the plug-in semivariance mean((tau - r)^2 1{r < tau}).
double semivariance_standard_error(std::span<const double> sample, double tau);

/// Writes `x,density` rows on an even grid spanning the sample +/- 4 h.
void write_density_grid_csv(std::ostream& out, const DensityEstimate& density, int points = 512);

}  // namespace semivar
