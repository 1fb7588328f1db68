#pragma once

/**
 * @file returns.hpp
 * @brief Price ingestion, log-returns and sample statistics.
 *
 * Every other module receives its data through a ReturnSeries. Dates are
 * opaque labels that only need to sort (ISO-8601 strings do); no calendar
 * arithmetic is performed.
 */

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semivar {

/// One trading day in a 252-day year.
inline constexpr double kDailyStep = 1.0 / 252.0;

struct PricePoint {
  std::string date;
  double level;
};

/// Dated price levels. Invariants: at least 2 points, dates strictly
/// increasing, levels strictly positive and finite.
class PriceSeries {
 public:
  /// @throws DataError if an invariant is violated.
  explicit PriceSeries(std::vector<PricePoint> points);

  const std::vector<PricePoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }

 private:
  std::vector<PricePoint> points_;
};

/// Dated log-returns sampled every `delta_t` years.
class ReturnSeries {
 public:
  /// @throws DataError on length mismatch, non-increasing dates, non-finite
  ///         values or delta_t <= 0.
  ReturnSeries(std::vector<std::string> dates, std::vector<double> values,
               double delta_t = kDailyStep);

  /// Series with generated, sortable labels ("t000001", ...). Used for
  /// synthetic data.
  static ReturnSeries from_values(std::vector<double> values, double delta_t = kDailyStep);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double delta_t() const noexcept { return delta_t_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<std::string>& dates() const noexcept { return dates_; }

  /// Contiguous sub-series [first, first + count).
  ReturnSeries slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<std::string> dates_;
  std::vector<double> values_;
  double delta_t_;
};

/// Moments of a return sample. Skewness and kurtosis use the population
/// central moments m2, m3, m4 (skew = m3 / m2^1.5, kurtosis = m4 / m2^2, so a
/// normal sample gives about 3; subtract 3 for excess kurtosis). std_dev is the
/// usual N-1 sample standard deviation. Skewness and kurtosis are empty when the
/// sample has zero spread.
struct SampleStats {
  double mean = 0.0;
  double std_dev = 0.0;
  std::optional<double> skewness;
  std::optional<double> kurtosis;
  std::size_t count = 0;

  bool degenerate() const noexcept { return !skewness.has_value(); }
};

/// Column layout of a price CSV. A header row is detected automatically when
/// the level field of the first row does not parse as a number.
struct CsvLayout {
  char delimiter = ',';
  std::size_t date_column = 0;
  std::size_t level_column = 1;
};

/// @throws DataError naming the path when the file cannot be opened, and the
///         row and column of the first field that fails to parse.
PriceSeries load_prices(const std::filesystem::path& path, const CsvLayout& layout = {});
PriceSeries parse_prices(std::istream& in, const CsvLayout& layout = {},
                         const std::string& source = "<stream>");
void write_prices(const std::filesystem::path& path, const PriceSeries& prices);

/// r_i = ln(level_i / level_{i-1}), dated by the later observation.
ReturnSeries to_log_returns(const PriceSeries& prices, double delta_t = kDailyStep);

/// Inverse of to_log_returns: cumulative exponentiation from `start_level`,
/// with `start_date` labelling the initial level.
PriceSeries to_prices(const ReturnSeries& returns, double start_level,
                      const std::string& start_date);

/// @throws DataError when fewer than 4 observations are given.
SampleStats sample_stats(std::span<const double> values);
inline SampleStats sample_stats(const ReturnSeries& returns) { return sample_stats(returns.values()); }

/// Discrete below-target semivariance: sum over r < tau of (tau - r)^2,
/// divided by the full sample size N.
double empirical_semivariance(std::span<const double> values, double tau = 0.0);
inline double empirical_semivariance(const ReturnSeries& returns, double tau = 0.0) {
  return empirical_semivariance(returns.values(), tau);
}

}  // namespace semivar
