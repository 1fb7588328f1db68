#include "semivar/returns.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "semivar/errors.hpp"

namespace semivar {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, delimiter)) fields.push_back(trim(field));
  if (!line.empty() && line.back() == delimiter) fields.emplace_back();
  return fields;
}

std::optional<double> parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

void check_dates(const std::vector<std::string>& dates, const std::string& what) {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i] == dates[i - 1]) {
      throw DataError(what + ": duplicate date '" + dates[i] + "'");
    }
    if (dates[i] < dates[i - 1]) {
      throw DataError(what + ": date '" + dates[i] + "' is out of order (follows '" +
                      dates[i - 1] + "')");
    }
  }
}

}  // namespace

PriceSeries::PriceSeries(std::vector<PricePoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DataError("price series needs at least 2 observations");
  std::vector<std::string> dates;
  dates.reserve(points_.size());
  for (const auto& p : points_) {
    if (!std::isfinite(p.level) || p.level <= 0.0) {
      throw DataError("non-positive level " + std::to_string(p.level) + " on " + p.date);
    }
    dates.push_back(p.date);
  }
  check_dates(dates, "price series");
}

ReturnSeries::ReturnSeries(std::vector<std::string> dates, std::vector<double> values,
                           double delta_t)
    : dates_(std::move(dates)), values_(std::move(values)), delta_t_(delta_t) {
  if (dates_.size() != values_.size()) throw DataError("return series: dates/values length mismatch");
  if (!(delta_t_ > 0.0) || !std::isfinite(delta_t_)) throw DataError("return series: delta_t must be > 0");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("return series: non-finite value at index " + std::to_string(i));
    }
  }
  check_dates(dates_, "return series");
}

ReturnSeries ReturnSeries::from_values(std::vector<double> values, double delta_t) {
  std::vector<std::string> dates;
  dates.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::ostringstream label;
    label << 't' << std::setw(7) << std::setfill('0') << i + 1;
    dates.push_back(label.str());
  }
  return ReturnSeries(std::move(dates), std::move(values), delta_t);
}

ReturnSeries ReturnSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw DataError("return series: slice out of range");
  return ReturnSeries(std::vector<std::string>(dates_.begin() + first, dates_.begin() + first + count),
                      std::vector<double>(values_.begin() + first, values_.begin() + first + count),
                      delta_t_);
}

PriceSeries parse_prices(std::istream& in, const CsvLayout& layout, const std::string& source) {
  std::vector<PricePoint> points;
  std::string line;
  std::size_t row = 0;
  bool first_content_row = true;
  const std::size_t needed = std::max(layout.date_column, layout.level_column) + 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line, layout.delimiter);
    const auto where = [&](std::size_t column) {
      return source + ": row " + std::to_string(row) + ", column " + std::to_string(column + 1);
    };
    if (fields.size() < needed) {
      throw DataError(where(fields.size()) + ": expected " + std::to_string(needed) + " fields");
    }
    const auto level = parse_double(fields[layout.level_column]);
    if (!level) {
      if (first_content_row) {
        first_content_row = false;  // header
        continue;
      }
      throw DataError(where(layout.level_column) + ": cannot parse level '" +
                      fields[layout.level_column] + "'");
    }
    first_content_row = false;
    const std::string& date = fields[layout.date_column];
    if (date.empty()) throw DataError(where(layout.date_column) + ": empty date");
    if (!std::isfinite(*level) || *level <= 0.0) {
      throw DataError(where(layout.level_column) + ": non-positive level '" +
                      fields[layout.level_column] + "'");
    }
    points.push_back({date, *level});
  }
  try {
    return PriceSeries(std::move(points));
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
}

PriceSeries load_prices(const std::filesystem::path& path, const CsvLayout& layout) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file '" + path.string() + "'");
  return parse_prices(in, layout, path.string());
}

void write_prices(const std::filesystem::path& path, const PriceSeries& prices) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "date,level\n" << std::setprecision(17);
  for (const auto& p : prices.points()) out << p.date << ',' << p.level << '\n';
}

ReturnSeries to_log_returns(const PriceSeries& prices, double delta_t) {
  const auto& pts = prices.points();
  std::vector<std::string> dates;
  std::vector<double> values;
  dates.reserve(pts.size() - 1);
  values.reserve(pts.size() - 1);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    dates.push_back(pts[i].date);
    values.push_back(std::log(pts[i].level / pts[i - 1].level));
  }
  return ReturnSeries(std::move(dates), std::move(values), delta_t);
}

PriceSeries to_prices(const ReturnSeries& returns, double start_level, const std::string& start_date) {
  std::vector<PricePoint> points;
  points.reserve(returns.size() + 1);
  points.push_back({start_date, start_level});
  double log_level = std::log(start_level);
  for (std::size_t i = 0; i < returns.size(); ++i) {
    log_level += returns.values()[i];
    points.push_back({returns.dates()[i], std::exp(log_level)});
  }
  return PriceSeries(std::move(points));
}

SampleStats sample_stats(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 4) throw DataError("sample statistics need at least 4 observations, got " + std::to_string(n));
  SampleStats stats;
  stats.count = n;
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - stats.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const auto nd = static_cast<double>(n);
  stats.std_dev = std::sqrt(m2 / (nd - 1.0));
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  // Relative to the magnitude of the data, a spread this small is rounding noise.
  double scale = std::abs(stats.mean);
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (m2 <= 0.0 || std::sqrt(m2) <= 1e-14 * scale) {
    stats.std_dev = 0.0;
    return stats;
  }
  stats.skewness = m3 / std::pow(m2, 1.5);
  stats.kurtosis = m4 / (m2 * m2);
  return stats;
}

double empirical_semivariance(std::span<const double> values, double tau) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double r : values) {
    if (r < tau) acc += (tau - r) * (tau - r);
  }
  return acc / static_cast<double>(values.size());
}

}  // namespace semivar
