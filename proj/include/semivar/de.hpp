#pragma once

/**
 * @file de.hpp
 * @brief Bounded differential evolution (rand/1/bin) with an optional
 *        memory of past solutions used to seed the initial population.
 *
 * One generation: for every member i a trial is built from three distinct
 * partners a, b, c != i and a forced index rho,
 *
 *     trial_j = clamp(x_a,j + w (x_b,j - x_c,j))  if U_j < cr or j == rho
 *     trial_j = x_i,j                              otherwise,
 *
 * all trials are evaluated (possibly in parallel), then each trial replaces
 * its parent only if it is strictly better. Trials are drawn sequentially from
 * a single generator, so the outcome does not depend on the thread count.
 */

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "semivar/rng.hpp"

namespace semivar {

struct Bound {
  double low;
  double high;
};

struct DEConfig {
  int population_size = 200;
  double crossover = 0.5;  ///< probability of taking the mutant coordinate
  double weight = 0.8;     ///< differential weight
  int max_iterations = 250;
  std::vector<Bound> bounds;
  std::uint64_t seed = 42;
  unsigned threads = 1;  ///< 0 = hardware concurrency

  std::size_t dimension() const noexcept { return bounds.size(); }
  /// @throws std::invalid_argument on population < 4, empty or inverted
  ///         bounds, or probabilities outside [0, 1].
  void validate() const;
};

/// FIFO ring of recent solutions.
class DEMemory {
 public:
  explicit DEMemory(std::size_t capacity = 50);

  /// @throws std::invalid_argument if `solution` lies outside `bounds` or has
  ///         the wrong dimension.
  void push(std::span<const double> solution, std::span<const Bound> bounds);

  std::size_t size() const noexcept { return ring_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return ring_.empty(); }
  void clear() noexcept { ring_.clear(); }
  /// Oldest first.
  const std::deque<std::vector<double>>& entries() const noexcept { return ring_; }

 private:
  std::size_t capacity_;
  std::deque<std::vector<double>> ring_;
};

/// Functional form of DEMemory::push.
DEMemory push_memory(DEMemory memory, std::span<const double> solution, std::span<const Bound> bounds);

struct DEOutcome {
  std::vector<double> best_vector;
  double best_value = 0.0;
  std::vector<double> history;  ///< history[0]: initial population; then one entry per generation
  long evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Called with the population after initialization (generation 0) and after
/// each generation's selection.
using PopulationObserver = std::function<void(int generation, const std::vector<std::vector<double>>& population,
                                              const std::vector<double>& values)>;

/// Minimizes `objective` over the box. The initial population starts with
/// the memory entries (newest first), then `seeds`, then uniform draws; any
/// overflow beyond the population size is dropped. NaN objective values
/// are treated as +infinity.
DEOutcome de_minimize(const Objective& objective, const DEConfig& config, const DEMemory* memory = nullptr,
                      std::span<const std::vector<double>> seeds = {}, const PopulationObserver& observer = {});

/// One rand/1/bin trial for member `i`; exposed for testing.
std::vector<double> make_trial(const std::vector<std::vector<double>>& population, std::size_t i,
                               const DEConfig& config, Rng& rng);

}  // namespace semivar
