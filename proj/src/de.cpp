#include "semivar/de.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "semivar/parallel.hpp"

namespace semivar {

namespace {

double sanitize(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

}  // namespace

void DEConfig::validate() const {
  if (population_size < 4) throw std::invalid_argument("DE population must be >= 4");
  if (bounds.empty()) throw std::invalid_argument("DE bounds are empty");
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    const auto& b = bounds[j];
    if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low <= b.high)) {
      throw std::invalid_argument("DE bound " + std::to_string(j) + " is not a finite interval");
    }
  }
  if (!(crossover >= 0.0 && crossover <= 1.0)) throw std::invalid_argument("DE crossover must be in [0, 1]");
  if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("DE weight must be in [0, 1]");
  if (max_iterations < 0) throw std::invalid_argument("DE max_iterations must be >= 0");
}

DEMemory::DEMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("DE memory capacity must be >= 1");
}

void DEMemory::push(std::span<const double> solution, std::span<const Bound> bounds) {
  if (solution.size() != bounds.size()) throw std::invalid_argument("memory vector has the wrong dimension");
  for (std::size_t j = 0; j < solution.size(); ++j) {
    if (!(solution[j] >= bounds[j].low && solution[j] <= bounds[j].high)) {
      throw std::invalid_argument("memory vector coordinate " + std::to_string(j) + " is out of bounds");
    }
  }
  if (ring_.size() == capacity_) ring_.pop_front();
  ring_.emplace_back(solution.begin(), solution.end());
}

DEMemory push_memory(DEMemory memory, std::span<const double> solution, std::span<const Bound> bounds) {
  memory.push(solution, bounds);
  return memory;
}

std::vector<double> make_trial(const std::vector<std::vector<double>>& population, std::size_t i,
                               const DEConfig& config, Rng& rng) {
  const std::size_t v = population.size();
  const std::size_t d = config.dimension();
  std::size_t a, b, c;
  do a = rng.below(v); while (a == i);
  do b = rng.below(v); while (b == i || b == a);
  do c = rng.below(v); while (c == i || c == a || c == b);
  const std::size_t rho = rng.below(d);
  std::vector<double> trial = population[i];
  for (std::size_t j = 0; j < d; ++j) {
    const bool take = rng.uniform() < config.crossover;
    if (take || j == rho) {
      const double x = population[a][j] + config.weight * (population[b][j] - population[c][j]);
      trial[j] = std::clamp(x, config.bounds[j].low, config.bounds[j].high);
    }
  }
  return trial;
}

DEOutcome de_minimize(const Objective& objective, const DEConfig& config, const DEMemory* memory,
                      std::span<const std::vector<double>> seeds, const PopulationObserver& observer) {
  config.validate();
  const std::size_t v = static_cast<std::size_t>(config.population_size);
  const std::size_t d = config.dimension();
  const unsigned threads = resolve_threads(config.threads);
  Rng rng(config.seed);

  std::vector<std::vector<double>> population;
  population.reserve(v);
  if (memory) {
    for (auto it = memory->entries().rbegin(); it != memory->entries().rend() && population.size() < v; ++it) {
      if (it->size() != d) throw std::invalid_argument("DE memory vector has the wrong dimension");
      population.push_back(*it);
    }
  }
  for (const auto& s : seeds) {
    if (population.size() == v) break;
    if (s.size() != d) throw std::invalid_argument("DE seed vector has the wrong dimension");
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = std::clamp(s[j], config.bounds[j].low, config.bounds[j].high);
    population.push_back(std::move(x));
  }
  while (population.size() < v) {
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) {
      const auto& b = config.bounds[j];
      x[j] = b.low + (b.high - b.low) * rng.uniform();
    }
    population.push_back(std::move(x));
  }

  DEOutcome out;
  std::vector<double> values(v);
  parallel_for(v, threads, [&](std::size_t i) { values[i] = sanitize(objective(population[i])); });
  out.evaluations += static_cast<long>(v);

  auto best_index = [&] {
    return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  };
  out.history.push_back(values[best_index()]);
  if (observer) observer(0, population, values);

  std::vector<std::vector<double>> trials(v);
  std::vector<double> trial_values(v);
  for (int g = 1; g <= config.max_iterations; ++g) {
    for (std::size_t i = 0; i < v; ++i) trials[i] = make_trial(population, i, config, rng);
    parallel_for(v, threads, [&](std::size_t i) { trial_values[i] = sanitize(objective(trials[i])); });
    out.evaluations += static_cast<long>(v);
    for (std::size_t i = 0; i < v; ++i) {
      if (trial_values[i] < values[i]) {
        population[i].swap(trials[i]);
        values[i] = trial_values[i];
      }
    }
    out.history.push_back(values[best_index()]);
    if (observer) observer(g, population, values);
  }

  const auto k = best_index();
  out.best_vector = population[k];
  out.best_value = values[k];
  return out;
}

}  // namespace semivar
