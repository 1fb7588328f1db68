#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "semivar/de.hpp"
#include "test_support.hpp"

using namespace semivar;
namespace ts = testing_support;

namespace {

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

DEConfig box(std::size_t d, double lo, double hi) {
  DEConfig c;
  c.bounds.assign(d, Bound{lo, hi});
  return c;
}

}  // namespace

TEST(DE, SphereDefaults) {
  const auto out = de_minimize(sphere, box(5, -5, 5));
  EXPECT_LE(out.best_value, 1e-6);
  EXPECT_EQ(out.history.size(), 251u);
  EXPECT_EQ(out.evaluations, 200L * 251);
}

TEST(DE, ConstantObjective) {
  auto c = box(3, -1, 1);
  c.max_iterations = 5;
  const auto out = de_minimize([](std::span<const double>) { return 2.5; }, c);
  EXPECT_EQ(out.history[1], 2.5);
  EXPECT_EQ(out.best_value, 2.5);
}

TEST(DE, MemoryWithOptimumNeverWorsens) {
  auto c = box(4, -5, 5);
  c.max_iterations = 30;
  c.population_size = 20;
  const auto f = [](std::span<const double> x) { return sphere(x) + 0.5 * std::cos(3 * x[0]); };
  const std::vector<double> opt{-1.0471975511965976, 0, 0, 0};  // minimum of x^2 + 0.5 cos(3x) near -pi/3
  DEMemory mem(10);
  mem.push(opt, c.bounds);
  const auto out = de_minimize(f, c, &mem);
  EXPECT_LE(out.history[0], f(opt));
  for (std::size_t g = 1; g < out.history.size(); ++g) EXPECT_LE(out.history[g], out.history[g - 1]);
}

TEST(DE, NanTreatedAsInfinity) {
  auto c = box(2, -1, 1);
  c.population_size = 10;
  c.max_iterations = 20;
  const auto f = [](std::span<const double> x) {
    return x[0] > 0 ? std::numeric_limits<double>::quiet_NaN() : sphere(x);
  };
  const auto out = de_minimize(f, c);
  EXPECT_TRUE(std::isfinite(out.best_value));
  EXPECT_LE(out.best_vector[0], 0.0);
}

TEST(DE, ThreadCountDoesNotChangeResult) {
  auto c = box(3, -2, 2);
  c.max_iterations = 40;
  c.population_size = 30;
  const auto f = [](std::span<const double> x) { return std::abs(x[0] - 0.3) + std::pow(x[1] + 0.1, 2) + x[2] * x[2]; };
  c.threads = 1;
  const auto a = de_minimize(f, c);
  c.threads = 4;
  const auto b = de_minimize(f, c);
  EXPECT_EQ(a.best_vector, b.best_vector);
  EXPECT_EQ(a.history, b.history);
}

TEST(DEMemory, PushAndEvict) {
  const std::vector<Bound> b(2, Bound{0, 100});
  DEMemory m(50);
  m = push_memory(m, std::vector<double>{1, 1}, b);
  EXPECT_EQ(m.size(), 1u);
  for (int i = 2; i <= 51; ++i) m.push(std::vector<double>{double(i), double(i)}, b);
  EXPECT_EQ(m.size(), 50u);
  EXPECT_EQ(m.entries().front()[0], 2.0);
  EXPECT_EQ(m.entries().back()[0], 51.0);
  EXPECT_THROW(m.push(std::vector<double>{101, 1}, b), std::invalid_argument);
  EXPECT_THROW(m.push(std::vector<double>{1}, b), std::invalid_argument);
  EXPECT_THROW(DEMemory(0), std::invalid_argument);
}

TEST(DEMemory, EntriesSeedInitialPopulation) {
  auto c = box(2, -10, 10);
  c.population_size = 8;
  c.max_iterations = 0;
  DEMemory mem(5);
  mem.push(std::vector<double>{1, 2}, c.bounds);
  mem.push(std::vector<double>{3, 4}, c.bounds);
  const std::vector<std::vector<double>> seeds{{20, -20}};
  std::vector<std::vector<double>> initial;
  de_minimize(sphere, c, &mem, seeds, [&](int g, const auto& pop, const auto&) {
    if (g == 0) initial = pop;
  });
  ASSERT_EQ(initial.size(), 8u);
  EXPECT_EQ(initial[0], (std::vector<double>{3, 4}));  // newest first
  EXPECT_EQ(initial[1], (std::vector<double>{1, 2}));
  EXPECT_EQ(initial[2], (std::vector<double>{10, -10}));  // seeds are clamped
}

TEST(DEConfig, Validation) {
  auto c = box(2, -1, 1);
  c.population_size = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = box(2, 1, -1);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = box(2, -1, 1);
  c.crossover = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = DEConfig{};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

// Hand-rolled generator over dimensions, boxes, rates and seeds.
TEST(DEProperty, InvariantsHoldOnRandomProblems) {
  ts::Gen gen(77);
  for (int trial = 0; trial < 25; ++trial) {
    const auto d = static_cast<std::size_t>(gen.integer(1, 6));
    DEConfig c;
    for (std::size_t j = 0; j < d; ++j) {
      const double lo = gen.uniform(-10, 5);
      c.bounds.push_back({lo, lo + gen.log_uniform(1e-3, 20)});
    }
    c.population_size = gen.integer(4, 40);
    c.crossover = gen.uniform(0, 1);
    c.weight = gen.uniform(0, 1);
    c.max_iterations = gen.integer(0, 30);
    c.seed = static_cast<std::uint64_t>(gen.integer(0, 1 << 30));
    std::vector<double> shift(d);
    for (auto& s : shift) s = gen.uniform(-10, 10);
    const auto f = [&](std::span<const double> x) {
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) s += std::abs(x[j] - shift[j]) + std::sin(5 * x[j]);
      return s;
    };
    bool inside = true;
    const auto out = de_minimize(f, c, nullptr, {}, [&](int, const auto& pop, const auto&) {
      for (const auto& x : pop)
        for (std::size_t j = 0; j < d; ++j) inside = inside && x[j] >= c.bounds[j].low && x[j] <= c.bounds[j].high;
    });
    ASSERT_TRUE(inside);
    for (std::size_t g = 1; g < out.history.size(); ++g) ASSERT_LE(out.history[g], out.history[g - 1]);
    const auto again = de_minimize(f, c);
    ASSERT_EQ(out.best_vector, again.best_vector);
    ASSERT_EQ(out.best_value, again.best_value);

    // Every trial differs from its parent in at least one coordinate unless the
    // mutant equals the parent there (only possible for degenerate partner sets).
    std::vector<std::vector<double>> pop(static_cast<std::size_t>(c.population_size), std::vector<double>(d));
    for (auto& x : pop)
      for (std::size_t j = 0; j < d; ++j) x[j] = gen.uniform(c.bounds[j].low, c.bounds[j].high);
    Rng rng(c.seed);
    c.weight = std::max(c.weight, 0.1);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const auto t = make_trial(pop, i, c, rng);
      std::size_t changed = 0;
      for (std::size_t j = 0; j < d; ++j) changed += t[j] != pop[i][j];
      ASSERT_GE(changed, 1u);
    }
  }
}
