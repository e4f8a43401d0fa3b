#include <gtest/gtest.h>

#include <cmath>

#include "gph/random.hpp"
#include "gph/sign_field.hpp"
#include "test_support.hpp"

namespace gph {
namespace {

TEST(CounterRng, PureFunctionOfInputs) {
  EXPECT_EQ(CounterRng::bits(1, 2, 3), CounterRng::bits(1, 2, 3));
  EXPECT_NE(CounterRng::bits(1, 2, 3), CounterRng::bits(1, 2, 4));
  EXPECT_NE(CounterRng::bits(1, 2, 3), CounterRng::bits(2, 2, 3));
  double mean = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = CounterRng::uniform(9, 0, i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = CounterRng::normal(9, 1, i);
    mean += z;
    sq += z * z;
  }
  EXPECT_NEAR(mean / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.04);
}

TEST(SignFieldTest, SampledSignsAreBalancedAndReproducible) {
  const FrequencyLattice lat(2, 10);
  const SignField a = sample_field(lat, 7), b = sample_field(lat, 7), c = sample_field(lat, 8);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == c);
  int sum = 0;
  for (LatticeIndex i = 0; i < lat.size(); ++i) {
    ASSERT_TRUE(a(i) == 1 || a(i) == -1);
    sum += a(i);
  }
  EXPECT_LT(std::abs(sum), 4 * std::sqrt(double(lat.size())));
}

TEST(SignFieldTest, FromBits) {
  const FrequencyLattice lat(1, 1);
  const SignField f = SignField::from_bits(lat, 0b101);
  EXPECT_EQ(f(0), -1);
  EXPECT_EQ(f(1), 1);
  EXPECT_EQ(f(2), -1);
  EXPECT_EQ(SignField::all_plus(lat), SignField::from_bits(lat, 0));
}

TEST(SignFieldTest, RandomizedFunctionPreservesNorm) {
  const FrequencyLattice lat(1, 3);
  const auto f = test::random_vector(static_cast<std::size_t>(lat.size()), 2);
  const auto g = randomize_function(f, sample_field(lat, 1));
  double a = 0, b = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    a += std::norm(f[i]);
    b += std::norm(g[i]);
    EXPECT_EQ(std::abs(g[i]), std::abs(f[i]));
  }
  EXPECT_DOUBLE_EQ(a, b);
}

TEST(OmegaMean, ExactEnumerationOfProduct) {
  const FrequencyLattice lat(1, 1);
  // E[h(0) h(1)] = 0, E[h(0)^2] = 1, E[(1 + h(2))/2] = 1/2
  const auto r = omega_mean(lat, {2}, {OmegaMethod::exact}, [](const FieldAssignment& f) {
    const auto& h = f.at(2);
    return std::vector<double>{h.h(0) * h.h(1), h.h(0) * h.h(0), 0.5 * (1 + h.h(2))};
  });
  EXPECT_EQ(r.count, 8u);
  EXPECT_DOUBLE_EQ(r.mean[0], 0.0);
  EXPECT_DOUBLE_EQ(r.mean[1], 1.0);
  EXPECT_DOUBLE_EQ(r.mean[2], 0.5);
  EXPECT_EQ(assignment_count(lat, 2), std::optional<std::uint64_t>(64));
}

TEST(OmegaMean, MonteCarloWithinErrorBars) {
  const FrequencyLattice lat(1, 2);
  const auto stat = [](const FieldAssignment& f) {
    const auto& h = f.at(1);
    return std::vector<double>{0.5 * (1 + h.h(0) * h.h(3))};
  };
  const auto r = omega_mean(lat, {1}, {OmegaMethod::mc, 4000, 3}, stat);
  EXPECT_EQ(r.count, 4000u);
  EXPECT_LT(std::abs(r.mean[0] - 0.5), 4 * r.stderr_mean[0]);
  const auto again = omega_mean(lat, {1}, {OmegaMethod::mc, 4000, 3}, stat);
  EXPECT_EQ(again.mean, r.mean);
}

TEST(CollisionNorm, ExactNormAgreesWithRatios) {
  const auto lat = build_lattice(1, 1);
  const auto norm = exact_collision_norm(lat, 2, 1, 2, 1.0, true);
  EXPECT_GT(norm.value, 0.0);
  const auto level = level_collision_norm(lat, 1.0, true);
  EXPECT_NEAR(level.value, norm.value, 1e-12 * norm.value);
  const auto est = estimate_c0(lat, 1, 1, 1.0, 10, 4, {OmegaMethod::exact});
  for (double r : est.ratios) EXPECT_LE(r, norm.value * (1 + 1e-12));
}

TEST(CollisionNorm, FullOrderEqualsReducedKernel) {
  const auto lat = build_lattice(1, 1);
  const auto reduced = level_collision_norm(lat, 1.0, false);
  const auto full = exact_collision_norm(lat, 3, 2, 3, 1.0, false);
  EXPECT_NEAR(full.value, reduced.value, 1e-10 * reduced.value);
}

TEST(RandomDensity, SparseHasRequestedSupport) {
  const auto lat = build_lattice(1, 2);
  const DensityMatrix g = random_density(lat, 2, 4, 30);
  EXPECT_EQ(g.count_nonzero(), 30u);
  EXPECT_TRUE(random_density(lat, 2, 4, 30).equals(g));
}

}  // namespace
}  // namespace gph
