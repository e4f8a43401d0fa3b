#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gph/kernels.hpp"
#include "gph/dynamics.hpp"
#include "gph/random.hpp"
#include "test_support.hpp"

namespace gph {
namespace {

using kernels::KernelTable;

std::vector<double> weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 + CounterRng::uniform(3, 5, i);
  return w;
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (!kernels::avx2_supported()) GTEST_SKIP() << "no AVX2 on this CPU";
  }
  const KernelTable& s = kernels::scalar_table();
  const KernelTable& v = kernels::avx2_table();
};

TEST_P(KernelEquivalence, Caxpy) {
  const std::size_t n = GetParam();
  const auto x = test::random_vector(n, 1);
  auto y1 = test::random_vector(n, 2);
  auto y2 = y1;
  const cplx a{0.3, -1.7};
  s.caxpy(y1.data(), a, x.data(), n);
  v.caxpy(y2.data(), a, x.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(y1[i] - y2[i]), 0.0, 1e-14 * (1 + std::abs(y1[i])));
}

TEST_P(KernelEquivalence, ScaleReal) {
  const std::size_t n = GetParam();
  auto x1 = test::random_vector(n, 4);
  auto x2 = x1;
  const auto w = weights(n);
  s.scale_real(x1.data(), w.data(), n);
  v.scale_real(x2.data(), w.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(x1[i], x2[i]);
}

TEST_P(KernelEquivalence, Norms) {
  const std::size_t n = GetParam();
  const auto x = test::random_vector(n, 6);
  const auto w = weights(n);
  const double a = s.weighted_sqnorm(x.data(), w.data(), n);
  const double b = v.weighted_sqnorm(x.data(), w.data(), n);
  EXPECT_NEAR(a, b, 1e-13 * (1 + a));
  const double c = s.sqnorm(x.data(), n);
  const double d = v.sqnorm(x.data(), n);
  EXPECT_NEAR(c, d, 1e-13 * (1 + c));
}

TEST_P(KernelEquivalence, PhaseApply) {
  const std::size_t n = GetParam();
  const auto in = test::random_vector(n, 7);
  std::vector<std::int32_t> energy(n);
  for (std::size_t i = 0; i < n; ++i) energy[i] = static_cast<std::int32_t>(i % 9) - 4;
  std::vector<cplx> phases(9);
  for (int e = 0; e < 9; ++e) phases[static_cast<std::size_t>(e)] = std::polar(1.0, 0.37 * (e - 4));
  std::vector<cplx> o1(n), o2(n);
  s.phase_apply(o1.data(), in.data(), energy.data(), phases.data(), 4, n);
  v.phase_apply(o2.data(), in.data(), energy.data(), phases.data(), 4, n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(o1[i] - o2[i]), 0.0, 1e-15 * (1 + std::abs(o1[i])));
}

INSTANTIATE_TEST_SUITE_P(Lengths, KernelEquivalence, ::testing::Values(0, 1, 2, 3, 5, 8, 17, 64, 1023));

TEST(KernelDispatch, ForcedBackendsAgreeOnOperators) {
  if (!kernels::avx2_supported()) GTEST_SKIP() << "no AVX2 on this CPU";
  const auto lat = build_lattice(1, 2);
  const DensityMatrix g = random_density(lat, 2, 9);
  const auto before = kernels::active_backend();
  kernels::set_backend(kernels::Backend::scalar);
  const DensityMatrix a = free_evolve(g, 0.7);
  const double na = h_alpha_norm(g, 1.0);
  kernels::set_backend(kernels::Backend::avx2);
  const DensityMatrix b = free_evolve(g, 0.7);
  const double nb = h_alpha_norm(g, 1.0);
  kernels::set_backend(before);
  EXPECT_LT(max_abs_diff(a, b), 1e-14);
  EXPECT_NEAR(na, nb, 1e-13 * na);
}

TEST(KernelDispatch, BackendNames) {
  EXPECT_EQ(kernels::backend_name(kernels::Backend::scalar), "scalar");
  EXPECT_EQ(kernels::backend_name(kernels::Backend::avx2), "avx2");
}

}  // namespace
}  // namespace gph
