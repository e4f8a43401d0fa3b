#include <gtest/gtest.h>

#include <cmath>

#include "gph/dynamics.hpp"
#include "gph/nls.hpp"
#include "test_support.hpp"

namespace gph {
namespace {

TEST(Nls, NonlinearityMatchesConvolution) {
  const FrequencyLattice lat(1, 2);
  const auto phi = test::random_vector(static_cast<std::size_t>(lat.size()), 3);
  const auto n = nls_nonlinearity(lat, phi);
  for (LatticeIndex x = 0; x < lat.size(); ++x) {
    cplx want{};
    for (LatticeIndex a = 0; a < lat.size(); ++a)
      for (LatticeIndex b = 0; b < lat.size(); ++b)
        for (LatticeIndex c = 0; c < lat.size(); ++c) {
          const Frequency z = test::add(test::add(lat.freq_of(a), lat.freq_of(b), -1), lat.freq_of(c));
          if (z == lat.freq_of(x)) want += phi[a] * std::conj(phi[b]) * phi[c];
        }
    EXPECT_NEAR(std::abs(n[static_cast<std::size_t>(x)] - want), 0.0, 1e-12);
  }
}

TEST(Nls, SingleModeExactSolution) {
  const auto lat = build_lattice(1, 3);
  const LatticeIndex z = lat->index_of({2, 0, 0});
  std::vector<cplx> phi(static_cast<std::size_t>(lat->size()));
  phi[static_cast<std::size_t>(z)] = 1.0;
  const auto traj = nls_evolve({lat, phi, 0.0}, 1.0, 1e-3);
  const auto& last = traj.states.back();
  EXPECT_NEAR(traj.times.back(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(last[static_cast<std::size_t>(z)] - std::polar(1.0, -(4.0 + 1.0))), 0.0, 1e-8);
  for (LatticeIndex i = 0; i < lat->size(); ++i)
    if (i != z) EXPECT_EQ(last[static_cast<std::size_t>(i)], cplx{});
}

TEST(Nls, ZeroStaysZero) {
  const auto lat = build_lattice(2, 1);
  const std::vector<cplx> phi(static_cast<std::size_t>(lat->size()));
  const auto traj = nls_evolve({lat, phi, 0.0}, 0.5, 1e-2);
  for (const auto& s : traj.states)
    for (const auto& c : s) EXPECT_EQ(c, cplx{});
}

TEST(Nls, MassConserved) {
  const auto lat = build_lattice(1, 6);
  const auto phi = random_phi(*lat, 5, 1.0, 1.0);
  EXPECT_NEAR(nls_mass(phi), 1.0, 1e-14);
  const auto traj = nls_evolve({lat, phi, 0.0}, 1.0, 1e-3);
  for (const auto& s : traj.states) EXPECT_NEAR(nls_mass(s), 1.0, 1e-8);
}

TEST(Nls, RhsDefinition) {
  const FrequencyLattice lat(1, 2);
  const auto phi = test::random_vector(static_cast<std::size_t>(lat.size()), 1);
  const auto n = nls_nonlinearity(lat, phi);
  const auto r = nls_rhs(lat, phi, 0.5);
  for (LatticeIndex i = 0; i < lat.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    EXPECT_NEAR(std::abs(r[u] - cplx(0, -1) * (double(lat.energy(i)) * phi[u] + 0.5 * n[u])), 0.0, 1e-13);
  }
}

TEST(Nls, FactorizedDerivativeMatchesDifference) {
  const auto lat = build_lattice(1, 1);
  const auto phi = test::random_vector(static_cast<std::size_t>(lat->size()), 2);
  const auto dphi = test::random_vector(static_cast<std::size_t>(lat->size()), 3);
  const double h = 1e-5;
  std::vector<cplx> up(phi), dn(phi);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    up[i] += h * dphi[i];
    dn[i] -= h * dphi[i];
  }
  for (int k = 1; k <= 2; ++k) {
    DensityMatrix fd = factorized(lat, up, k) - factorized(lat, dn, k);
    fd *= 1.0 / (2 * h);
    const DensityMatrix d = factorized_derivative(lat, phi, dphi, k);
    EXPECT_LT(max_abs_diff(fd, d), 1e-8);
  }
}

TEST(Nls, FactorizedStatesSolveHierarchy) {
  const auto lat = build_lattice(1, 3);
  const auto phi = random_phi(*lat, 2, 1.0, 2.0);
  const auto traj = nls_evolve({lat, phi, 0.0}, 0.2, 1e-3);
  const auto res = factorized_residual(traj, 1, TimeGrid::uniform(0.2, 5), 1.0);
  EXPECT_LT(res.max_algebraic, 1e-12);
  EXPECT_LT(res.max_integrator, 1e-7);
}

TEST(Nls, FourthOrder) {
  const auto lat = build_lattice(1, 3);
  const auto phi = random_phi(*lat, 4, 1.0, 2.0);
  const auto oc = rk4_order_check({lat, phi, 0.0}, 0.5, 0.02);
  EXPECT_GT(oc.ratio, 12.0);
  EXPECT_LT(oc.ratio, 20.0);
}

TEST(Nls, JsonRoundTrip) {
  const auto lat = build_lattice(2, 1);
  const NlsState s{lat, random_phi(*lat, 1), 0.25};
  const NlsState back = nls_from_json(nls_to_json(s));
  EXPECT_EQ(back.coefficients, s.coefficients);
  EXPECT_EQ(back.time, s.time);
  EXPECT_EQ(*back.lattice, *lat);
}

}  // namespace
}  // namespace gph
