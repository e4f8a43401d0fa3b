#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gph/duhamel.hpp"
#include "gph/dynamics.hpp"
#include "gph/random.hpp"
#include "test_support.hpp"

namespace gph {
namespace {

TEST(FreeEvolve, PhasePerSlot) {
  const auto lat = build_lattice(2, 1);
  const DensityMatrix g = random_density(lat, 1, 2);
  const double t = 0.37;
  const DensityMatrix out = free_evolve(g, t);
  std::vector<LatticeIndex> d(2);
  for (TensorKey k = 0; k < g.key_space(); ++k) {
    decode_key(k, lat->size(), 2, d);
    const double e = lat->energy(d[0]) - lat->energy(d[1]);
    EXPECT_NEAR(std::abs(out.at(k) - std::polar(1.0, -t * e) * g.at(k)), 0.0, 1e-14);
  }
  EXPECT_TRUE(max_abs_diff(free_evolve(free_evolve(g, t), -t), g) < 1e-14);
  EXPECT_NEAR(h_alpha_norm(out, 1.0), h_alpha_norm(g, 1.0), 1e-13);
}

TEST(Dispersion, MatchesEnergy) {
  const auto lat = build_lattice(1, 2);
  const DensityMatrix g = random_density(lat, 1, 3);
  const DensityMatrix out = dispersion_apply(g);
  std::vector<LatticeIndex> d(2);
  for (TensorKey k = 0; k < g.key_space(); ++k) {
    decode_key(k, lat->size(), 2, d);
    EXPECT_NEAR(std::abs(out.at(k) - double(lat->energy(d[0]) - lat->energy(d[1])) * g.at(k)), 0.0, 1e-13);
  }
}

struct CollisionCase {
  int d, M, order, l, n;
};

void PrintTo(const CollisionCase& c, std::ostream* os) {
  *os << "d" << c.d << "_M" << c.M << "_order" << c.order << "_l" << c.l << "_n" << c.n;
}

class CollisionOracle : public ::testing::TestWithParam<CollisionCase> {};

TEST_P(CollisionOracle, MatchesScatter) {
  const auto c = GetParam();
  const auto lat = build_lattice(c.d, c.M);
  const DensityMatrix g = random_density(lat, c.order, 17, 60);
  const SignField f = sample_field(*lat, 5);
  for (bool plus : {true, false}) {
    const auto sign = plus ? CollisionSign::plus : CollisionSign::minus;
    for (const SignField* field : {static_cast<const SignField*>(nullptr), &f}) {
      const DensityMatrix got = collision(g, c.l, c.n, sign, field);
      const DensityMatrix want = test::collision_oracle(g, c.l, c.n, plus, field);
      EXPECT_LT(max_abs_diff(got, want), 1e-13) << "plus=" << plus << " field=" << (field != nullptr);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Cases, CollisionOracle,
                         ::testing::Values(CollisionCase{1, 1, 2, 1, 2}, CollisionCase{1, 2, 2, 1, 2},
                                           CollisionCase{1, 1, 3, 2, 3}, CollisionCase{1, 1, 3, 1, 2},
                                           CollisionCase{1, 1, 3, 1, 3}, CollisionCase{2, 1, 2, 1, 2},
                                           CollisionCase{1, 1, 4, 2, 3}),
                         [](const auto& info) {
                           std::ostringstream os;
                           PrintTo(info.param, &os);
                           return os.str();
                         });

TEST(Collision, FullCollisionIsSumOfParts) {
  const auto lat = build_lattice(1, 1);
  const DensityMatrix g = random_density(lat, 3, 4);
  const SignField f = sample_field(*lat, 8);
  DensityMatrix want = DensityMatrix::zeros(lat, 2);
  for (int j = 1; j <= 2; ++j) {
    want += collision(g, j, 3, CollisionSign::plus, &f);
    want -= collision(g, j, 3, CollisionSign::minus, &f);
  }
  EXPECT_LT(max_abs_diff(full_collision(g, &f), want), 1e-14);
}

TEST(Collision, PositionsValidated) {
  const auto lat = build_lattice(1, 1);
  const DensityMatrix g = random_density(lat, 3, 1);
  EXPECT_ANY_THROW(collision(g, 3, 1, CollisionSign::plus));
  EXPECT_ANY_THROW(collision(g, 1, 4, CollisionSign::plus));
}

TEST(Collision, AllPlusFieldIsDeterministicBitwise) {
  const auto lat = build_lattice(1, 2);
  const DensityMatrix g = random_density(lat, 2, 6);
  const SignField plus = SignField::all_plus(*lat);
  EXPECT_TRUE(full_collision(g, &plus).equals(full_collision(g)));
  EXPECT_EQ(max_abs_diff(full_collision(g, &plus), full_collision(g)), 0.0);
}

TEST(Collision, Linearity) {
  const auto lat = build_lattice(1, 1);
  const DensityMatrix a = random_density(lat, 3, 1), b = random_density(lat, 3, 2);
  const SignField f = sample_field(*lat, 3);
  const cplx x{0.4, -1.1}, y{2.0, 0.5};
  const DensityMatrix lhs = full_collision(x * a + y * b, &f);
  const DensityMatrix rhs = x * full_collision(a, &f) + y * full_collision(b, &f);
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-14);
}

TEST(Collision, SparseInputMatchesDense) {
  const auto lat = build_lattice(1, 1);
  const DensityMatrix g = random_density(lat, 3, 9, 40);
  const SignField f = sample_field(*lat, 1);
  EXPECT_LT(max_abs_diff(full_collision(g.to_sparse(), &f), full_collision(g.to_dense(), &f)), 1e-15);
}

TEST(Hierarchy, SingleLevelIsFreeEvolution) {
  const auto lat = build_lattice(1, 1);
  HierarchyState s(lat, 2);
  s.set_level(1, random_density(lat, 1, 2));
  const auto grid = TimeGrid::uniform(0.5, 3);
  const auto traj = evolve_truncated(s, 2, grid, HierarchyMode::deterministic(), {1e-2, Picture::interaction});
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    EXPECT_LT(max_abs_diff(traj[i].level_or_zero(1), free_evolve(*s.level(1), grid.points[i])), 1e-12);
  }
}

TEST(Hierarchy, RhsShape) {
  const auto lat = build_lattice(1, 1);
  const HierarchyState s = random_hierarchy(lat, {1, 1, 1}, 1.0, 3, [](int) { return std::size_t{0}; });
  const SignField f = sample_field(*lat, 2);
  const auto rhs = hierarchy_rhs(s, 3, HierarchyMode::dependent(f));
  for (int k = 1; k <= 3; ++k) {
    DensityMatrix want = cplx(0, -1) * dispersion_apply(*s.level(k));
    // The top level of the truncation evolves freely.
    if (k < 3) want -= cplx(0, 1) * full_collision(*s.level(k + 1), &f);
    EXPECT_LT(max_abs_diff(rhs.level_or_zero(k), want), 1e-13);
  }
}

TEST(Continuity, ShellScanMatchesBruteForce) {
  for (int d = 1; d <= 2; ++d) {
    const FrequencyLattice lat(d, d == 1 ? 2 : 1);
    for (int k = 1; k <= 2; ++k) {
      for (double delta : {0.3, 1e-2}) {
        const auto a = scan_continuity(lat, k, 1.0, 2.5, delta);
        const auto b = scan_continuity_bruteforce(lat, k, 1.0, 2.5, delta);
        EXPECT_EQ(a.slots, b.slots);
        EXPECT_EQ(a.violations, b.violations);
        EXPECT_NEAR(a.worst_ratio, b.worst_ratio, 1e-14);
        EXPECT_EQ(a.violations, 0u);
      }
    }
  }
}

TEST(Continuity, DefectRespectsBound) {
  const auto lat = build_lattice(1, 2);
  const DensityMatrix g = random_density(lat, 1, 4);
  EXPECT_DOUBLE_EQ(continuity_exponent(1.0, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(continuity_exponent(1.0, 2.0), 0.5);
  for (double delta : {1e-1, 1e-3}) {
    const auto def = continuity_defect(g, 0.4, delta, 1.0, 2.0);
    EXPECT_LE(def.lhs, def.rhs);
    EXPECT_DOUBLE_EQ(def.r, 0.5);
  }
}

TEST(Duhamel, SmallCaseMatchesOde) {
  const auto lat = build_lattice(1, 1);
  const HierarchyState s = random_hierarchy(lat, {1, 1, 1}, 1.0, 7, [](int) { return std::size_t{0}; });
  const SignField f = sample_field(*lat, 4);
  const auto mode = HierarchyMode::dependent(f);
  const auto grid = TimeGrid::uniform(0.1, 2);
  const auto traj = evolve_truncated(s, 3, grid, mode, {1e-4, Picture::automatic});
  const QuadratureSpec quad{14, 4};
  for (int k = 1; k <= 3; ++k) {
    const auto duh = truncated_solution(s, 3, k, 0.1, mode, quad);
    const double ref = h_alpha_norm(traj.back().level_or_zero(k), 1.0);
    EXPECT_LT(h_alpha_norm(duh - traj.back().level_or_zero(k), 1.0), 1e-8 * ref) << "k=" << k;
  }
}

TEST(Duhamel, ZeroTermIsFreeEvolution) {
  const auto lat = build_lattice(1, 1);
  const HierarchyState s = random_hierarchy(lat, {1, 1}, 1.0, 2, [](int) { return std::size_t{0}; });
  const auto d0 = duhamel_term(s, 1, 0, 0.6, HierarchyMode::deterministic(), {8, 3});
  EXPECT_LT(max_abs_diff(d0, free_evolve(*s.level(1), 0.6)), 1e-15);
}

TEST(Duhamel, SingleLevelResidualVanishes) {
  const auto lat = build_lattice(1, 1);
  HierarchyState s(lat, 2);
  s.set_level(1, random_density(lat, 1, 3));
  EXPECT_LT(integral_residual(s, 2, 1, 0.5, HierarchyMode::deterministic(), {12, 3}, 1.0), 1e-12);
}

TEST(Simplex, VolumeIdentity) {
  for (int j = 1; j <= 4; ++j) {
    for (double t : {0.25, 1.0, 2.0}) {
      const auto r = simplex_check(j, t, {10, 4});
      EXPECT_NEAR(r.numeric, r.exact, 1e-12 * r.exact);
      EXPECT_NEAR(r.exact, std::pow(t, j) / std::tgamma(j + 1.0), 1e-15);
    }
  }
}

TEST(Simplex, GaussRuleIsNormalized) {
  for (int q : {1, 4, 12, 16}) {
    const auto& g = gauss_legendre(q);
    double w = 0.0, x3 = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      w += g.weights[i];
      x3 += g.weights[i] * std::pow(g.nodes[i], 3);
    }
    EXPECT_NEAR(w, 1.0, 1e-14);
    if (q >= 2) EXPECT_NEAR(x3, 0.25, 1e-14);
  }
}

}  // namespace
}  // namespace gph
