#include <gtest/gtest.h>

#include "gph/checks.hpp"
#include "gph/experiment.hpp"
#include "gph/expansion.hpp"

namespace gph {
namespace {

TEST(Expansion, SingleCollision) {
  OperatorChainSpec spec;
  spec.k = 1;
  spec.steps = {{1, 2, CollisionSign::plus}};
  const auto exp = expand_chain(spec);
  ASSERT_EQ(exp.terms.size(), 1u);
  const auto& t = exp.terms.front();
  EXPECT_EQ(t.set_a, std::vector<int>{1});
  EXPECT_TRUE(t.set_b.empty());
  EXPECT_EQ(t.raw_h.size(), 1u);
  EXPECT_EQ(t.leaves, 4);
}

TEST(Expansion, Example1Structure) {
  const auto exp = expand_difference(example1_chain());
  const auto& t = exp.terms.front();
  EXPECT_EQ(t.set_a, std::vector<int>{1});
  EXPECT_EQ(t.set_b, std::vector<int>{2});
  ASSERT_TRUE(t.nu.has_value());
  ASSERT_TRUE(t.difference.has_value());
  EXPECT_EQ(format_form(*t.nu, 5), "eta2");
  EXPECT_EQ(t.raw_h.size(), 3u);
  const auto j = expansion_to_json(exp);
  ASSERT_EQ(j["terms"].size(), 1u);
  EXPECT_EQ(j["j"], 2);
  EXPECT_TRUE(j["terms"][0].contains("A"));
  EXPECT_TRUE(j["terms"][0].contains("F"));
}

TEST(Expansion, Example1AgainstComposition) {
  const auto rec = check_expansion_example1({});
  EXPECT_TRUE(rec.pass) << rec.summary;
}

TEST(Expansion, ShortChainBattery) {
  const auto rec = check_expansion_battery(3);
  EXPECT_TRUE(rec.pass) << rec.summary;
  EXPECT_GT(rec.measured["chains"].get<int>(), 100);
}

TEST(Expansion, DifferenceNeedsTwoSteps) {
  OperatorChainSpec spec;
  spec.k = 1;
  spec.steps = {{1, 2, CollisionSign::minus}};
  EXPECT_ANY_THROW(expand_difference(spec));
}

TEST(Expansion, InvalidChain) {
  OperatorChainSpec spec;
  spec.k = 1;
  spec.steps = {{3, 2, CollisionSign::plus}};
  EXPECT_ANY_THROW(spec.validate());
}

TEST(Expansion, ParseStep) {
  const auto s = parse_step("-4,5");
  EXPECT_EQ(s.l, 4);
  EXPECT_EQ(s.n, 5);
  EXPECT_EQ(s.sign, CollisionSign::minus);
  EXPECT_THROW(parse_step("1,2"), ConfigError);
  EXPECT_THROW(parse_step("+1;2"), ConfigError);
  EXPECT_THROW(parse_step("+1,2x"), ConfigError);
}

TEST(Nonresonant, SamplerPassesChecker) {
  const auto lat = build_lattice(1, 10);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = nonresonant_sample(lat, 3, seed, 0.5, 1.0);
    const auto r = nonresonant_check(s, 1.0);
    EXPECT_TRUE(r.pass) << r.witness;
    EXPECT_LE(r.c1, 0.5 + 1e-12);
  }
}

TEST(Nonresonant, ResonantWitness) {
  const auto lat = build_lattice(1, 10);
  HierarchyState s(lat, 2);
  DensityMatrix g(lat, 2, Storage::sparse);
  const auto idx = [&](int x) { return lat->index_of({x, 0, 0}); };
  std::vector<LatticeIndex> u{idx(3), idx(-2)}, p{idx(2), idx(1)};
  g.set(g.key_of(u, p), 1.0);
  s.set_level(2, g);
  const auto r = nonresonant_check(s, 1.0);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.witness_level, 2);
  EXPECT_EQ(r.witness, "(3, -2; 2, 1)");
}

TEST(Chain, SoundnessOfLongerChain) {
  OperatorChainSpec spec;
  spec.k = 1;
  spec.steps = {{1, 2, CollisionSign::minus}, {2, 3, CollisionSign::plus}, {1, 4, CollisionSign::minus}};
  const auto rec = check_chain_soundness(spec, 2);
  EXPECT_TRUE(rec.pass) << rec.summary;
}

}  // namespace
}  // namespace gph
