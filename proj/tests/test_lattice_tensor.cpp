#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gph/io.hpp"
#include "gph/lattice.hpp"
#include "gph/random.hpp"
#include "gph/tensor.hpp"
#include "test_support.hpp"

namespace gph {
namespace {

TEST(Lattice, SizeAndCodec) {
  for (int d = 1; d <= 3; ++d) {
    for (int M = 1; M <= 3; ++M) {
      const FrequencyLattice lat(d, M);
      EXPECT_EQ(lat.size(), static_cast<LatticeIndex>(std::pow(2 * M + 1, d)));
      for (LatticeIndex i = 0; i < lat.size(); ++i) {
        const auto& z = lat.freq_of(i);
        EXPECT_EQ(lat.index_of(z), i);
        EXPECT_EQ(lat.energy(i), squared_modulus(z));
        EXPECT_DOUBLE_EQ(lat.bracket(i), std::sqrt(1.0 + squared_modulus(z)));
        for (int c = d; c < kMaxDim; ++c) EXPECT_EQ(z[static_cast<std::size_t>(c)], 0);
      }
      EXPECT_EQ(lat.max_energy(), d * M * M);
    }
  }
}

TEST(Lattice, LexicographicOrder) {
  const FrequencyLattice lat(2, 1);
  EXPECT_EQ(lat.freq_of(0), (Frequency{-1, -1, 0}));
  EXPECT_EQ(lat.freq_of(1), (Frequency{-1, 0, 0}));
  EXPECT_EQ(lat.freq_of(8), (Frequency{1, 1, 0}));
}

TEST(Lattice, Errors) {
  EXPECT_THROW(FrequencyLattice(0, 1), LatticeError);
  EXPECT_THROW(FrequencyLattice(4, 1), LatticeError);
  EXPECT_THROW(FrequencyLattice(1, 0), LatticeError);
  const FrequencyLattice lat(1, 2);
  EXPECT_THROW(lat.index_of({3, 0, 0}), LatticeError);
  EXPECT_FALSE(lat.contains({-3, 0, 0}));
  EXPECT_FALSE(lat.find({0, 1, 0}).has_value());
}

TEST(Lattice, CombineMatchesArithmetic) {
  for (int d = 1; d <= 2; ++d) {
    const FrequencyLattice lat(d, 2);
    for (LatticeIndex a = 0; a < lat.size(); ++a)
      for (LatticeIndex b = 0; b < lat.size(); ++b)
        for (LatticeIndex c = 0; c < lat.size(); ++c) {
          const Frequency z = test::add(test::add(lat.freq_of(a), lat.freq_of(b), -1), lat.freq_of(c));
          const auto expected = lat.find(z);
          const LatticeIndex got = lat.combine_index(a, b, c);
          if (expected) {
            EXPECT_EQ(got, *expected);
          } else {
            EXPECT_EQ(got, -1);
          }
          EXPECT_EQ(lat.combine(lat.freq_of(a), lat.freq_of(b), lat.freq_of(c)).has_value(), expected.has_value());
        }
  }
}

TEST(Lattice, EnergyTable) {
  const FrequencyLattice lat(1, 1);
  const auto& t = lat.energy_table(2);
  ASSERT_EQ(t.size(), 81u);
  std::vector<LatticeIndex> digits(4);
  for (TensorKey key = 0; key < 81; ++key) {
    decode_key(key, lat.size(), 4, digits);
    const int e = lat.energy(digits[0]) + lat.energy(digits[1]) - lat.energy(digits[2]) - lat.energy(digits[3]);
    EXPECT_EQ(t[key], e);
  }
}

TEST(TensorIndex, RoundTrip) {
  std::vector<LatticeIndex> d{4, 0, 2, 3}, back(4);
  const TensorKey k = encode_key(d, 5);
  EXPECT_EQ(k, 4u * 125 + 0 * 25 + 2 * 5 + 3);
  decode_key(k, 5, 4, back);
  EXPECT_EQ(back, d);
  EXPECT_THROW(dense_size(1 << 20, 4), std::overflow_error);
}

TEST(Tensor, DenseSparseAgree) {
  const auto lat = build_lattice(1, 1);
  const DensityMatrix dense = random_density(lat, 2, 3);
  ASSERT_TRUE(dense.is_dense());
  const DensityMatrix sparse = dense.to_sparse();
  EXPECT_FALSE(sparse.is_dense());
  EXPECT_TRUE(sparse.equals(dense));
  EXPECT_TRUE(sparse.to_dense().equals(dense));
  EXPECT_EQ(sparse.count_nonzero(), dense.count_nonzero());
  EXPECT_DOUBLE_EQ(h_alpha_norm(sparse, 1.0), h_alpha_norm(dense, 1.0));
}

TEST(Tensor, PreferredStorage) {
  const FrequencyLattice lat(1, 1);
  EXPECT_EQ(DensityMatrix::preferred_storage(lat, 3), Storage::dense);   // 3^6 = 729
  EXPECT_EQ(DensityMatrix::preferred_storage(lat, 4), Storage::sparse);  // 3^8 = 6561
}

TEST(Tensor, SparseEntries) {
  const auto lat = build_lattice(1, 1);
  EXPECT_THROW(DensityMatrix::from_entries(lat, 1, {{1, 1.0}, {1, 2.0}}), TensorError);
  const auto g = DensityMatrix::from_entries(lat, 1, {{5, {1.0, 2.0}}, {2, 0.0}, {0, 3.0}});
  EXPECT_EQ(g.stored_size(), 2u);
  EXPECT_EQ(g.at(5), cplx(1.0, 2.0));
  EXPECT_EQ(g.at(2), cplx(0.0));
}

TEST(Tensor, Arithmetic) {
  const auto lat = build_lattice(1, 1);
  const DensityMatrix a = random_density(lat, 2, 1);
  const DensityMatrix b = random_density(lat, 2, 2).to_sparse();
  const DensityMatrix c = cplx(2.0, 1.0) * a - b;
  for (TensorKey k = 0; k < a.key_space(); ++k) {
    EXPECT_NEAR(std::abs(c.at(k) - (cplx(2.0, 1.0) * a.at(k) - b.at(k))), 0.0, 1e-15);
  }
  DensityMatrix z = a;
  z -= a;
  EXPECT_TRUE(z.is_zero());
  EXPECT_THROW(a + random_density(lat, 1, 1), TensorError);
}

TEST(Tensor, SobolevNormSingleEntry) {
  const auto lat = build_lattice(1, 2);
  DensityMatrix g(lat, 1, Storage::sparse);
  std::vector<LatticeIndex> u{lat->index_of({2, 0, 0})}, p{lat->index_of({-1, 0, 0})};
  g.set(g.key_of(u, p), {3.0, 4.0});
  // 5 * <2>^alpha * <-1>^alpha
  EXPECT_NEAR(h_alpha_norm(g, 1.0), 5.0 * std::sqrt(5.0) * std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(h_alpha_norm(g, 0.0), 5.0, 1e-14);
}

TEST(Tensor, FactorizedNormIsProduct) {
  const auto lat = build_lattice(1, 2);
  const auto phi = test::random_vector(static_cast<std::size_t>(lat->size()), 8);
  for (double alpha : {0.0, 0.5, 1.0}) {
    double s = 0.0;
    for (LatticeIndex i = 0; i < lat->size(); ++i) {
      s += std::pow(lat->bracket(i), 2 * alpha) * std::norm(phi[static_cast<std::size_t>(i)]);
    }
    for (int k = 1; k <= 2; ++k) {
      const double n = h_alpha_norm(factorized(lat, phi, k), alpha);
      EXPECT_NEAR(n, std::pow(s, k), 1e-12 * std::pow(s, k));
    }
  }
}

TEST(Tensor, MemoryGuard) {
  const auto lat = build_lattice(3, 2);  // 125^8 slots
  EXPECT_THROW(DensityMatrix(lat, 4, Storage::dense), MemoryGuardError);
}

TEST(Hierarchy, NormsAndProjection) {
  const auto lat = build_lattice(1, 1);
  const HierarchyState s = random_hierarchy(lat, {1.0, 0.5, 0.25}, 1.0, 4, [](int) { return std::size_t{0}; });
  for (int k = 1; k <= 3; ++k) EXPECT_NEAR(h_alpha_norm(*s.level(k), 1.0), std::pow(0.5, k - 1), 1e-13);
  EXPECT_NEAR(hxi_norm(s, 1.0, 0.5), 0.5 + 0.25 * 0.5 + 0.125 * 0.25, 1e-13);
  const auto lo = project(s, 2, ProjectionSide::leq);
  const auto hi = project(s, 2, ProjectionSide::gt);
  EXPECT_NE(lo.level(2), nullptr);
  EXPECT_EQ(lo.level(3), nullptr);
  EXPECT_EQ(hi.level(1), nullptr);
  EXPECT_NE(hi.level(3), nullptr);
  HierarchyState sum = lo;
  sum.axpy(1.0, hi);
  EXPECT_TRUE(sum.equals(s));
}

TEST(Io, DensityRoundTrip) {
  const auto lat = build_lattice(2, 1);
  const DensityMatrix g = random_density(lat, 2, 12, 20);
  const DensityMatrix back = density_from_json(to_json(g), lat);
  EXPECT_TRUE(back.equals(g));
}

TEST(Io, HierarchyFileRoundTrip) {
  const auto lat = build_lattice(1, 1);
  const HierarchyState s = random_hierarchy(lat, {1.0, 0.7}, 1.0, 5, [](int) { return std::size_t{0}; });
  const auto path = std::filesystem::temp_directory_path() / "gph_io_roundtrip.json";
  save(s, path);
  const HierarchyState back = load_hierarchy(path, lat);
  std::filesystem::remove(path);
  EXPECT_TRUE(back.equals(s));
}

TEST(Io, Errors) {
  const auto lat = build_lattice(1, 1);
  const auto j = to_json(random_density(lat, 1, 1));
  EXPECT_THROW(density_from_json(j, build_lattice(1, 2)), FormatError);
  auto bad = j;
  bad["format"] = "dense";
  EXPECT_THROW(density_from_json(bad), FormatError);
  bad = j;
  bad["entries"][0]["xi"] = {{5}};
  EXPECT_THROW(density_from_json(bad), FormatError);
  bad = j;
  bad["entries"].push_back(bad["entries"][0]);
  EXPECT_THROW(density_from_json(bad), FormatError);
  EXPECT_THROW(load_hierarchy("/nonexistent/gph.json"), FormatError);
}

}  // namespace
}  // namespace gph
