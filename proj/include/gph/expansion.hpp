#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gph/dynamics.hpp"
#include "gph/tensor.hpp"

namespace gph {

struct ChainStep {
  int l;
  int n;
  CollisionSign sign;
};

/**
 * [B_{l_1,n_1}] U(t - t_1) [B_{l_2,n_2}] U(t_1 - t_2) ... U(t_{j-1} - t_j) [B_{l_{j+1},n_{j+1}}]
 * acting on an order-(k+j+1) tensor. steps[0] is the outermost operator.
 */
struct OperatorChainSpec {
  int k = 1;
  std::vector<ChainStep> steps;  // j+1 collisions
  int j() const { return static_cast<int>(steps.size()) - 1; }
  int input_order() const { return k + static_cast<int>(steps.size()); }
  void validate() const;
};

/// t followed by t_1..t_j; propagator i runs for t_i - t_{i+1} (with t_0 = t).
struct ChainTimes {
  double t = 0.0;
  std::vector<double> t_inner;
  std::vector<double> propagator_times(int j) const;
};

/// A signed sum of formal symbols: coefficient per leaf symbol, leaves ordered eta_1..eta_m, eta'_1..eta'_m.
using LinearForm = std::vector<int>;

struct SignedSymbol {
  int symbol;  // leaf index
  int epsilon;
};

struct SignedForm {
  int sign;  // +1 for unprimed slots, -1 for primed ones
  LinearForm form;
};

struct ExpansionTerm {
  int k = 0;
  int leaves = 0;  // 2(k+j+1)
  /// Node 0..2k-1 are the output slots xi_1..xi_k, xi'_1..xi'_k; the rest are created by the steps.
  std::vector<LinearForm> node_forms;
  std::vector<std::string> node_names;
  /// Leaf symbol -> node id in the final tuple.
  std::vector<int> leaf_nodes;
  /// Output slots hit by some collision, split by side.
  std::vector<int> set_a;  // r in 1..k with xi_r in A
  std::vector<int> set_b;  // r in 1..k with xi'_r in B
  /// Leaves under each hit output slot with their epsilon signs (indexed by output node id).
  std::vector<std::vector<SignedSymbol>> groups;
  /// Output slots untouched by every collision (node ids) and the leaf each becomes.
  std::vector<int> untouched;
  /// Four node ids per step, in step order.
  std::vector<std::array<int, 4>> raw_h;
  /// Per-gap energies: nodes of the intermediate tuple with +1 (unprimed) or -1 (primed).
  std::vector<std::vector<std::pair<int, int>>> gap_nodes;
  /// F of the first-propagator difference form, when requested.
  std::optional<std::vector<SignedForm>> difference;
  /// nu / nu' (or mu / mu') and the three-way partition of the first hit slot.
  std::optional<LinearForm> nu;
  std::optional<LinearForm> nu_prime;
  std::vector<int> part1, part2, part3;
  bool first_plus = true;
};

struct SymbolicExpansion {
  OperatorChainSpec spec;
  std::vector<ExpansionTerm> terms;
};

SymbolicExpansion expand_chain(const OperatorChainSpec& spec);
/// Adds the (e^{-i delta F} - 1) record for the first propagator; needs j >= 1.
SymbolicExpansion expand_difference(const OperatorChainSpec& spec);

std::string leaf_name(int leaf, int order);
std::string format_form(const LinearForm& form, int order);
int evaluate_form(const LinearForm& form, std::span<const int> leaf_values);

/// Real value of F at integer leaf assignments (one coordinate per call).
double evaluate_difference_f(const ExpansionTerm& term, const FrequencyLattice& lattice,
                             std::span<const LatticeIndex> leaf_points);

/// Numeric value of the expansion; delta applies only when the term carries F.
DensityMatrix evaluate_expansion(const SymbolicExpansion& expansion, const DensityMatrix& sigma,
                                 const SignField& field, const ChainTimes& times, double delta = 0.0);

/// Direct operator composition, the oracle for evaluate_expansion.
DensityMatrix compose_chain(const OperatorChainSpec& spec, const DensityMatrix& sigma, const SignField& field,
                            const ChainTimes& times, double first_extra = 0.0);

/// max over in-box leaf assignments of (|F| / sum |eta|^2)^{1/(k+j+1)}, or 0 if all sums vanish.
double empirical_c3(const ExpansionTerm& term, const FrequencyLattice& lattice);

/// The Example 1 chain: k=2, steps [B^+_{1,2}], [B^-_{2,3}], [B^-_{4,5}].
OperatorChainSpec example1_chain();

nlohmann::json expansion_to_json(const SymbolicExpansion& expansion);

struct NonresonantResult {
  bool pass = true;
  double c1 = 0.0;
  int witness_level = 0;
  std::vector<Frequency> witness_unprimed;
  std::vector<Frequency> witness_primed;
  std::string witness;
};

/// Strictly decreasing |xi_1| > ... > |xi_m| > |xi'_1| > ... > |xi'_m| on every support point.
NonresonantResult nonresonant_check(const HierarchyState& state, double alpha);

/// Sparse random non-resonant state with level norms target_c1^m * U(0.5, 1).
HierarchyState nonresonant_sample(const LatticePtr& lattice, int m_max, std::uint64_t seed, double target_c1,
                                  double alpha, int entries_per_level = 3);

}  // namespace gph
