#pragma once

#include <optional>
#include <vector>

#include "gph/dynamics.hpp"
#include "gph/random.hpp"
#include "gph/tensor.hpp"

namespace gph {

struct QuadratureSpec {
  /// Gauss-Legendre points per nesting level.
  int order = 12;
  int j_max = 4;
  void validate() const;
};

/// Gauss-Legendre rule mapped to [0, 1]; weights sum to 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int q);

/// Builds the mode of the given kind from an assignment (dependent mode reads level 0).
HierarchyMode mode_from_fields(HierarchyMode::Kind kind, const FieldAssignment& fields);

/// Levels that need sign fields for collisions landing on levels k..k+j-1.
std::vector<int> field_levels(HierarchyMode::Kind kind, int k, int j);

/// Duh_j^{(k)}(t) = (-i)^j int_{simplex} U(t-t_1) B U(t_1-t_2) ... B U(t_j) gamma_0^{(k+j)}.
DensityMatrix duhamel_term(const HierarchyState& initial, int k, int j, double t, const HierarchyMode& mode,
                           const QuadratureSpec& quad);

/// sum_{j=0}^{N-k} Duh_j^{(k)}(t), evaluated as one nested integral.
DensityMatrix truncated_solution(const HierarchyState& initial, int N, int k, double t, const HierarchyMode& mode,
                                 const QuadratureSpec& quad);

/// Levels 1..N of the truncated solution at time t.
HierarchyState truncated_state(const HierarchyState& initial, int N, double t, const HierarchyMode& mode,
                               const QuadratureSpec& quad);

/**
 * H^alpha norm of Gamma^(k)(t) - U(t) gamma_0^(k) + i int_0^t U(t-s) B Gamma^(k+1)(s) ds.
 *
 * The outer integral uses a two-panel composite rule, so it is not the rule
 * that built Gamma and the residual measures real quadrature error.
 */
double integral_residual(const HierarchyState& initial, int N, int k, double t, const HierarchyMode& mode,
                         const QuadratureSpec& quad, double alpha);

struct SimplexCheck {
  double numeric = 0.0;
  double exact = 0.0;
};

/// Nested quadrature of 1 over 0 <= t_j <= ... <= t_1 <= t against t^j / j!.
SimplexCheck simplex_check(int j, double t, const QuadratureSpec& quad);

struct DecayProfile {
  std::vector<double> norms;
  /// a_j = norms[j] * j! / (t^j prod_{i<j} (k+i))
  std::vector<double> normalized;
  /// Delta-method standard errors when norms come from Monte Carlo.
  std::vector<double> stderrs;
};

double decay_normalizer(int k, int j, double t);

/// ||Duh_j||_{H^alpha} for j = 0..j_max with the mode's fixed fields.
DecayProfile decay_profile(const HierarchyState& initial, int k, double t, const HierarchyMode& mode, int j_max,
                           const QuadratureSpec& quad, double alpha);

/// ||Duh_j||_{L^2(Omega) H^alpha} for j = 0..j_max, averaging over fields of the given kind.
DecayProfile decay_profile_omega(const HierarchyState& initial, int k, double t, HierarchyMode::Kind kind,
                                 int j_max, const QuadratureSpec& quad, double alpha, const OmegaSpec& spec);

/// Chain bound (t^j/j!) prod_{i<j} (k+i) C_{k+i+1} ||gamma_0^{(k+j)}||_{H^alpha}.
double decay_chain_bound(const HierarchyState& initial, int k, int j, double t, const std::vector<double>& level_norms,
                         double alpha);

struct CauchyProfile {
  std::vector<int> levels;     // N values
  std::vector<double> values;  // D(N)
  std::vector<double> ratios;  // D(N+1) / D(N)
};

/// (Gamma_{N+1} - Gamma_N)^(m)(t) = Duh_{N+1-m}^{(m)}(t) for m <= N+1.
DensityMatrix truncation_increment(const HierarchyState& initial, int N, int m, double t, const HierarchyMode& mode,
                                   const QuadratureSpec& quad);

/**
 * D(N) = max_t sum_{k=1..N} xi^k || B^{(k+1)} (Gamma_{N+1} - Gamma_N)^{(k+1)}(t) ||_{L^2(Omega) H^alpha}
 * over the grid, for every N in `levels`.
 */
CauchyProfile cauchy_profile(const HierarchyState& initial, const std::vector<int>& levels, const TimeGrid& grid,
                             HierarchyMode::Kind kind, const QuadratureSpec& quad, double alpha, double xi,
                             const OmegaSpec& spec);

}  // namespace gph
