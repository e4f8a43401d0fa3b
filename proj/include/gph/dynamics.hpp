#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "gph/sign_field.hpp"
#include "gph/tensor.hpp"

namespace gph {

class DynamicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficient-wise multiplication by exp(-i t (|xi|^2 - |xi'|^2)).
DensityMatrix free_evolve(const DensityMatrix& gamma, double t);

/// Coefficient-wise multiplication by the signed energy |xi|^2 - |xi'|^2.
DensityMatrix dispersion_apply(const DensityMatrix& gamma);

enum class CollisionSign { plus, minus };

/**
 * B^{+/-}_{l,n} acting on an order-m tensor, returning order m-1.
 *
 * Slot n is contracted on both sides and removed; later slots shift down.
 * Positions are 1-based. With a field, each summand picks up the four
 * signs h(out) h(combined) h(xi_n) h(xi'_n) taken on the side the operator
 * acts on.
 */
DensityMatrix collision(const DensityMatrix& gamma, int l, int n, CollisionSign sign,
                        const SignField* field = nullptr);

/// sum_{j<=k} (B^+_{j,k+1} - B^-_{j,k+1}) on an order-(k+1) tensor.
DensityMatrix full_collision(const DensityMatrix& gamma, const SignField* field = nullptr);

/// Which sign field each collision level sees.
class HierarchyMode {
 public:
  enum class Kind { deterministic, dependent, independent };

  static HierarchyMode deterministic() { return HierarchyMode(Kind::deterministic); }
  static HierarchyMode dependent(SignField field);
  /// fields[m] is used by the collision acting on the order-m level.
  static HierarchyMode independent(std::map<int, SignField> fields);

  Kind kind() const { return kind_; }
  /// Field for the collision applied to level `order`; nullptr in deterministic mode.
  const SignField* field_for(int order) const;
  const std::map<int, SignField>& fields() const { return fields_; }

 private:
  explicit HierarchyMode(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::map<int, SignField> fields_;  // key 0 holds the dependent field
};

std::string_view mode_name(HierarchyMode::Kind kind);

/// Right-hand side of d/dt Gamma for the hierarchy truncated at N.
HierarchyState hierarchy_rhs(const HierarchyState& state, int N, const HierarchyMode& mode);

enum class Picture { plain, interaction, automatic };

struct EvolveOptions {
  double dt = 1e-3;
  Picture picture = Picture::automatic;
};

/// Picture actually used for a given horizon and lattice.
Picture resolve_picture(Picture requested, double horizon, const FrequencyLattice& lattice);

/// RK4 trajectory of the truncated hierarchy sampled at the grid times.
std::vector<HierarchyState> evolve_truncated(const HierarchyState& initial, int N, const TimeGrid& grid,
                                             const HierarchyMode& mode, const EvolveOptions& options = {});

struct ContinuityDefect {
  double lhs = 0.0;
  double rhs = 0.0;
  double r = 0.0;
};

double continuity_exponent(double beta, double beta0);

/// ||U(t+delta) sigma - U(t) sigma||_{H^beta} against 2^{1-r} delta^r ||sigma||_{H^beta0}.
ContinuityDefect continuity_defect(const DensityMatrix& sigma, double t, double delta, double beta, double beta0);

struct ContinuityScan {
  std::uint64_t slots = 0;
  std::uint64_t violations = 0;
  /// Largest |e^{-i delta E} - 1| / (2^{1-r} delta^r W^r) seen.
  double worst_ratio = 0.0;
};

/**
 * Checks |e^{-i delta E} - 1| <= 2^{1-r} delta^r W^r on every coefficient slot
 * of an order-k tensor, with W = prod <xi_j>^2 prod <xi'_j>^2.
 *
 * Both sides depend on a slot only through the shells |xi_j|^2, so slots are
 * visited shell tuple by shell tuple and weighted by their multiplicity.
 */
ContinuityScan scan_continuity(const FrequencyLattice& lattice, int order, double beta, double beta0, double delta);

/// Same check, one slot at a time. Only practical on small key spaces.
ContinuityScan scan_continuity_bruteforce(const FrequencyLattice& lattice, int order, double beta, double beta0,
                                          double delta);

}  // namespace gph
