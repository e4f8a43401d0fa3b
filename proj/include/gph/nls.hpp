#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "gph/lattice.hpp"
#include "gph/tensor.hpp"

namespace gph {

struct NlsState {
  LatticePtr lattice;
  std::vector<cplx> coefficients;
  double time = 0.0;
};

struct NlsOptions {
  /// +1 is the defocusing equation; -1 would be focusing.
  double coupling = 1.0;
  bool interaction_picture = true;
};

/// N(xi) = sum_{a-b+c=xi, all in the box} phi(a) conj(phi(b)) phi(c).
std::vector<cplx> nls_nonlinearity(const FrequencyLattice& lattice, std::span<const cplx> phi);

/// d phi/dt = -i (|xi|^2 phi + coupling * N(phi)).
std::vector<cplx> nls_rhs(const FrequencyLattice& lattice, std::span<const cplx> phi, double coupling = 1.0);

double nls_mass(std::span<const cplx> phi);

struct NlsTrajectory {
  LatticePtr lattice;
  double dt = 0.0;
  double coupling = 1.0;
  std::vector<double> times;
  std::vector<std::vector<cplx>> states;

  std::size_t index_of(double t) const;
};

/// RK4 with every step recorded; throws DynamicsError on non-finite values.
NlsTrajectory nls_evolve(const NlsState& initial, double horizon, double dt, const NlsOptions& opts = {});

struct FactorizedResidual {
  std::vector<double> times;
  /// d/dt gamma assembled from the NLS right-hand side by the product rule.
  std::vector<double> algebraic;
  /// d/dt gamma from a five-point difference of the recorded trajectory.
  std::vector<double> integrator;
  double max_algebraic = 0.0;
  double max_integrator = 0.0;
};

/**
 * H^alpha norm of i d/dt gamma^(k) - (|xi|^2 - |xi'|^2) gamma^(k) - coupling * B gamma^(k+1)
 * for gamma^(m) = |phi><phi|^{(x) m}, at the trajectory samples nearest to each grid time.
 */
FactorizedResidual factorized_residual(const NlsTrajectory& trajectory, int k, const TimeGrid& grid, double alpha);

/// d/dt |phi><phi|^{(x) k} given phi and its time derivative.
DensityMatrix factorized_derivative(const LatticePtr& lattice, std::span<const cplx> phi, std::span<const cplx> dphi,
                                    int k);

struct OrderCheck {
  double dt = 0.0;
  double error_coarse = 0.0;  // at dt
  double error_fine = 0.0;    // at dt/2
  double ratio = 0.0;
};

/// Final-time errors against a dt/32 reference run.
OrderCheck rk4_order_check(const NlsState& initial, double horizon, double dt, const NlsOptions& opts = {});

/// Gaussian coefficients times <xi>^{-decay}, scaled to the given mass.
std::vector<cplx> random_phi(const FrequencyLattice& lattice, std::uint64_t seed, double mass = 1.0, double decay = 0.0);

nlohmann::json nls_to_json(const NlsState& state);
NlsState nls_from_json(const nlohmann::json& j);

}  // namespace gph
