#include "gph/nls.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gph/dynamics.hpp"
#include "gph/parallel.hpp"
#include "gph/sign_field.hpp"

namespace gph {

std::vector<cplx> nls_nonlinearity(const FrequencyLattice& lattice, std::span<const cplx> phi) {
  const auto f = static_cast<std::size_t>(lattice.size());
  if (phi.size() != f) throw std::invalid_argument("coefficient vector length does not match the lattice");
  std::vector<cplx> conj_phi(f);
  for (std::size_t i = 0; i < f; ++i) conj_phi[i] = std::conj(phi[i]);
  std::vector<cplx> out(f);
  parallel_for(f, [&](std::size_t x) {
    cplx acc{};
    for (std::size_t a = 0; a < f; ++a) {
      if (phi[a] == cplx{}) continue;
      for (std::size_t b = 0; b < f; ++b) {
        // c = x - a + b
        const auto c = lattice.combine_index(static_cast<LatticeIndex>(x), static_cast<LatticeIndex>(a),
                                             static_cast<LatticeIndex>(b));
        if (c < 0) continue;
        acc += phi[a] * conj_phi[b] * phi[static_cast<std::size_t>(c)];
      }
    }
    out[x] = acc;
  });
  return out;
}

std::vector<cplx> nls_rhs(const FrequencyLattice& lattice, std::span<const cplx> phi, double coupling) {
  std::vector<cplx> out = nls_nonlinearity(lattice, phi);
  const cplx mi(0.0, -1.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = mi * (static_cast<double>(lattice.energy(static_cast<LatticeIndex>(i))) * phi[i] + coupling * out[i]);
  }
  return out;
}

double nls_mass(std::span<const cplx> phi) {
  double m = 0.0;
  for (const auto& v : phi) m += std::norm(v);
  return m;
}

std::size_t NlsTrajectory::index_of(double t) const {
  if (times.empty()) throw std::invalid_argument("empty trajectory");
  const double pos = (t - times.front()) / dt;
  const double r = std::round(pos);
  if (r < 0 || r >= static_cast<double>(times.size()) || std::abs(pos - r) > 1e-6) {
    throw std::invalid_argument("time " + std::to_string(t) + " is not a recorded sample");
  }
  return static_cast<std::size_t>(r);
}

namespace {

std::vector<double> energies(const FrequencyLattice& lattice) {
  std::vector<double> e(static_cast<std::size_t>(lattice.size()));
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = static_cast<double>(lattice.energy(static_cast<LatticeIndex>(i)));
  return e;
}

/// phi -> exp(-i s E) phi
void rotate(std::vector<cplx>& v, const std::vector<double>& e, double s) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(1.0, -s * e[i]);
}

void axpy(std::vector<cplx>& y, cplx a, const std::vector<cplx>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

std::vector<cplx> rk4_step(const FrequencyLattice& lattice, const std::vector<double>& e, const std::vector<cplx>& phi,
                           double h, const NlsOptions& opts) {
  if (!opts.interaction_picture) {
    auto f = [&](const std::vector<cplx>& p) { return nls_rhs(lattice, p, opts.coupling); };
    const auto k1 = f(phi);
    auto y = phi;
    axpy(y, h / 2, k1);
    const auto k2 = f(y);
    y = phi;
    axpy(y, h / 2, k2);
    const auto k3 = f(y);
    y = phi;
    axpy(y, h, k3);
    const auto k4 = f(y);
    y = phi;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return y;
  }
  // psi(s) = exp(i s E) phi(t0 + s), psi' = -i c exp(i s E) N(exp(-i s E) psi)
  auto g = [&](double s, const std::vector<cplx>& psi) {
    std::vector<cplx> p = psi;
    rotate(p, e, s);
    auto n = nls_nonlinearity(lattice, p);
    rotate(n, e, -s);
    for (auto& v : n) v *= cplx(0.0, -opts.coupling);
    return n;
  };
  const auto k1 = g(0.0, phi);
  auto y = phi;
  axpy(y, h / 2, k1);
  const auto k2 = g(h / 2, y);
  y = phi;
  axpy(y, h / 2, k2);
  const auto k3 = g(h / 2, y);
  y = phi;
  axpy(y, h, k3);
  const auto k4 = g(h, y);
  y = phi;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  rotate(y, e, h);
  return y;
}

}  // namespace

NlsTrajectory nls_evolve(const NlsState& initial, double horizon, double dt, const NlsOptions& opts) {
  if (!initial.lattice) throw std::invalid_argument("NLS state has no lattice");
  const auto& lat = *initial.lattice;
  if (initial.coefficients.size() != static_cast<std::size_t>(lat.size())) {
    throw std::invalid_argument("NLS coefficient vector has length " + std::to_string(initial.coefficients.size()) +
                                ", lattice has " + std::to_string(lat.size()) + " points");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  const double h = steps ? horizon / static_cast<double>(steps) : dt;
  const auto e = energies(lat);

  NlsTrajectory out;
  out.lattice = initial.lattice;
  out.dt = h;
  out.coupling = opts.coupling;
  out.times.push_back(initial.time);
  out.states.push_back(initial.coefficients);
  for (std::size_t s = 0; s < steps; ++s) {
    auto next = rk4_step(lat, e, out.states.back(), h, opts);
    for (const auto& v : next) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw DynamicsError("NLS state became non-finite at t=" +
                            std::to_string(initial.time + static_cast<double>(s + 1) * h));
      }
    }
    out.states.push_back(std::move(next));
    out.times.push_back(initial.time + static_cast<double>(s + 1) * h);
  }
  return out;
}

DensityMatrix factorized_derivative(const LatticePtr& lattice, std::span<const cplx> phi, std::span<const cplx> dphi,
                                    int k) {
  const auto f = static_cast<std::size_t>(lattice->size());
  std::vector<cplx> cphi(f), cdphi(f);
  for (std::size_t i = 0; i < f; ++i) {
    cphi[i] = std::conj(phi[i]);
    cdphi[i] = std::conj(dphi[i]);
  }
  const int slots = 2 * k;
  DensityMatrix out(lattice, k, Storage::dense);
  auto data = out.dense_data();
  std::vector<cplx> term(data.size());
  for (int r = 0; r < slots; ++r) {
    term[0] = 1.0;
    std::size_t len = 1;
    for (int s = 0; s < slots; ++s) {
      const std::span<const cplx> factor = s < k ? (s == r ? dphi : phi) : std::span<const cplx>(s == r ? cdphi : cphi);
      for (std::size_t p = len; p-- > 0;) {
        const cplx base = term[p];
        for (std::size_t i = 0; i < f; ++i) term[p * f + i] = base * factor[i];
      }
      len *= f;
    }
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += term[i];
  }
  return out.to_storage(DensityMatrix::preferred_storage(*lattice, k));
}

namespace {

/// Fornberg weights for the first derivative at 0 from the given offsets.
std::vector<double> derivative_weights(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
  double c1 = 1.0, c4 = x[0];
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t m = mn; m >= 1; --m) c[i][m] = c1 * (m * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t m = mn; m >= 1; --m) c[j][m] = (c4 * c[j][m] - m * c[j][m - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

constexpr int kStencil = 9;

}  // namespace

FactorizedResidual factorized_residual(const NlsTrajectory& trajectory, int k, const TimeGrid& grid, double alpha) {
  if (k < 1) throw std::invalid_argument("order k must be >= 1");
  grid.validate();
  const auto& lattice = trajectory.lattice;
  const auto& lat = *lattice;
  if (dense_size(lat.size(), k + 1) > storage_policy().memory_guard) {
    throw MemoryGuardError("factorized order " + std::to_string(k + 1) + " exceeds the memory guard");
  }
  const auto n = trajectory.states.size();
  if (n < static_cast<std::size_t>(kStencil)) throw std::invalid_argument("trajectory too short for the difference stencil");
  const auto e = energies(lat);
  const double c = trajectory.coupling;
  const cplx i1(0.0, 1.0);

  FactorizedResidual out;
  for (double t : grid.points) {
    const std::size_t idx = trajectory.index_of(trajectory.times.front() + t);
    const double tt = trajectory.times[idx];
    const auto& phi = trajectory.states[idx];

    const DensityMatrix gamma = factorized(lattice, phi, k);
    DensityMatrix collision_term = full_collision(factorized(lattice, phi, k + 1));
    collision_term *= c;
    const DensityMatrix disp = dispersion_apply(gamma);

    const auto dphi = nls_rhs(lat, phi, c);
    DensityMatrix r = factorized_derivative(lattice, phi, dphi, k);
    r *= i1;
    r -= disp;
    r -= collision_term;
    const double alg = h_alpha_norm(r, alpha);

    // psi(s) = exp(i s E) phi(s) varies slowly; differentiate it and rotate back.
    std::size_t lo = idx >= kStencil / 2 ? idx - kStencil / 2 : 0;
    if (lo + kStencil > n) lo = n - kStencil;
    std::vector<double> offsets(kStencil);
    for (int s = 0; s < kStencil; ++s) offsets[s] = trajectory.times[lo + s] - tt;
    const auto w = derivative_weights(offsets);
    std::vector<cplx> dpsi(phi.size());
    for (int s = 0; s < kStencil; ++s) {
      const auto& p = trajectory.states[lo + s];
      for (std::size_t i = 0; i < p.size(); ++i) dpsi[i] += w[s] * std::polar(1.0, offsets[s] * e[i]) * p[i];
    }
    // phi' = exp(-i t E)(psi' - i E psi) with psi = phi at the base time
    std::vector<cplx> dphi_fd(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) dphi_fd[i] = dpsi[i] - i1 * e[i] * phi[i];
    DensityMatrix rf = factorized_derivative(lattice, phi, dphi_fd, k);
    rf *= i1;
    rf -= disp;
    rf -= collision_term;
    const double integ = h_alpha_norm(rf, alpha);

    out.times.push_back(tt);
    out.algebraic.push_back(alg);
    out.integrator.push_back(integ);
    out.max_algebraic = std::max(out.max_algebraic, alg);
    out.max_integrator = std::max(out.max_integrator, integ);
  }
  return out;
}

OrderCheck rk4_order_check(const NlsState& initial, double horizon, double dt, const NlsOptions& opts) {
  const auto coarse = nls_evolve(initial, horizon, dt, opts);
  const auto fine = nls_evolve(initial, horizon, dt / 2, opts);
  const auto ref = nls_evolve(initial, horizon, dt / 32, opts);
  auto err = [&](const NlsTrajectory& tr) {
    double m = 0.0;
    for (std::size_t i = 0; i < tr.states.back().size(); ++i) m += std::norm(tr.states.back()[i] - ref.states.back()[i]);
    return std::sqrt(m);
  };
  OrderCheck out;
  out.dt = dt;
  out.error_coarse = err(coarse);
  out.error_fine = err(fine);
  out.ratio = out.error_fine > 0.0 ? out.error_coarse / out.error_fine : 0.0;
  return out;
}

std::vector<cplx> random_phi(const FrequencyLattice& lattice, std::uint64_t seed, double mass, double decay) {
  std::vector<cplx> phi(static_cast<std::size_t>(lattice.size()));
  for (std::size_t i = 0; i < phi.size(); ++i) {
    phi[i] = cplx(CounterRng::normal(seed, streams::nls, 2 * i), CounterRng::normal(seed, streams::nls, 2 * i + 1)) *
             std::pow(lattice.bracket(static_cast<LatticeIndex>(i)), -decay);
  }
  const double scale = std::sqrt(mass / nls_mass(phi));
  for (auto& v : phi) v *= scale;
  return phi;
}

}  // namespace gph
