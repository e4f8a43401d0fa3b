#include "gph/duhamel.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gph {

void QuadratureSpec::validate() const {
  if (order < 2) throw std::invalid_argument("quadrature order must be >= 2");
  if (j_max < 0) throw std::invalid_argument("j_max must be >= 0");
}

namespace {

GaussRule build_gauss_legendre(int q) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(q));
  rule.weights.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      if (q == 1) p0 = 1.0;
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1]
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[q - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = rule.weights[q - 1 - i] = 0.5 * w;
  }
  return rule;
}

const cplx kMinusI(0.0, -1.0);

const DensityMatrix* initial_level(const HierarchyState& initial, int k) { return initial.level(k); }

bool has_data_at_or_above(const HierarchyState& initial, int k, int top) {
  for (int m = k; m <= std::min(top, initial.k_max()); ++m)
    if (initial.level(m)) return true;
  return false;
}

DensityMatrix evolved_initial(const HierarchyState& initial, int k, double t) {
  if (const auto* g = initial_level(initial, k)) return free_evolve(*g, t);
  return DensityMatrix::zeros(initial.lattice_ptr(), k);
}

/// -i sum_i w_i t U(t - s_i) B inner(s_i) over the rule on [0, t].
template <class Inner>
DensityMatrix duhamel_integral(const LatticePtr& lattice, int k, double t, const GaussRule& rule,
                               const HierarchyMode& mode, Inner&& inner) {
  DensityMatrix acc = DensityMatrix::zeros(lattice, k);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double s = t * rule.nodes[i];
    const DensityMatrix b = full_collision(inner(s), mode.field_for(k + 1));
    acc.axpy(rule.weights[i] * t, free_evolve(b, t - s));
  }
  acc *= kMinusI;
  return acc;
}

DensityMatrix duh(const HierarchyState& initial, int k, int j, double t, const HierarchyMode& mode,
                  const GaussRule& rule) {
  if (j == 0) return evolved_initial(initial, k, t);
  if (t == 0.0 || !initial.level(k + j)) return DensityMatrix::zeros(initial.lattice_ptr(), k);
  return duhamel_integral(initial.lattice_ptr(), k, t, rule, mode,
                          [&](double s) { return duh(initial, k + 1, j - 1, s, mode, rule); });
}

DensityMatrix solution(const HierarchyState& initial, int N, int k, double t, const HierarchyMode& mode,
                       const GaussRule& rule) {
  DensityMatrix out = evolved_initial(initial, k, t);
  if (k == N || t == 0.0 || !has_data_at_or_above(initial, k + 1, N)) return out;
  out += duhamel_integral(initial.lattice_ptr(), k, t, rule, mode,
                          [&](double s) { return solution(initial, N, k + 1, s, mode, rule); });
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

const GaussRule& gauss_legendre(int q) {
  if (q < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[q];
  if (!slot) slot = std::make_unique<GaussRule>(build_gauss_legendre(q));
  return *slot;
}

HierarchyMode mode_from_fields(HierarchyMode::Kind kind, const FieldAssignment& fields) {
  switch (kind) {
    case HierarchyMode::Kind::deterministic:
      return HierarchyMode::deterministic();
    case HierarchyMode::Kind::dependent:
      return HierarchyMode::dependent(fields.at(0));
    case HierarchyMode::Kind::independent:
      return HierarchyMode::independent(fields);
  }
  throw std::logic_error("unknown hierarchy mode");
}

std::vector<int> field_levels(HierarchyMode::Kind kind, int k, int j) {
  switch (kind) {
    case HierarchyMode::Kind::deterministic:
      return {};
    case HierarchyMode::Kind::dependent:
      return j > 0 ? std::vector<int>{0} : std::vector<int>{};
    case HierarchyMode::Kind::independent: {
      std::vector<int> out;
      for (int m = k + 1; m <= k + j; ++m) out.push_back(m);
      return out;
    }
  }
  return {};
}

DensityMatrix duhamel_term(const HierarchyState& initial, int k, int j, double t, const HierarchyMode& mode,
                           const QuadratureSpec& quad) {
  quad.validate();
  if (k < 1 || j < 0) throw std::invalid_argument("duhamel_term needs k >= 1 and j >= 0");
  if (k + j > initial.k_max()) {
    throw std::invalid_argument("duhamel_term needs k + j <= K_max (k=" + std::to_string(k) + ", j=" +
                                std::to_string(j) + ", K_max=" + std::to_string(initial.k_max()) + ")");
  }
  if (j > quad.j_max) throw std::invalid_argument("Duhamel depth exceeds j_max");
  return duh(initial, k, j, t, mode, gauss_legendre(quad.order));
}

DensityMatrix truncated_solution(const HierarchyState& initial, int N, int k, double t, const HierarchyMode& mode,
                                 const QuadratureSpec& quad) {
  quad.validate();
  if (k < 1 || k > N) throw std::invalid_argument("truncated_solution needs 1 <= k <= N");
  if (N > initial.k_max()) throw std::invalid_argument("truncation level N exceeds K_max");
  if (N - k > quad.j_max) throw std::invalid_argument("Duhamel depth N-k exceeds j_max");
  return solution(initial, N, k, t, mode, gauss_legendre(quad.order));
}

HierarchyState truncated_state(const HierarchyState& initial, int N, double t, const HierarchyMode& mode,
                               const QuadratureSpec& quad) {
  HierarchyState out(initial.lattice_ptr(), initial.k_max());
  for (int k = 1; k <= N; ++k) out.set_level(k, truncated_solution(initial, N, k, t, mode, quad));
  return out;
}

double integral_residual(const HierarchyState& initial, int N, int k, double t, const HierarchyMode& mode,
                         const QuadratureSpec& quad, double alpha) {
  if (k < 1 || k > N - 1) throw std::invalid_argument("integral_residual needs 1 <= k <= N-1");
  if (t == 0.0) return 0.0;
  DensityMatrix r = truncated_solution(initial, N, k, t, mode, quad);
  r -= evolved_initial(initial, k, t);
  const GaussRule& rule = gauss_legendre(quad.order);
  // two panels [0, t/2] and [t/2, t]
  for (int panel = 0; panel < 2; ++panel) {
    const double a = 0.5 * t * panel;
    const double h = 0.5 * t;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double s = a + h * rule.nodes[i];
      const DensityMatrix b =
          full_collision(truncated_solution(initial, N, k + 1, s, mode, quad), mode.field_for(k + 1));
      r.axpy(cplx(0.0, rule.weights[i] * h), free_evolve(b, t - s));
    }
  }
  return h_alpha_norm(r, alpha);
}

SimplexCheck simplex_check(int j, double t, const QuadratureSpec& quad) {
  quad.validate();
  if (j < 1) throw std::invalid_argument("simplex_check needs j >= 1");
  const GaussRule& rule = gauss_legendre(quad.order);
  auto nested = [&](auto&& self, int depth, double upper) -> double {
    if (depth == 0) return 1.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * upper * self(self, depth - 1, upper * rule.nodes[i]);
    return acc;
  };
  return {nested(nested, j, t), std::pow(t, j) / factorial(j)};
}

double decay_normalizer(int k, int j, double t) {
  double prod = 1.0;
  for (int i = 0; i < j; ++i) prod *= k + i;
  return factorial(j) / (std::pow(t, j) * prod);
}

DecayProfile decay_profile(const HierarchyState& initial, int k, double t, const HierarchyMode& mode, int j_max,
                           const QuadratureSpec& quad, double alpha) {
  DecayProfile out;
  for (int j = 0; j <= j_max; ++j) {
    const double n = h_alpha_norm(duhamel_term(initial, k, j, t, mode, quad), alpha);
    out.norms.push_back(n);
    out.normalized.push_back(j == 0 ? n : n * decay_normalizer(k, j, t));
    out.stderrs.push_back(0.0);
  }
  return out;
}

DecayProfile decay_profile_omega(const HierarchyState& initial, int k, double t, HierarchyMode::Kind kind,
                                 int j_max, const QuadratureSpec& quad, double alpha, const OmegaSpec& spec) {
  const auto levels = field_levels(kind, k, j_max);
  const OmegaMean m = omega_mean(initial.lattice(), levels, spec, [&](const FieldAssignment& fields) {
    const HierarchyMode mode = mode_from_fields(kind, fields);
    std::vector<double> sq;
    for (int j = 0; j <= j_max; ++j) sq.push_back(h_alpha_sqnorm(duhamel_term(initial, k, j, t, mode, quad), alpha));
    return sq;
  });
  DecayProfile out;
  OmegaSpec effective = spec;
  effective.method = m.method;
  for (int j = 0; j <= j_max; ++j) {
    const auto est = make_norm_estimate(m.mean[j], m.stderr_mean[j], effective, m.count);
    out.norms.push_back(est.value);
    out.normalized.push_back(j == 0 ? est.value : est.value * decay_normalizer(k, j, t));
    out.stderrs.push_back(est.stderr_value.value_or(0.0));
  }
  return out;
}

double decay_chain_bound(const HierarchyState& initial, int k, int j, double t, const std::vector<double>& level_norms,
                         double alpha) {
  const auto* top = initial.level(k + j);
  if (!top) return 0.0;
  double bound = std::pow(t, j) / factorial(j) * h_alpha_norm(*top, alpha);
  for (int i = 0; i < j; ++i) bound *= (k + i) * level_norms.at(static_cast<std::size_t>(i));
  return bound;
}

DensityMatrix truncation_increment(const HierarchyState& initial, int N, int m, double t, const HierarchyMode& mode,
                                   const QuadratureSpec& quad) {
  if (m < 1 || m > N + 1) throw std::invalid_argument("truncation_increment needs 1 <= m <= N+1");
  return duhamel_term(initial, m, N + 1 - m, t, mode, quad);
}

CauchyProfile cauchy_profile(const HierarchyState& initial, const std::vector<int>& levels, const TimeGrid& grid,
                             HierarchyMode::Kind kind, const QuadratureSpec& quad, double alpha, double xi,
                             const OmegaSpec& spec) {
  grid.validate();
  CauchyProfile out;
  for (int N : levels) {
    if (N + 1 > initial.k_max()) throw std::invalid_argument("Cauchy diagnostic at N needs K_max >= N+1");
    // The collision at level k+1 uses field k+1; the increment below it uses k+2..N+1.
    std::vector<int> needed;
    if (kind == HierarchyMode::Kind::dependent) needed = {0};
    if (kind == HierarchyMode::Kind::independent)
      for (int m = 2; m <= N + 1; ++m) needed.push_back(m);
    const std::size_t width = grid.points.size() * static_cast<std::size_t>(N);
    const OmegaMean m = omega_mean(initial.lattice(), needed, spec, [&](const FieldAssignment& fields) {
      const HierarchyMode mode = mode_from_fields(kind, fields);
      std::vector<double> sq(width, 0.0);
      for (std::size_t g = 0; g < grid.points.size(); ++g) {
        for (int k = 1; k <= N; ++k) {
          const DensityMatrix inc = truncation_increment(initial, N, k + 1, grid.points[g], mode, quad);
          sq[g * N + (k - 1)] = h_alpha_sqnorm(full_collision(inc, mode.field_for(k + 1)), alpha);
        }
      }
      return sq;
    });
    double d = 0.0;
    for (std::size_t g = 0; g < grid.points.size(); ++g) {
      double s = 0.0;
      for (int k = 1; k <= N; ++k) s += std::pow(xi, k) * std::sqrt(m.mean[g * N + (k - 1)]);
      d = std::max(d, s);
    }
    out.levels.push_back(N);
    out.values.push_back(d);
  }
  for (std::size_t i = 1; i < out.values.size(); ++i) out.ratios.push_back(out.values[i] / out.values[i - 1]);
  return out;
}

}  // namespace gph
