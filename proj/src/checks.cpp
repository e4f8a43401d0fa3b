#include "gph/checks.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <cmath>
#include <limits>
#include <sstream>

#include "gph/expansion.hpp"
#include "gph/nls.hpp"
#include "gph/random.hpp"

namespace gph {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string sci(double v) {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific << v;
  return out.str();
}

double max_abs(const DensityMatrix& a) {
  double m = 0.0;
  a.for_each_nonzero([&](TensorKey, cplx v) { m = std::max(m, std::abs(v)); });
  return m;
}

double relative(const DensityMatrix& value, const DensityMatrix& reference) {
  const double scale = max_abs(reference);
  const double diff = max_abs_diff(value, reference);
  return scale > 0.0 ? diff / scale : diff;
}

double mode_code(HierarchyMode::Kind kind) { return static_cast<double>(static_cast<int>(kind)); }

std::string mode_list(const std::vector<HierarchyMode::Kind>& modes) {
  std::string out;
  for (auto m : modes) out += (out.empty() ? "" : ",") + std::string(mode_name(m));
  return out;
}

}  // namespace

HierarchyState make_initial(const LatticePtr& lattice, int k_max, double ratio, double alpha, std::uint64_t seed,
                            int sparse_nnz) {
  std::vector<double> norms;
  for (int k = 1; k <= k_max; ++k) norms.push_back(std::pow(ratio, k));
  return random_hierarchy(lattice, norms, alpha, seed, [&](int k) -> std::size_t {
    return DensityMatrix::preferred_storage(*lattice, k) == Storage::dense ? 0 : static_cast<std::size_t>(sparse_nnz);
  });
}

HierarchyMode make_mode(HierarchyMode::Kind kind, const FrequencyLattice& lattice, int k_max, std::uint64_t seed) {
  switch (kind) {
    case HierarchyMode::Kind::deterministic:
      return HierarchyMode::deterministic();
    case HierarchyMode::Kind::dependent:
      return HierarchyMode::dependent(sample_field(lattice, seed, 0));
    case HierarchyMode::Kind::independent: {
      std::map<int, SignField> fields;
      for (int m = 2; m <= std::max(k_max, 2); ++m) fields.emplace(m, sample_field(lattice, seed, static_cast<std::uint64_t>(m)));
      return HierarchyMode::independent(std::move(fields));
    }
  }
  throw std::logic_error("unknown mode");
}

// 1 ---------------------------------------------------------------------------

CheckRecord check_duhamel_oracle(const OracleParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  const HierarchyState initial =
      p.initial ? *p.initial : make_initial(lattice, p.N, p.level_ratio, p.alpha, p.seed, p.sparse_nnz);
  const TimeGrid grid = TimeGrid::uniform(p.T, p.grid_points);
  const QuadratureSpec quad{p.q, std::max(p.N - 1, 1)};
  EvolveOptions opts;
  opts.dt = p.dt;

  CheckRecord rec;
  rec.name = "duhamel_ode_equivalence";
  Table table{"oracle", {"mode", "t", "k", "relative_h_alpha_discrepancy"}, {}};
  double worst = 0.0;
  json per_mode = json::object();
  for (auto kind : p.modes) {
    const HierarchyMode mode = make_mode(kind, *lattice, p.N, p.seed);
    const auto ode = evolve_truncated(initial, p.N, grid, mode, opts);
    double mode_worst = 0.0;
    for (std::size_t g = 0; g < grid.points.size(); ++g) {
      const double t = grid.points[g];
      for (int k = 1; k <= p.N; ++k) {
        const DensityMatrix duh = truncated_solution(initial, p.N, k, t, mode, quad);
        const DensityMatrix ref = ode[g].level_or_zero(k);
        const double denom = h_alpha_norm(ref, p.alpha);
        const double diff = h_alpha_norm(duh - ref, p.alpha);
        const double rel = denom > 0.0 ? diff / denom : diff;
        mode_worst = std::max(mode_worst, rel);
        table.rows.push_back({mode_code(kind), t, static_cast<double>(k), rel});
      }
    }
    per_mode[std::string(mode_name(kind))] = mode_worst;
    worst = std::max(worst, mode_worst);
  }
  const Picture picture = resolve_picture(Picture::automatic, p.T, *lattice);
  rec.measured = {{"max_relative", worst},
                  {"per_mode", per_mode},
                  {"picture", picture == Picture::interaction ? "interaction" : "plain"},
                  {"q", p.q},
                  {"dt", p.dt}};
  rec.thresholds.push_back({"max_relative", "<=", p.tolerance, "[DERIVED]"});
  rec.pass = worst <= p.tolerance;
  rec.summary = "max relative H^alpha discrepancy " + sci(worst) + " over modes " + mode_list(p.modes);
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

// 2 ---------------------------------------------------------------------------

CheckRecord check_integral_residual(const OracleParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  const HierarchyState initial =
      p.initial ? *p.initial : make_initial(lattice, p.N, p.level_ratio, p.alpha, p.seed, p.sparse_nnz);
  const TimeGrid grid = TimeGrid::uniform(p.T, p.grid_points);
  const QuadratureSpec quad{p.q, std::max(p.N - 1, 1)};

  CheckRecord rec;
  rec.name = "integral_equation_residual";
  Table table{"residual", {"mode", "t", "k", "residual_h_alpha"}, {}};
  double worst = 0.0;
  for (auto kind : p.modes) {
    const HierarchyMode mode = make_mode(kind, *lattice, p.N, p.seed);
    for (double t : grid.points) {
      for (int k = 1; k <= p.N - 1; ++k) {
        const double r = integral_residual(initial, p.N, k, t, mode, quad, p.alpha);
        worst = std::max(worst, r);
        table.rows.push_back({mode_code(kind), t, static_cast<double>(k), r});
      }
    }
  }
  rec.measured = {{"max_residual", worst}, {"levels", p.N - 1}, {"grid_points", p.grid_points}};
  rec.thresholds.push_back({"max_residual", "<=", p.residual_tolerance, "[DERIVED]"});
  rec.pass = worst <= p.residual_tolerance;
  rec.summary = "max residual " + sci(worst) + " for k <= " + std::to_string(p.N - 1);
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

// 3 ---------------------------------------------------------------------------

CheckRecord check_randomized_estimate(const RandomizedParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  const int order = p.k + 1;
  const OperatorNorm norm = exact_collision_norm(lattice, order, 1, order, p.alpha, true);
  const std::vector<int> levels{order};

  CheckRecord rec;
  rec.name = "randomized_estimate";
  Table table{"randomized", {"trial", "exact_mean_square", "mc_mean_square", "mc_stderr", "z", "ratio"}, {}};
  double worst_z = 0.0, worst_ratio = 0.0;
  int z_fail = 0, ratio_fail = 0;
  for (int trial = 0; trial < p.trials; ++trial) {
    const std::uint64_t s = CounterRng::mix(p.seed * 1000003ULL + static_cast<std::uint64_t>(trial));
    const DensityMatrix gamma = random_density(lattice, order, s, 0);
    auto statistic = [&](const FieldAssignment& f) {
      DensityMatrix out = collision(gamma, 1, order, CollisionSign::plus, &f.at(order));
      out -= collision(gamma, 1, order, CollisionSign::minus, &f.at(order));
      return std::vector<double>{h_alpha_sqnorm(out, p.alpha)};
    };
    const OmegaMean exact = omega_mean(*lattice, levels, OmegaSpec{OmegaMethod::exact}, statistic);
    const OmegaMean mc = omega_mean(*lattice, levels, OmegaSpec{OmegaMethod::mc, p.mc_samples, s ^ 0x5eedULL}, statistic);
    const double z = mc.stderr_mean[0] > 0.0 ? std::abs(mc.mean[0] - exact.mean[0]) / mc.stderr_mean[0]
                                             : (mc.mean[0] == exact.mean[0] ? 0.0 : std::numeric_limits<double>::infinity());
    const double ratio = std::sqrt(exact.mean[0]) / h_alpha_norm(gamma, p.alpha);
    worst_z = std::max(worst_z, z);
    worst_ratio = std::max(worst_ratio, ratio);
    if (!(z <= p.sigmas)) ++z_fail;
    if (!(ratio <= norm.value)) ++ratio_fail;
    table.rows.push_back({static_cast<double>(trial), exact.mean[0], mc.mean[0], mc.stderr_mean[0], z, ratio});
  }
  const auto fields = assignment_count(*lattice, 1).value_or(0);
  rec.measured = {{"exact_operator_norm", norm.value},
                  {"matrix_rows", norm.rows},
                  {"matrix_cols", norm.cols},
                  {"fields_enumerated", fields},
                  {"worst_z", worst_z},
                  {"worst_ratio", worst_ratio},
                  {"z_failures", z_fail},
                  {"ratio_failures", ratio_fail}};
  rec.thresholds.push_back({"worst_z", "<=", p.sigmas, "[DERIVED]"});
  rec.thresholds.push_back({"worst_ratio", "<=", norm.value, "[DERIVED]"});
  rec.pass = z_fail == 0 && ratio_fail == 0;
  rec.summary = "exact norm " + sci(norm.value) + " (" + std::to_string(norm.rows) + "x" + std::to_string(norm.cols) +
                "), worst ratio " + sci(worst_ratio) + ", worst |z| " + sci(worst_z) + " over " +
                std::to_string(p.trials) + " trials";
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

// 4 ---------------------------------------------------------------------------

CheckRecord check_factorial_decay(const DecayParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  const bool randomized = p.kind != HierarchyMode::Kind::deterministic;
  const double level_norm = level_collision_norm(lattice, p.alpha, randomized).value;
  const std::vector<double> level_norms(static_cast<std::size_t>(std::max(p.j_max, 1)), level_norm);
  const QuadratureSpec quad{p.q, std::max(p.j_max, 1)};

  CheckRecord rec;
  rec.name = "factorial_duhamel_decay";
  Table table{"decay", {"k", "seed", "t", "j", "norm", "normalized", "bound", "norm_over_bound"}, {}};
  int violations = 0;
  double worst = 0.0, c1 = 0.0, c2 = 0.0;
  for (int k : p.ks) {
    for (int s = 0; s < p.seeds; ++s) {
      const std::uint64_t seed = p.seed + static_cast<std::uint64_t>(s);
      const HierarchyState initial =
          p.initial ? *p.initial : make_initial(lattice, k + p.j_max, p.level_ratio, p.alpha, seed, p.sparse_nnz);
      for (int m = 1; m <= initial.k_max(); ++m) {
        const double n = h_alpha_norm(initial.level_or_zero(m), p.alpha);
        if (n > 0.0) c2 = std::max(c2, std::pow(n, 1.0 / m));
      }
      for (double t : p.times) {
        const DecayProfile prof = decay_profile_omega(initial, k, t, p.kind, p.j_max, quad, p.alpha, p.omega);
        for (int j = 0; j <= p.j_max; ++j) {
          const double bound = decay_chain_bound(initial, k, j, t, level_norms, p.alpha);
          const double n = prof.norms[static_cast<std::size_t>(j)];
          const double ratio = bound > 0.0 ? n / bound : (n > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
          if (n > bound + p.slack) ++violations;
          if (j > 0) {
            worst = std::max(worst, ratio);
            const double top = h_alpha_norm(initial.level_or_zero(k + j), p.alpha);
            if (top > 0.0) c1 = std::max(c1, std::pow(prof.normalized[static_cast<std::size_t>(j)] / top, 1.0 / j));
          }
          table.rows.push_back({static_cast<double>(k), static_cast<double>(seed), t, static_cast<double>(j), n,
                                prof.normalized[static_cast<std::size_t>(j)], bound, ratio});
        }
        if (p.initial) break;
      }
      if (p.initial) break;
    }
  }
  rec.measured = {{"level_operator_norm", level_norm},
                  {"violations", violations},
                  {"worst_ratio_j_ge_1", worst},
                  {"c1_fit", c1},
                  {"c2_fit", c2},
                  {"q", p.q},
                  {"mode", std::string(mode_name(p.kind))}};
  rec.thresholds.push_back({"violations", "==", 0, "[DERIVED]"});
  rec.thresholds.push_back({"quadrature_slack", "<=", p.slack, "[DERIVED]"});
  rec.pass = violations == 0;
  rec.summary = std::to_string(violations) + " violations; worst norm/bound for j>=1 is " + sci(worst) +
                " with level norm " + sci(level_norm);
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

// 5 ---------------------------------------------------------------------------

CheckRecord check_cauchy(const CauchyParams& p) {
  Stopwatch clock;
  if (p.levels.size() < 2) throw std::invalid_argument("the Cauchy check needs at least two N values");
  const auto lattice = build_lattice(p.d, p.M);
  const int top = *std::max_element(p.levels.begin(), p.levels.end());
  const HierarchyState initial =
      p.initial ? *p.initial : make_initial(lattice, top + 1, p.level_ratio, p.alpha, p.seed, p.sparse_nnz);
  const QuadratureSpec quad{p.q, std::max(top - 1, 1)};
  const CauchyProfile prof =
      cauchy_profile(initial, p.levels, TimeGrid::uniform(p.T, p.grid_points), p.kind, quad, p.alpha, p.xi, p.omega);

  CheckRecord rec;
  rec.name = "truncation_cauchy";
  Table table{"cauchy", {"N", "D", "ratio_to_previous"}, {}};
  for (std::size_t i = 0; i < prof.values.size(); ++i) {
    table.rows.push_back({static_cast<double>(prof.levels[i]), prof.values[i],
                          i == 0 ? std::numeric_limits<double>::quiet_NaN() : prof.ratios[i - 1]});
  }
  const double first = prof.ratios.front();
  bool pass = first < 1.0;
  for (std::size_t i = 1; i < prof.ratios.size(); ++i) pass = pass && prof.ratios[i] <= first;
  for (std::size_t i = 1; i < prof.values.size(); ++i) pass = pass && prof.values[i] < prof.values[i - 1];
  rec.measured = {{"D", prof.values}, {"ratios", prof.ratios}, {"levels", prof.levels},
                  {"mode", std::string(mode_name(p.kind))},
                  {"omega", p.omega.method == OmegaMethod::exact ? "exact" : "mc"}};
  rec.thresholds.push_back({"ratio_first", "<", 1.0, "[TRIVIAL]"});
  rec.thresholds.push_back({"ratio_later", "<=", first, "[DERIVED]"});
  rec.pass = pass;
  std::ostringstream s;
  s << "D(N) =";
  for (double v : prof.values) s << ' ' << sci(v);
  s << ", ratios";
  for (double r : prof.ratios) s << ' ' << sci(r);
  rec.summary = s.str();
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

// 6 ---------------------------------------------------------------------------

CheckRecord check_continuity_lemma(const ContinuityParams& p) {
  Stopwatch clock;
  CheckRecord rec;
  rec.name = "continuity_lemma";
  Table table{"continuity", {"d", "M", "k", "beta", "beta0", "delta", "slots", "violations", "worst_ratio"}, {}};
  std::uint64_t slots = 0, violations = 0;
  double worst = 0.0;
  for (int d : p.dims) {
    for (int m = 1; m <= p.M_max; ++m) {
      const auto lattice = build_lattice(d, m);
      for (int k = 1; k <= p.k_max; ++k) {
        for (double beta : p.betas) {
          for (double off : p.beta0_offsets) {
            for (double delta : p.deltas) {
              const ContinuityScan scan = scan_continuity(*lattice, k, beta, beta + off, delta);
              slots += scan.slots;
              violations += scan.violations;
              worst = std::max(worst, scan.worst_ratio);
              table.rows.push_back({static_cast<double>(d), static_cast<double>(m), static_cast<double>(k), beta,
                                    beta + off, delta, static_cast<double>(scan.slots),
                                    static_cast<double>(scan.violations), scan.worst_ratio});
            }
          }
        }
      }
    }
  }
  rec.measured = {{"slots", slots}, {"violations", violations}, {"worst_ratio", worst}};
  rec.thresholds.push_back({"constant", "==", "2^(1-r), r = min(1, (beta0-beta)/2)", "[PAPER]"});
  rec.thresholds.push_back({"violations", "==", 0, "[PAPER]"});
  rec.pass = violations == 0;
  rec.summary = std::to_string(violations) + " violations over " + std::to_string(slots) + " slots; worst ratio " +
                sci(worst);
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

// 7 ---------------------------------------------------------------------------

CheckRecord check_modulus_scaling(const ModulusParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  const double r = continuity_exponent(p.alpha, p.alpha0);
  const HierarchyState initial =
      p.initial ? *p.initial : make_initial(lattice, p.N, 1.0, p.alpha0, p.seed, p.sparse_nnz);
  const QuadratureSpec quad{p.q, std::max(p.N - 1, 1)};
  std::vector<double> starts;
  for (int g = 0; g < p.grid_points; ++g) starts.push_back(p.T * g / (p.grid_points - 1));

  std::vector<int> levels;
  if (p.kind == HierarchyMode::Kind::dependent) levels = {0};
  if (p.kind == HierarchyMode::Kind::independent)
    for (int m = 2; m <= p.N; ++m) levels.push_back(m);
  const std::size_t nd = p.deltas.size(), nl = static_cast<std::size_t>(p.N);
  const OmegaMean mean = omega_mean(*lattice, levels, p.omega, [&](const FieldAssignment& fields) {
    const HierarchyMode mode = mode_from_fields(p.kind, fields);
    std::vector<double> sq(starts.size() * nd * nl, 0.0);
    for (std::size_t g = 0; g < starts.size(); ++g) {
      const HierarchyState base = truncated_state(initial, p.N, starts[g], mode, quad);
      for (std::size_t di = 0; di < nd; ++di) {
        const HierarchyState moved = truncated_state(initial, p.N, starts[g] + p.deltas[di], mode, quad);
        for (int k = 1; k <= p.N; ++k) {
          sq[(g * nd + di) * nl + static_cast<std::size_t>(k - 1)] =
              h_alpha_sqnorm(moved.level_or_zero(k) - base.level_or_zero(k), p.alpha);
        }
      }
    }
    return sq;
  });

  CheckRecord rec;
  rec.name = "solution_modulus_scaling";
  Table table{"modulus", {"delta", "sup_ratio"}, {}};
  std::vector<double> ratios;
  for (std::size_t di = 0; di < nd; ++di) {
    double sup = 0.0;
    for (std::size_t g = 0; g < starts.size(); ++g) {
      double norm = 0.0;
      for (int k = 1; k <= p.N; ++k) {
        norm += std::pow(p.xi, k) * std::sqrt(mean.mean[(g * nd + di) * nl + static_cast<std::size_t>(k - 1)]);
      }
      sup = std::max(sup, norm / std::pow(p.deltas[di], r));
    }
    ratios.push_back(sup);
    table.rows.push_back({p.deltas[di], sup});
  }
  const double bound = ratios.front();
  bool pass = std::isfinite(bound);
  for (std::size_t i = 1; i < ratios.size(); ++i) pass = pass && ratios[i] <= bound;
  rec.measured = {{"r", r}, {"deltas", p.deltas}, {"sup_ratios", ratios}, {"mode", std::string(mode_name(p.kind))}};
  rec.thresholds.push_back({"sup_ratio", "<=", bound, "[DERIVED]"});
  rec.pass = pass;
  std::ostringstream s;
  s << "r=" << r << ", sup ratios";
  for (double v : ratios) s << ' ' << sci(v);
  rec.summary = s.str();
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

// 8 ---------------------------------------------------------------------------

namespace {

struct SoundnessStats {
  double worst = 0.0;
  std::size_t evaluations = 0;
};

void compare_chain(const OperatorChainSpec& spec, const DensityMatrix& sigma, const ChainTimes& times,
                   const std::vector<double>& deltas, SoundnessStats& stats) {
  const auto& lat = sigma.lattice();
  const auto fields = assignment_count(lat, 1).value();
  const SymbolicExpansion plain = expand_chain(spec);
  std::optional<SymbolicExpansion> diff;
  if (spec.j() >= 1) diff = expand_difference(spec);
  for (std::uint64_t b = 0; b < fields; ++b) {
    const SignField field = SignField::from_bits(lat, b);
    for (double delta : deltas) {
      ChainTimes shifted = times;
      shifted.t += delta;
      stats.worst = std::max(stats.worst, relative(evaluate_expansion(plain, sigma, field, shifted),
                                                   compose_chain(spec, sigma, field, shifted)));
      ++stats.evaluations;
      if (diff) {
        const DensityMatrix oracle =
            compose_chain(spec, sigma, field, times, delta) - compose_chain(spec, sigma, field, times, 0.0);
        stats.worst = std::max(stats.worst, relative(evaluate_expansion(*diff, sigma, field, times, delta), oracle));
        ++stats.evaluations;
      }
    }
  }
}

ChainTimes chain_times(int j, double t) {
  ChainTimes times{t, {}};
  for (int i = 1; i <= j; ++i) times.t_inner.push_back(t * (j + 1 - i) / (j + 2.0));
  return times;
}

}  // namespace

CheckRecord check_expansion_example1(const ExpansionCheckParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(1, 1);
  const OperatorChainSpec spec = example1_chain();
  const SymbolicExpansion exp = expand_difference(spec);
  const ExpansionTerm& term = exp.terms.front();
  const int order = spec.input_order();

  auto unit = [&](std::initializer_list<std::pair<int, int>> coeffs) {
    LinearForm f(static_cast<std::size_t>(2 * order), 0);
    for (auto [leaf, c] : coeffs) f[static_cast<std::size_t>(leaf)] = c;
    return f;
  };
  // leaves 0..4 are eta_1..eta_5, 5..9 are eta'_1..eta'_5
  const bool a_ok = term.set_a == std::vector<int>{1};
  const bool b_ok = term.set_b == std::vector<int>{2};
  const bool nu_ok = term.nu && *term.nu == unit({{1, 1}});
  const bool nu_prime_ok = term.nu_prime && *term.nu_prime == unit({{2, -1}, {6, 1}, {7, 1}});
  const bool xi1_ok = term.node_forms[0] == unit({{0, 1}, {1, 1}, {2, 1}, {6, -1}, {7, -1}});
  const bool xip2_ok = term.node_forms[3] == unit({{4, -1}, {8, 1}, {9, 1}});

  const DensityMatrix sigma = random_density(lattice, order, p.seed, 0);
  SoundnessStats stats;
  compare_chain(spec, sigma, ChainTimes{p.t, p.t_inner}, p.deltas, stats);
  const double c3 = empirical_c3(term, *lattice);

  CheckRecord rec;
  rec.name = "expansion_example1";
  rec.measured = {{"A", term.set_a},
                  {"B", term.set_b},
                  {"nu", format_form(*term.nu, order)},
                  {"nu_prime", format_form(*term.nu_prime, order)},
                  {"xi1", format_form(term.node_forms[0], order)},
                  {"xi'2", format_form(term.node_forms[3], order)},
                  {"worst_relative", stats.worst},
                  {"evaluations", stats.evaluations},
                  {"empirical_c3", c3}};
  rec.thresholds.push_back({"A", "==", "{xi_1}", "[PAPER]"});
  rec.thresholds.push_back({"B", "==", "{xi'_2}", "[PAPER]"});
  rec.thresholds.push_back({"nu_12", "==", "xi_3 of the input (leaf eta_2)", "[PAPER]"});
  rec.thresholds.push_back({"worst_relative", "<=", p.tolerance, "[DERIVED]"});
  rec.pass = a_ok && b_ok && nu_ok && nu_prime_ok && xi1_ok && xip2_ok && stats.worst <= p.tolerance;
  rec.summary = std::string("A=") + (a_ok ? "{xi_1}" : "MISMATCH") + ", B=" + (b_ok ? "{xi'_2}" : "MISMATCH") +
                ", nu=" + format_form(*term.nu, order) + ", worst relative " + sci(stats.worst) + " over " +
                std::to_string(stats.evaluations) + " evaluations";
  rec.seconds = clock.seconds();
  return rec;
}

CheckRecord check_chain_soundness(const OperatorChainSpec& spec, std::uint64_t seed, double tolerance) {
  Stopwatch clock;
  spec.validate();
  const auto lattice = build_lattice(1, 1);
  const DensityMatrix sigma = random_density(lattice, spec.input_order(), seed,
                                             DensityMatrix::preferred_storage(*lattice, spec.input_order()) == Storage::dense ? 0 : 64);
  SoundnessStats stats;
  compare_chain(spec, sigma, chain_times(spec.j(), 0.6), {0.0, 0.1}, stats);
  CheckRecord rec;
  rec.name = "expansion_soundness";
  rec.measured = {{"evaluations", stats.evaluations}, {"worst_relative", stats.worst}};
  rec.thresholds.push_back({"worst_relative", "<=", tolerance, "[DERIVED]"});
  rec.pass = stats.worst <= tolerance;
  rec.summary = "expansion vs direct composition, worst relative " + sci(stats.worst) + " over " +
                std::to_string(stats.evaluations) + " evaluations";
  rec.seconds = clock.seconds();
  return rec;
}

CheckRecord check_expansion_battery(std::uint64_t seed, double tolerance) {
  Stopwatch clock;
  const auto lattice = build_lattice(1, 1);
  SoundnessStats stats;
  std::size_t chains = 0;
  const std::vector<double> deltas{0.1};

  std::vector<OperatorChainSpec> specs;
  for (int k = 1; k <= 2; ++k) {
    for (int steps = 1; steps <= 3; ++steps) {
      OperatorChainSpec spec{k, {}};
      std::function<void(int)> rec = [&](int i) {
        if (i == steps) {
          specs.push_back(spec);
          return;
        }
        const int input = k + i + 1;
        for (int n = 2; n <= input; ++n)
          for (int l = 1; l < n; ++l)
            for (auto s : {CollisionSign::plus, CollisionSign::minus}) {
              spec.steps.push_back({l, n, s});
              rec(i + 1);
              spec.steps.pop_back();
            }
      };
      rec(0);
    }
  }
  // every chain up to j = 2, plus a seeded subset of j = 3
  std::uint64_t counter = 0;
  for (int k = 1; k <= 2; ++k) {
    OperatorChainSpec spec{k, {}};
    for (int i = 0; i < 4; ++i) {
      const int input = k + i + 1;
      const auto pick = CounterRng::bits(seed, streams::sampler, counter++);
      const int n = 2 + static_cast<int>(pick % static_cast<std::uint64_t>(input - 1));
      const int l = 1 + static_cast<int>((pick >> 20) % static_cast<std::uint64_t>(n - 1));
      spec.steps.push_back({l, n, (pick >> 40) & 1 ? CollisionSign::minus : CollisionSign::plus});
    }
    specs.push_back(spec);
  }

  for (const auto& spec : specs) {
    const int order = spec.input_order();
    const DensityMatrix sigma = random_density(lattice, order, CounterRng::mix(seed + chains), 24);
    compare_chain(spec, sigma, chain_times(spec.j(), 0.6), deltas, stats);
    ++chains;
  }

  CheckRecord rec;
  rec.name = "expansion_battery";
  rec.measured = {{"chains", chains}, {"evaluations", stats.evaluations}, {"worst_relative", stats.worst}};
  rec.thresholds.push_back({"worst_relative", "<=", tolerance, "[DERIVED]"});
  rec.pass = stats.worst <= tolerance;
  rec.summary = std::to_string(chains) + " chains, worst relative " + sci(stats.worst);
  rec.seconds = clock.seconds();
  return rec;
}

// 9 ---------------------------------------------------------------------------

CheckRecord check_randomization_identities(const IdentityParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  const SignField plus = SignField::all_plus(*lattice);
  int failures = 0, checks = 0;

  // [B]^omega with omega all-plus is B, bit for bit
  for (int order = 2; order <= 3; ++order) {
    const DensityMatrix gamma = random_density(lattice, order, CounterRng::mix(p.seed + order), order == 2 ? 0 : 200);
    for (int n = 2; n <= order; ++n)
      for (int l = 1; l < n; ++l)
        for (auto s : {CollisionSign::plus, CollisionSign::minus}) {
          ++checks;
          if (!collision(gamma, l, n, s, &plus).equals(collision(gamma, l, n, s, nullptr))) ++failures;
        }
    ++checks;
    if (!full_collision(gamma, &plus).equals(full_collision(gamma, nullptr))) ++failures;
  }

  // ||f^omega|| = ||f|| for every field
  const std::size_t f = static_cast<std::size_t>(lattice->size());
  std::vector<cplx> fn(f);
  for (std::size_t i = 0; i < f; ++i) {
    fn[i] = cplx(CounterRng::normal(p.seed, streams::tensor, 2 * i), CounterRng::normal(p.seed, streams::tensor, 2 * i + 1));
  }
  const auto weights = sobolev_weights(*lattice, 1, 1.0);
  auto norm = [&](const std::vector<cplx>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::norm(v[i]) * weights[i * f + i];
    return s;
  };
  for (std::uint64_t b = 0; b < 64; ++b) {
    const SignField field = sample_field(*lattice, p.seed, b);
    ++checks;
    if (norm(randomize_function(fn, field)) != norm(fn)) ++failures;
  }

  // dependent with field g == independent with g on every level
  const int n_levels = 3;
  const HierarchyState initial = make_initial(lattice, n_levels, 1.0, 1.0, p.seed, 48);
  const SignField g = sample_field(*lattice, p.seed, 7);
  std::map<int, SignField> same;
  for (int m = 2; m <= n_levels; ++m) same.emplace(m, g);
  const HierarchyMode dep = HierarchyMode::dependent(g);
  const HierarchyMode ind = HierarchyMode::independent(same);
  ++checks;
  if (!hierarchy_rhs(initial, n_levels, dep).equals(hierarchy_rhs(initial, n_levels, ind))) ++failures;
  const TimeGrid grid = TimeGrid::uniform(0.05, 3);
  const auto a = evolve_truncated(initial, n_levels, grid, dep, {1e-3, Picture::automatic});
  const auto b = evolve_truncated(initial, n_levels, grid, ind, {1e-3, Picture::automatic});
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++checks;
    if (!a[i].equals(b[i])) ++failures;
  }
  const QuadratureSpec quad{8, 2};
  ++checks;
  if (!truncated_state(initial, n_levels, 0.05, dep, quad).equals(truncated_state(initial, n_levels, 0.05, ind, quad)))
    ++failures;

  CheckRecord rec;
  rec.name = "randomization_identities";
  rec.measured = {{"checks", checks}, {"failures", failures}};
  rec.thresholds.push_back({"failures", "==", 0, "[TRIVIAL]"});
  rec.pass = failures == 0;
  rec.summary = std::to_string(checks - failures) + "/" + std::to_string(checks) + " bitwise identities hold";
  rec.seconds = clock.seconds();
  return rec;
}

// 10 --------------------------------------------------------------------------

CheckRecord check_nls(const NlsCheckParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  NlsState state{lattice, p.phi0 ? *p.phi0 : random_phi(*lattice, p.seed, p.mass, p.decay), 0.0};
  NlsOptions opts;
  opts.coupling = p.coupling;
  const NlsTrajectory traj = nls_evolve(state, p.T, p.dt, opts);
  const TimeGrid grid = TimeGrid::uniform(p.T, p.grid_points);

  CheckRecord rec;
  rec.name = "nls_factorized";
  Table table{"nls_residual", {"k", "t", "algebraic", "integrator"}, {}};
  double alg = 0.0, integ = 0.0;
  json per_k = json::object();
  for (int k : p.ks) {
    const FactorizedResidual res = factorized_residual(traj, k, grid, p.alpha);
    for (std::size_t i = 0; i < res.times.size(); ++i) {
      table.rows.push_back({static_cast<double>(k), res.times[i], res.algebraic[i], res.integrator[i]});
    }
    alg = std::max(alg, res.max_algebraic);
    integ = std::max(integ, res.max_integrator);
    per_k[std::to_string(k)] = {{"algebraic", res.max_algebraic}, {"integrator", res.max_integrator}};
  }
  const OrderCheck order = rk4_order_check(state, p.T, p.order_dt, opts);
  const double drift = std::abs(nls_mass(traj.states.back()) - nls_mass(traj.states.front()));
  Table order_table{"nls_order", {"dt", "error"}, {{order.dt, order.error_coarse}, {order.dt / 2, order.error_fine}}};

  rec.measured = {{"max_algebraic", alg},      {"max_integrator", integ},     {"per_k", per_k},
                  {"order_ratio", order.ratio}, {"order_dt", order.dt},        {"error_coarse", order.error_coarse},
                  {"error_fine", order.error_fine}, {"mass_drift", drift}};
  rec.thresholds.push_back({"max_algebraic", "<=", p.algebraic_tolerance, "[DERIVED]"});
  rec.thresholds.push_back({"max_integrator", "<=", p.integrator_tolerance, "[DERIVED]"});
  rec.thresholds.push_back({"order_ratio", "in", json::array({p.ratio_lo, p.ratio_hi}), "[DERIVED]"});
  rec.pass = alg <= p.algebraic_tolerance && integ <= p.integrator_tolerance && order.ratio >= p.ratio_lo &&
             order.ratio <= p.ratio_hi;
  rec.summary = "algebraic " + sci(alg) + ", integrator " + sci(integ) + ", RK4 ratio " + sci(order.ratio) +
                ", mass drift " + sci(drift);
  rec.tables.push_back(std::move(table));
  rec.tables.push_back(std::move(order_table));
  rec.seconds = clock.seconds();
  return rec;
}

// 11 --------------------------------------------------------------------------

CheckRecord check_simplex(const SimplexParams& p) {
  Stopwatch clock;
  CheckRecord rec;
  rec.name = "simplex_identity";
  Table table{"simplex", {"j", "t", "quadrature", "exact", "abs_error"}, {}};
  double worst = 0.0;
  for (int j = 1; j <= p.j_max; ++j) {
    for (double t : p.times) {
      const SimplexCheck c = simplex_check(j, t, QuadratureSpec{p.q, p.j_max});
      const double err = std::abs(c.numeric - c.exact);
      worst = std::max(worst, err);
      table.rows.push_back({static_cast<double>(j), t, c.numeric, c.exact, err});
    }
  }
  rec.measured = {{"worst_abs_error", worst}};
  rec.thresholds.push_back({"worst_abs_error", "<=", p.tolerance, "[PAPER]"});
  rec.pass = worst <= p.tolerance;
  rec.summary = "worst |quadrature - t^j/j!| " + sci(worst);
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

// 12 --------------------------------------------------------------------------

CheckRecord check_nonresonant(const NonresonantParams& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  int round_trip_failures = 0;
  double worst_c1 = 0.0;
  for (int draw = 0; draw < p.draws; ++draw) {
    const HierarchyState state =
        nonresonant_sample(lattice, p.m_max, CounterRng::mix(p.seed + static_cast<std::uint64_t>(draw)), p.target_c1,
                           p.alpha);
    const NonresonantResult res = nonresonant_check(state, p.alpha);
    worst_c1 = std::max(worst_c1, res.c1);
    if (!res.pass || res.c1 > p.target_c1 * (1.0 + 1e-12)) ++round_trip_failures;
  }

  // Level 2 holds one good tuple and one with |xi_2| = |xi'_1|.
  auto idx = [&](int x) {
    Frequency z{};
    z[0] = x;
    return *lattice->find(z);
  };
  HierarchyState bad(lattice, 2);
  bad.set_level(1, DensityMatrix::from_entries(lattice, 1, {{encode_key(std::vector<LatticeIndex>{idx(5), idx(2)}, lattice->size()), 1.0}}));
  std::vector<SparseEntry> entries{
      {encode_key(std::vector<LatticeIndex>{idx(6), idx(4), idx(3), idx(1)}, lattice->size()), 0.5},
      {encode_key(std::vector<LatticeIndex>{idx(3), idx(-2), idx(2), idx(1)}, lattice->size()), 0.25},
  };
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  bad.set_level(2, DensityMatrix::from_entries(lattice, 2, entries));
  const NonresonantResult res = nonresonant_check(bad, p.alpha);
  Frequency w3{}, wm2{}, w2{}, w1{};
  w3[0] = 3;
  wm2[0] = -2;
  w2[0] = 2;
  w1[0] = 1;
  const bool witness_ok = !res.pass && res.witness_level == 2 && res.witness_unprimed == std::vector<Frequency>{w3, wm2} &&
                          res.witness_primed == std::vector<Frequency>{w2, w1};

  CheckRecord rec;
  rec.name = "nonresonant_tools";
  rec.measured = {{"draws", p.draws},
                  {"round_trip_failures", round_trip_failures},
                  {"worst_c1", worst_c1},
                  {"resonant_rejected", !res.pass},
                  {"witness", res.witness}};
  rec.thresholds.push_back({"round_trip_failures", "==", 0, "[TRIVIAL]"});
  rec.thresholds.push_back({"c1", "<=", p.target_c1, "[TRIVIAL]"});
  rec.pass = round_trip_failures == 0 && witness_ok;
  rec.summary = std::to_string(p.draws - round_trip_failures) + "/" + std::to_string(p.draws) +
                " sampled states accepted; resonant example " + (witness_ok ? "rejected with witness " + res.witness
                                                                             : std::string("NOT rejected correctly"));
  rec.seconds = clock.seconds();
  return rec;
}

// C_0 table ------------------------------------------------------------------

CheckRecord estimate_c0_table(const C0Params& p) {
  Stopwatch clock;
  const auto lattice = build_lattice(p.d, p.M);
  CheckRecord rec;
  rec.name = "c0_estimates";
  Table table{"c0", {"k", "j", "empirical", "exact"}, {}};
  bool pass = true;
  json rows = json::array();
  for (int k = 1; k <= p.k_max; ++k) {
    for (int j = 1; j <= k; ++j) {
      const C0Estimate est = estimate_c0(lattice, k, j, p.alpha, p.trials, p.seed, p.omega);
      const double exact = est.exact ? est.exact->value : std::numeric_limits<double>::quiet_NaN();
      if (est.exact && p.omega.method == OmegaMethod::exact) pass = pass && est.empirical <= exact;
      table.rows.push_back({static_cast<double>(k), static_cast<double>(j), est.empirical, exact});
      rows.push_back({{"k", k}, {"j", j}, {"empirical", est.empirical}, {"exact", est.exact ? json(exact) : json(nullptr)}});
    }
  }
  rec.measured = {{"estimates", rows}};
  rec.thresholds.push_back({"empirical", "<=", "exact operator norm", "[DERIVED]"});
  rec.pass = pass;
  rec.summary = std::to_string(rows.size()) + " (k, j) pairs estimated";
  rec.tables.push_back(std::move(table));
  rec.seconds = clock.seconds();
  return rec;
}

}  // namespace gph
