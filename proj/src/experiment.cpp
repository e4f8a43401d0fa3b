#include "gph/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "gph/checks.hpp"
#include "gph/io.hpp"
#include "gph/nls.hpp"

namespace gph {

using nlohmann::json;

ChainStep parse_step(const std::string& text) {
  const auto bad = [&] { return ConfigError({"expand.steps: cannot parse '" + text + "', expected e.g. \"+1,2\""}); };
  if (text.size() < 4 || (text[0] != '+' && text[0] != '-')) throw bad();
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw bad();
  try {
    std::size_t used = 0;
    const int l = std::stoi(text.substr(1, comma - 1), &used);
    if (used != comma - 1) throw bad();
    const int n = std::stoi(text.substr(comma + 1), &used);
    if (used != text.size() - comma - 1) throw bad();
    return {l, n, text[0] == '+' ? CollisionSign::plus : CollisionSign::minus};
  } catch (const std::logic_error&) {
    throw bad();
  }
}

namespace {

OmegaSpec omega_of(const ExperimentConfig& c) { return {c.omega, c.mc_samples, c.seed}; }

std::optional<HierarchyState> initial_of(const ExperimentConfig& c, const LatticePtr& lattice, int needed) {
  if (c.initial.empty()) return std::nullopt;
  std::optional<HierarchyState> loaded;
  try {
    loaded = load_hierarchy(c.initial, lattice);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("initial: ") + e.what()});
  }
  HierarchyState& state = *loaded;
  if (state.k_max() < needed) {
    throw ConfigError({"initial: file holds K_max=" + std::to_string(state.k_max()) + ", the experiment needs " +
                       std::to_string(needed)});
  }
  return state;
}

OracleParams oracle_params(const ExperimentConfig& c, const LatticePtr& lattice) {
  OracleParams p;
  p.d = c.d;
  p.M = c.M;
  p.N = c.N;
  p.T = c.T;
  p.grid_points = c.grid_points;
  p.q = c.q;
  p.dt = c.dt;
  p.alpha = c.alpha;
  p.level_ratio = c.level_ratio;
  p.sparse_nnz = c.sparse_nnz;
  p.seed = c.seed;
  p.initial = initial_of(c, lattice, c.N);
  return p;
}

DecayParams decay_params(const ExperimentConfig& c, const LatticePtr& lattice) {
  DecayParams p;
  p.d = c.d;
  p.M = c.M;
  p.j_max = std::min(c.j_max, c.K_max - 1);
  p.ks = {};
  for (int k = 1; k + p.j_max <= c.K_max && k <= 2; ++k) p.ks.push_back(k);
  if (p.ks.empty()) p.ks = {1};
  p.times = {c.T};
  p.seeds = 1;
  p.q = c.q;
  p.alpha = c.alpha;
  p.level_ratio = c.level_ratio;
  p.sparse_nnz = c.sparse_nnz;
  p.kind = c.mode;
  p.omega = omega_of(c);
  p.seed = c.seed;
  p.initial = initial_of(c, lattice, c.K_max);
  if (p.initial) p.ks = {1};
  return p;
}

std::optional<CauchyParams> cauchy_params(const ExperimentConfig& c, const LatticePtr& lattice) {
  CauchyParams p;
  p.d = c.d;
  p.M = c.M;
  p.levels.clear();
  for (int n = 2; n <= c.N && n + 1 <= c.K_max; ++n) p.levels.push_back(n);
  if (p.levels.size() < 2) return std::nullopt;
  p.level_ratio = c.level_ratio;
  p.T = c.T;
  p.grid_points = c.grid_points;
  p.q = c.q;
  p.alpha = c.alpha;
  p.xi = c.xi;
  p.sparse_nnz = c.sparse_nnz;
  p.kind = c.mode;
  p.omega = omega_of(c);
  p.seed = c.seed;
  p.initial = initial_of(c, lattice, p.levels.back() + 1);
  return p;
}

ModulusParams modulus_params(const ExperimentConfig& c, const LatticePtr& lattice) {
  ModulusParams p;
  p.d = c.d;
  p.M = c.M;
  p.N = c.N;
  p.T = c.T;
  p.grid_points = c.grid_points;
  p.alpha = c.alpha;
  p.alpha0 = c.alpha0.value_or(c.alpha + 1.0);
  p.xi = c.xi;
  p.q = c.q;
  p.sparse_nnz = c.sparse_nnz;
  p.kind = c.mode;
  p.omega = omega_of(c);
  p.seed = c.seed;
  p.initial = initial_of(c, lattice, c.N);
  return p;
}

ContinuityParams continuity_params(const ExperimentConfig& c) {
  ContinuityParams p;
  p.dims = {c.d};
  p.M_max = c.M;
  p.k_max = std::min(c.K_max, 2);
  return p;
}

NlsCheckParams nls_params(const ExperimentConfig& c) {
  NlsCheckParams p;
  p.d = c.d;
  p.M = c.M;
  p.ks.clear();
  for (int k = 1; k <= c.nls.k_max; ++k) p.ks.push_back(k);
  p.dt = c.dt;
  p.T = c.T;
  p.grid_points = c.grid_points;
  p.alpha = c.alpha;
  p.mass = c.nls.mass;
  p.decay = c.nls.decay;
  p.coupling = c.nls.coupling;
  p.order_dt = c.nls.order_dt;
  p.seed = c.seed;
  if (!c.nls.initial.empty()) {
    std::optional<NlsState> loaded;
    try {
      loaded = nls_from_json(read_json_file(c.nls.initial));
    } catch (const std::exception& e) {
      throw ConfigError({std::string("nls.initial: ") + e.what()});
    }
    const NlsState& s = *loaded;
    if (s.lattice->dim() != c.d || s.lattice->cutoff() != c.M) {
      throw ConfigError({"nls.initial: file lattice does not match d and M"});
    }
    p.phi0 = s.coefficients;
  }
  return p;
}

void add_decay_constants(Report& r, const CheckRecord& decay) {
  const double c1 = decay.measured.value("c1_fit", 0.0);
  const double c2 = decay.measured.value("c2_fit", 0.0);
  json adm = {{"C1_hat", c1}, {"C2_hat", c2}};
  if (r.config.xi_prime) {
    const double a = c1 * r.config.T / *r.config.xi_prime;
    const double b = c2 * r.config.xi / *r.config.xi_prime;
    adm["C1_T_over_xi_prime"] = a;
    adm["C2_xi_over_xi_prime"] = b;
    adm["time_condition_holds"] = a < 1.0;
    adm["weight_condition_holds"] = b < 1.0;
  }
  r.constants["admissibility"] = adm;
  r.constants["level_operator_norm"] = decay.measured.value("level_operator_norm", 0.0);
}

}  // namespace

Report run_experiment(const ExperimentConfig& config) {
  config.validate();
  Report r;
  r.config = config;
  const auto lattice = build_lattice(config.d, config.M);
  const auto& c = config;

  switch (c.kind) {
    case ExperimentKind::verify: {
      const OracleParams oracle = oracle_params(c, lattice);
      r.checks.push_back(check_duhamel_oracle(oracle));
      r.checks.push_back(check_integral_residual(oracle));
      RandomizedParams rp;
      rp.alpha = c.alpha;
      rp.seed = c.seed;
      rp.mc_samples = std::max<std::uint64_t>(c.mc_samples, 2);
      r.checks.push_back(check_randomized_estimate(rp));
      const CheckRecord decay = check_factorial_decay(decay_params(c, lattice));
      add_decay_constants(r, decay);
      r.checks.push_back(decay);
      if (auto cp = cauchy_params(c, lattice)) {
        r.checks.push_back(check_cauchy(*cp));
      } else {
        r.constants["cauchy_skipped"] = "needs two levels n >= 2 with n <= N and n+1 <= K_max";
      }
      r.checks.push_back(check_continuity_lemma(continuity_params(c)));
      r.checks.push_back(check_modulus_scaling(modulus_params(c, lattice)));
      r.checks.push_back(check_expansion_example1({}));
      r.checks.push_back(check_expansion_battery(c.seed));
      r.checks.push_back(check_randomization_identities({c.d, std::max(c.M, 1), c.seed}));
      r.checks.push_back(check_simplex({}));
      NonresonantParams np;
      np.seed = c.seed;
      r.checks.push_back(check_nonresonant(np));
      break;
    }
    case ExperimentKind::estimate_c0: {
      C0Params p;
      p.d = c.d;
      p.M = c.M;
      p.k_max = c.K_max;
      p.alpha = c.alpha;
      p.omega = omega_of(c);
      p.seed = c.seed;
      CheckRecord rec = estimate_c0_table(p);
      r.constants["C0"] = rec.measured["estimates"];
      r.checks.push_back(std::move(rec));
      break;
    }
    case ExperimentKind::decay: {
      const CheckRecord decay = check_factorial_decay(decay_params(c, lattice));
      add_decay_constants(r, decay);
      r.checks.push_back(decay);
      break;
    }
    case ExperimentKind::converge: {
      r.checks.push_back(check_duhamel_oracle(oracle_params(c, lattice)));
      if (auto cp = cauchy_params(c, lattice)) {
        CheckRecord rec = check_cauchy(*cp);
        r.constants["cauchy_ratios"] = rec.measured["ratios"];
        r.checks.push_back(std::move(rec));
      } else {
        r.constants["cauchy_skipped"] = "needs two levels n >= 2 with n <= N and n+1 <= K_max";
      }
      break;
    }
    case ExperimentKind::residual:
      r.checks.push_back(check_integral_residual(oracle_params(c, lattice)));
      break;
    case ExperimentKind::continuity: {
      r.checks.push_back(check_continuity_lemma(continuity_params(c)));
      CheckRecord rec = check_modulus_scaling(modulus_params(c, lattice));
      r.constants["modulus_ratios"] = rec.measured["sup_ratios"];
      r.checks.push_back(std::move(rec));
      break;
    }
    case ExperimentKind::nls:
      r.checks.push_back(check_nls(nls_params(c)));
      break;
    case ExperimentKind::expand: {
      OperatorChainSpec spec;
      if (c.expand.example1) {
        spec = example1_chain();
      } else {
        spec.k = c.expand.k;
        for (const auto& s : c.expand.steps) spec.steps.push_back(parse_step(s));
        try {
          spec.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError({std::string("expand.steps: ") + e.what()});
        }
      }
      const SymbolicExpansion exp = spec.j() >= 1 ? expand_difference(spec) : expand_chain(spec);
      r.artifacts["expansion"] = expansion_to_json(exp);
      if (exp.terms.front().difference) {
        const auto lat1 = build_lattice(1, 1);
        r.constants["C3_empirical"] = empirical_c3(exp.terms.front(), *lat1);
      }
      if (c.expand.example1) {
        ExpansionCheckParams p;
        p.seed = c.seed;
        p.deltas = {0.0, c.expand.delta};
        r.checks.push_back(check_expansion_example1(p));
      } else {
        r.checks.push_back(check_chain_soundness(spec, c.seed));
      }
      break;
    }
  }
  return r;
}

}  // namespace gph
