#include "gph/config.hpp"

#include <array>
#include <cmath>
#include <set>
#include <sstream>

namespace gph {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& problems) {
  std::ostringstream out;
  out << "invalid config:";
  for (const auto& p : problems) out << "\n  " << p;
  return out.str();
}

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 8> kKinds{{
    {ExperimentKind::verify, "verify"},
    {ExperimentKind::estimate_c0, "estimate-c0"},
    {ExperimentKind::decay, "decay"},
    {ExperimentKind::converge, "converge"},
    {ExperimentKind::residual, "residual"},
    {ExperimentKind::continuity, "continuity"},
    {ExperimentKind::nls, "nls"},
    {ExperimentKind::expand, "expand"},
}};

class Reader {
 public:
  Reader(const json& j, std::string prefix, std::vector<std::string>& problems)
      : j_(j), prefix_(std::move(prefix)), problems_(problems) {
    if (!j_.is_object()) problems_.push_back(where("") + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return bad(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return bad(key, "an integer");
      if (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) return bad(key, "non-negative");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return bad(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return bad(key, "a string");
    }
    out = v.get<T>();
  }

  void get_optional(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    const json& v = j_.at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      bad(key, "a number or null");
    }
  }

  void get_strings(const char* key, std::vector<std::string>& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) return bad(key, "an array of strings");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_string()) return bad(key, "an array of strings");
      out.push_back(e.get<std::string>());
    }
  }

  const json* section(const char* key) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void mark(const char* key) { seen_.insert(key); }

  void finish() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) problems_.push_back(where(key) + ": unknown field");
    }
  }

  std::string where(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  void bad(const char* key, const char* expected) { problems_.push_back(where(key) + ": expected " + expected); }

 private:
  const json& j_;
  std::string prefix_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

std::string_view kind_name(ExperimentKind kind) {
  for (const auto& [k, name] : kKinds)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKinds)
    if (n == name) return k;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> p;
  if (d < 1 || d > kMaxDim) p.push_back("d: must be in 1.." + std::to_string(kMaxDim));
  if (M < 1) p.push_back("M: must be >= 1");
  if (K_max < 1) p.push_back("K_max: must be >= 1");
  if (N < 1) p.push_back("N: must be >= 1");
  if (K_max < N) p.push_back("K_max: must be >= N (K_max=" + std::to_string(K_max) + ", N=" + std::to_string(N) + ")");
  if (!(alpha >= 0.0)) p.push_back("alpha: must be >= 0");
  if (alpha0 && !(*alpha0 > alpha)) p.push_back("alpha0: must exceed alpha");
  if (!(xi > 0.0)) p.push_back("xi: must be positive");
  if (xi_prime && !(xi < *xi_prime)) p.push_back("xi_prime: must exceed xi");
  if (!(T > 0.0) || !std::isfinite(T)) p.push_back("T: must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) p.push_back("dt: must be positive");
  if (q < 1 || q > 64) p.push_back("q: must be in 1..64");
  if (j_max < 0) p.push_back("j_max: must be >= 0");
  if (omega == OmegaMethod::mc && mc_samples < 2) p.push_back("mc_samples: Monte-Carlo needs at least 2 samples");
  if (grid_points < 2) p.push_back("grid_points: must be >= 2");
  if (!(level_ratio > 0.0)) p.push_back("level_ratio: must be positive");
  if (sparse_nnz < 1) p.push_back("sparse_nnz: must be >= 1");
  if (nls.k_max < 1) p.push_back("nls.k_max: must be >= 1");
  if (!(nls.mass > 0.0)) p.push_back("nls.mass: must be positive");
  if (!(nls.order_dt > 0.0)) p.push_back("nls.order_dt: must be positive");
  if (expand.k < 1) p.push_back("expand.k: must be >= 1");
  if (kind == ExperimentKind::expand && !expand.example1 && expand.steps.empty()) {
    p.push_back("expand.steps: give a step list or set expand.example1");
  }
  if (!p.empty()) throw ConfigError(std::move(p));
}

json to_json(const ExperimentConfig& c) {
  return {
      {"kind", std::string(kind_name(c.kind))},
      {"d", c.d},
      {"M", c.M},
      {"K_max", c.K_max},
      {"N", c.N},
      {"alpha", c.alpha},
      {"alpha0", c.alpha0 ? json(*c.alpha0) : json(nullptr)},
      {"xi", c.xi},
      {"xi_prime", c.xi_prime ? json(*c.xi_prime) : json(nullptr)},
      {"T", c.T},
      {"dt", c.dt},
      {"q", c.q},
      {"j_max", c.j_max},
      {"mc_samples", c.mc_samples},
      {"seed", c.seed},
      {"mode", std::string(mode_name(c.mode))},
      {"omega", c.omega == OmegaMethod::exact ? "exact" : "mc"},
      {"grid_points", c.grid_points},
      {"level_ratio", c.level_ratio},
      {"sparse_nnz", c.sparse_nnz},
      {"initial", c.initial},
      {"nls",
       {{"k_max", c.nls.k_max},
        {"mass", c.nls.mass},
        {"decay", c.nls.decay},
        {"coupling", c.nls.coupling},
        {"order_dt", c.nls.order_dt},
        {"initial", c.nls.initial}}},
      {"expand", {{"example1", c.expand.example1}, {"k", c.expand.k}, {"steps", c.expand.steps}, {"delta", c.expand.delta}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  std::vector<std::string> problems;
  Reader r(j, "", problems);

  std::string kind(kind_name(c.kind));
  r.get("kind", kind);
  if (auto k = parse_kind(kind)) c.kind = *k;
  else problems.push_back("kind: unknown experiment kind '" + kind + "'");

  r.get("d", c.d);
  r.get("M", c.M);
  r.get("K_max", c.K_max);
  r.get("N", c.N);
  r.get("alpha", c.alpha);
  r.get_optional("alpha0", c.alpha0);
  r.get("xi", c.xi);
  r.get_optional("xi_prime", c.xi_prime);
  r.get("T", c.T);
  r.get("dt", c.dt);
  r.get("q", c.q);
  r.get("j_max", c.j_max);
  r.get("mc_samples", c.mc_samples);
  r.get("seed", c.seed);

  std::string mode(mode_name(c.mode));
  r.get("mode", mode);
  if (mode == "deterministic") c.mode = HierarchyMode::Kind::deterministic;
  else if (mode == "dependent") c.mode = HierarchyMode::Kind::dependent;
  else if (mode == "independent") c.mode = HierarchyMode::Kind::independent;
  else problems.push_back("mode: expected deterministic, dependent or independent, got '" + mode + "'");

  std::string omega = c.omega == OmegaMethod::exact ? "exact" : "mc";
  r.get("omega", omega);
  if (omega == "exact") c.omega = OmegaMethod::exact;
  else if (omega == "mc") c.omega = OmegaMethod::mc;
  else problems.push_back("omega: expected exact or mc, got '" + omega + "'");

  r.get("grid_points", c.grid_points);
  r.get("level_ratio", c.level_ratio);
  r.get("sparse_nnz", c.sparse_nnz);
  r.get("initial", c.initial);

  if (const json* s = r.section("nls")) {
    Reader n(*s, "nls", problems);
    n.get("k_max", c.nls.k_max);
    n.get("mass", c.nls.mass);
    n.get("decay", c.nls.decay);
    n.get("coupling", c.nls.coupling);
    n.get("order_dt", c.nls.order_dt);
    n.get("initial", c.nls.initial);
    n.finish();
  }
  if (const json* s = r.section("expand")) {
    Reader e(*s, "expand", problems);
    e.get("example1", c.expand.example1);
    e.get("k", c.expand.k);
    e.get_strings("steps", c.expand.steps);
    e.get("delta", c.expand.delta);
    e.finish();
  }
  r.finish();
  if (!problems.empty()) throw ConfigError(std::move(problems));
  c.validate();
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError({assignment + ": overrides look like key.path=value"});
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError({path + ": empty key in override"});
    if (!node->is_object()) throw ConfigError({path + ": cannot descend into a non-object"});
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace gph
