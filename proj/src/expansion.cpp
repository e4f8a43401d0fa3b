#include "gph/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gph/random.hpp"

namespace gph {

void OperatorChainSpec::validate() const {
  if (k < 1) throw std::invalid_argument("chain output order k must be >= 1");
  if (steps.empty()) throw std::invalid_argument("chain needs at least one collision");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const int input = k + static_cast<int>(i) + 1;
    const auto& s = steps[i];
    if (!(1 <= s.l && s.l < s.n && s.n <= input)) {
      throw std::invalid_argument("step " + std::to_string(i + 1) + " needs 1 <= l < n <= " + std::to_string(input) +
                                  " (got l=" + std::to_string(s.l) + ", n=" + std::to_string(s.n) + ")");
    }
  }
  if (2 * input_order() > kMaxSlots) throw std::invalid_argument("chain too long");
}

std::vector<double> ChainTimes::propagator_times(int j) const {
  if (!t_inner.empty() && static_cast<int>(t_inner.size()) != j) {
    throw std::invalid_argument("chain times need exactly j inner times (or none)");
  }
  std::vector<double> tau(static_cast<std::size_t>(j), 0.0);
  auto inner = [&](int i) { return t_inner.empty() ? 0.0 : t_inner[static_cast<std::size_t>(i - 1)]; };
  for (int i = 0; i < j; ++i) tau[i] = (i == 0 ? t : inner(i)) - inner(i + 1);
  return tau;
}

namespace {

struct Node {
  int owner;
  int epsilon;
  int side;                      // +1 unprimed, -1 primed
  std::array<int, 3> children;  // value = c0 + c1 - c2; -1 for none
  std::string name;
};

ExpansionTerm build(const OperatorChainSpec& spec, bool difference) {
  spec.validate();
  const int k = spec.k;
  std::vector<Node> nodes;
  std::vector<int> unp, pri;
  for (int r = 0; r < k; ++r) {
    nodes.push_back({r, 1, 1, {-1, -1, -1}, "xi" + std::to_string(r + 1)});
    unp.push_back(r);
  }
  for (int r = 0; r < k; ++r) {
    nodes.push_back({k + r, 1, -1, {-1, -1, -1}, "xi'" + std::to_string(r + 1)});
    pri.push_back(k + r);
  }
  auto make = [&](int owner, int eps, int side) {
    nodes.push_back({owner, eps, side, {-1, -1, -1}, "z" + std::to_string(nodes.size())});
    return static_cast<int>(nodes.size()) - 1;
  };

  ExpansionTerm term;
  term.k = k;
  std::set<int> hit;
  std::array<int, 4> first_step{};
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    const auto& st = spec.steps[i];
    const int li = st.l - 1, ni = st.n - 1;
    const bool plus = st.sign == CollisionSign::plus;
    const int c = plus ? unp[li] : pri[li];
    const int owner = nodes[c].owner, eps = nodes[c].epsilon;
    int a, s, sp;
    if (plus) {
      // c = a + s - s'
      a = make(owner, eps, 1);
      s = make(owner, eps, 1);
      sp = make(owner, -eps, -1);
      nodes[c].children = {a, s, sp};
      unp[li] = a;
    } else {
      // c = a' + s' - s
      a = make(owner, eps, -1);
      sp = make(owner, eps, -1);
      s = make(owner, -eps, 1);
      nodes[c].children = {a, sp, s};
      pri[li] = a;
    }
    unp.insert(unp.begin() + ni, s);
    pri.insert(pri.begin() + ni, sp);
    hit.insert(owner);
    term.raw_h.push_back({c, a, s, sp});
    if (i == 0) {
      first_step = {c, a, s, sp};
      term.first_plus = plus;
    }
    if (i + 1 < spec.steps.size()) {
      std::vector<std::pair<int, int>> gap;
      for (int u : unp) gap.emplace_back(u, 1);
      for (int p : pri) gap.emplace_back(p, -1);
      term.gap_nodes.push_back(std::move(gap));
    }
  }

  const int m = static_cast<int>(unp.size());
  term.leaves = 2 * m;
  term.leaf_nodes.resize(static_cast<std::size_t>(2 * m));
  for (int i = 0; i < m; ++i) {
    term.leaf_nodes[i] = unp[i];
    term.leaf_nodes[m + i] = pri[i];
  }
  term.node_forms.assign(nodes.size(), LinearForm(static_cast<std::size_t>(2 * m), 0));
  for (int leaf = 0; leaf < 2 * m; ++leaf) term.node_forms[term.leaf_nodes[leaf]][leaf] = 1;
  for (std::size_t id = nodes.size(); id-- > 0;) {
    const auto& ch = nodes[id].children;
    if (ch[0] < 0) continue;
    for (int leaf = 0; leaf < 2 * m; ++leaf) {
      term.node_forms[id][leaf] =
          term.node_forms[ch[0]][leaf] + term.node_forms[ch[1]][leaf] - term.node_forms[ch[2]][leaf];
    }
  }
  for (const auto& n : nodes) term.node_names.push_back(n.name);

  term.groups.resize(static_cast<std::size_t>(2 * k));
  for (int leaf = 0; leaf < 2 * m; ++leaf) {
    const Node& n = nodes[term.leaf_nodes[leaf]];
    if (hit.count(n.owner)) term.groups[n.owner].push_back({leaf, n.epsilon});
  }
  for (int r = 0; r < 2 * k; ++r) {
    if (!hit.count(r)) {
      term.untouched.push_back(r);
    } else if (r < k) {
      term.set_a.push_back(r + 1);
    } else {
      term.set_b.push_back(r - k + 1);
    }
  }

  if (difference) {
    if (spec.steps.size() < 2) throw std::invalid_argument("the difference form needs a propagator (j >= 1)");
    std::vector<SignedForm> f;
    for (const auto& [node, sign] : term.gap_nodes.front()) f.push_back({sign, term.node_forms[node]});
    term.difference = std::move(f);
    const auto [c, a, s, sp] = first_step;
    (void)c;
    term.nu = term.node_forms[s];
    term.nu_prime = term.node_forms[sp];
    auto support = [&](int node) {
      std::vector<int> out;
      for (int leaf = 0; leaf < 2 * m; ++leaf)
        if (term.node_forms[node][leaf] != 0) out.push_back(leaf);
      return out;
    };
    // Case 1 (plus): A^1 under nu = s, A^2 under nu' = s', A^3 under the replaced slot.
    // Case 2 (minus): B^1 under mu = s, B^2 under mu' = s', B^3 likewise.
    term.part1 = support(s);
    term.part2 = support(sp);
    term.part3 = support(a);
  }
  return term;
}

}  // namespace

SymbolicExpansion expand_chain(const OperatorChainSpec& spec) { return {spec, {build(spec, false)}}; }

SymbolicExpansion expand_difference(const OperatorChainSpec& spec) { return {spec, {build(spec, true)}}; }

std::string leaf_name(int leaf, int order) {
  return leaf < order ? "eta" + std::to_string(leaf + 1) : "eta'" + std::to_string(leaf - order + 1);
}

std::string format_form(const LinearForm& form, int order) {
  std::ostringstream out;
  bool first = true;
  for (std::size_t i = 0; i < form.size(); ++i) {
    const int c = form[i];
    if (c == 0) continue;
    if (c < 0) out << (first ? "-" : " - ");
    else if (!first) out << " + ";
    if (std::abs(c) != 1) out << std::abs(c) << '*';
    out << leaf_name(static_cast<int>(i), order);
    first = false;
  }
  return first ? "0" : out.str();
}

int evaluate_form(const LinearForm& form, std::span<const int> leaf_values) {
  int v = 0;
  for (std::size_t i = 0; i < form.size(); ++i) v += form[i] * leaf_values[i];
  return v;
}

double evaluate_difference_f(const ExpansionTerm& term, const FrequencyLattice& lattice,
                             std::span<const LatticeIndex> leaf_points) {
  if (!term.difference) throw std::invalid_argument("expansion term carries no difference factor");
  double f = 0.0;
  for (const auto& sf : *term.difference) {
    Frequency z{};
    for (std::size_t i = 0; i < sf.form.size(); ++i) {
      if (sf.form[i] == 0) continue;
      const auto& p = lattice.freq_of(leaf_points[i]);
      for (int c = 0; c < kMaxDim; ++c) z[c] += sf.form[i] * p[c];
    }
    f += sf.sign * squared_modulus(z);
  }
  return f;
}

DensityMatrix evaluate_expansion(const SymbolicExpansion& expansion, const DensityMatrix& sigma,
                                 const SignField& field, const ChainTimes& times, double delta) {
  const auto& spec = expansion.spec;
  if (sigma.order() != spec.input_order()) {
    throw std::invalid_argument("sigma order " + std::to_string(sigma.order()) + " does not match the chain input order " +
                                std::to_string(spec.input_order()));
  }
  const auto& lat = sigma.lattice();
  const int k = spec.k;
  const int m = sigma.order();
  const auto tau = times.propagator_times(spec.j());
  const Storage storage = DensityMatrix::preferred_storage(lat, k);
  DensityMatrix out(sigma.lattice_ptr(), k, storage);
  SparseAccumulator acc;

  std::vector<LatticeIndex> digits(static_cast<std::size_t>(2 * m));
  std::vector<LatticeIndex> out_digits(static_cast<std::size_t>(2 * k));
  for (const auto& term : expansion.terms) {
    const std::size_t n_nodes = term.node_forms.size();
    std::vector<LatticeIndex> value(n_nodes);
    sigma.for_each_nonzero([&](TensorKey key, cplx v) {
      decode_key(key, lat.size(), 2 * m, digits);
      // Every node is a coordinate of some intermediate tensor, so all must lie in the box.
      for (std::size_t id = 0; id < n_nodes; ++id) {
        Frequency z{};
        const auto& form = term.node_forms[id];
        for (int leaf = 0; leaf < 2 * m; ++leaf) {
          if (form[leaf] == 0) continue;
          const auto& p = lat.freq_of(digits[leaf]);
          for (int c = 0; c < kMaxDim; ++c) z[c] += form[leaf] * p[c];
        }
        const auto idx = lat.find(z);
        if (!idx) return;
        value[id] = *idx;
      }
      cplx c = v;
      for (std::size_t g = 0; g < term.gap_nodes.size(); ++g) {
        std::int64_t e = 0;
        for (const auto& [node, sign] : term.gap_nodes[g]) e += sign * lat.energy(value[node]);
        c *= std::polar(1.0, -tau[g] * static_cast<double>(e));
      }
      double h = 1.0;
      for (const auto& quad : term.raw_h)
        for (int node : quad) h *= field.h(value[node]);
      c *= h;
      if (term.difference) {
        const double f = evaluate_difference_f(term, lat, digits);
        c *= std::polar(1.0, -delta * f) - 1.0;
      }
      for (int r = 0; r < 2 * k; ++r) out_digits[r] = value[r];
      const TensorKey okey = encode_key(out_digits, lat.size());
      if (storage == Storage::dense) out.dense_data()[okey] += c;
      else acc.add(okey, c);
    });
  }
  if (storage == Storage::sparse) return DensityMatrix::from_entries(sigma.lattice_ptr(), k, acc.finish());
  return out;
}

DensityMatrix compose_chain(const OperatorChainSpec& spec, const DensityMatrix& sigma, const SignField& field,
                            const ChainTimes& times, double first_extra) {
  spec.validate();
  if (sigma.order() != spec.input_order()) throw std::invalid_argument("sigma order does not match the chain");
  const auto tau = times.propagator_times(spec.j());
  DensityMatrix cur = sigma;
  for (std::size_t i = spec.steps.size(); i-- > 0;) {
    const auto& st = spec.steps[i];
    cur = collision(cur, st.l, st.n, st.sign, &field);
    if (i > 0) cur = free_evolve(cur, tau[i - 1] + (i == 1 ? first_extra : 0.0));
  }
  return cur;
}

double empirical_c3(const ExpansionTerm& term, const FrequencyLattice& lattice) {
  if (!term.difference) throw std::invalid_argument("expansion term carries no difference factor");
  const int slots = term.leaves;
  const double power = slots / 2;
  const std::uint64_t n = dense_size(lattice.size(), slots / 2);
  std::vector<LatticeIndex> digits(static_cast<std::size_t>(slots));
  double worst = 0.0;
  for (std::uint64_t key = 0; key < n; ++key) {
    decode_key(key, lattice.size(), slots, digits);
    double norm = 0.0;
    for (auto d : digits) norm += lattice.energy(d);
    if (norm == 0.0) continue;
    worst = std::max(worst, std::abs(evaluate_difference_f(term, lattice, digits)) / norm);
  }
  return worst > 0.0 ? std::pow(worst, 1.0 / power) : 0.0;
}

OperatorChainSpec example1_chain() {
  OperatorChainSpec spec;
  spec.k = 2;
  spec.steps = {{1, 2, CollisionSign::plus}, {2, 3, CollisionSign::minus}, {4, 5, CollisionSign::minus}};
  return spec;
}

nlohmann::json expansion_to_json(const SymbolicExpansion& expansion) {
  using nlohmann::json;
  const auto& spec = expansion.spec;
  const int order = spec.input_order();
  json steps = json::array();
  for (const auto& s : spec.steps) {
    steps.push_back({{"l", s.l}, {"n", s.n}, {"sign", s.sign == CollisionSign::plus ? "+" : "-"}});
  }
  json terms = json::array();
  for (const auto& t : expansion.terms) {
    auto output_name = [&](int node) { return t.node_names[node]; };
    json a = json::array(), b = json::array(), groups = json::object(), untouched = json::array();
    for (int r : t.set_a) a.push_back("xi" + std::to_string(r));
    for (int r : t.set_b) b.push_back("xi'" + std::to_string(r));
    for (int r = 0; r < 2 * t.k; ++r) {
      if (t.groups[r].empty()) continue;
      json g = json::array();
      for (const auto& s : t.groups[r]) g.push_back({{"symbol", leaf_name(s.symbol, order)}, {"epsilon", s.epsilon}});
      groups[output_name(r)] = {{"symbols", g}, {"decomposition", format_form(t.node_forms[r], order)}};
    }
    for (int r : t.untouched) {
      const auto it = std::find(t.leaf_nodes.begin(), t.leaf_nodes.end(), r);
      untouched.push_back({{"slot", output_name(r)}, {"symbol", leaf_name(static_cast<int>(it - t.leaf_nodes.begin()), order)}});
    }
    json raw = json::array();
    for (const auto& q : t.raw_h) {
      json f = json::array();
      for (int node : q) f.push_back(format_form(t.node_forms[node], order));
      raw.push_back(f);
    }
    json reduced = json::array();
    for (int r = 0; r < 2 * t.k; ++r) {
      if (t.groups[r].empty()) continue;
      json f = json::array({output_name(r)});
      for (const auto& s : t.groups[r]) f.push_back(leaf_name(s.symbol, order));
      reduced.push_back(f);
    }
    json gaps = json::array();
    for (const auto& g : t.gap_nodes) {
      json e = json::array();
      for (const auto& [node, sign] : g) e.push_back({{"sign", sign}, {"frequency", format_form(t.node_forms[node], order)}});
      gaps.push_back(e);
    }
    json term = {{"A", a},           {"B", b},         {"groups", groups}, {"untouched", untouched},
                 {"h_raw", raw},     {"h_reduced", reduced}, {"phase_energies", gaps}};
    if (t.difference) {
      json f = json::array();
      for (const auto& sf : *t.difference) f.push_back({{"sign", sf.sign}, {"form", format_form(sf.form, order)}});
      auto names = [&](const std::vector<int>& part) {
        json out = json::array();
        for (int leaf : part) out.push_back(leaf_name(leaf, order));
        return out;
      };
      term["F"] = f;
      term[t.first_plus ? "nu" : "mu"] = format_form(*t.nu, order);
      term[t.first_plus ? "nu_prime" : "mu_prime"] = format_form(*t.nu_prime, order);
      term["partition"] = {names(t.part1), names(t.part2), names(t.part3)};
    }
    terms.push_back(std::move(term));
  }
  return {{"k", spec.k}, {"j", spec.j()}, {"steps", steps}, {"terms", terms}};
}

NonresonantResult nonresonant_check(const HierarchyState& state, double alpha) {
  NonresonantResult out;
  const auto& lat = state.lattice();
  for (int m = 1; m <= state.k_max(); ++m) {
    const auto* g = state.level(m);
    if (!g) continue;
    std::vector<LatticeIndex> digits(static_cast<std::size_t>(2 * m));
    bool ok = true;
    g->for_each_nonzero([&](TensorKey key, cplx) {
      if (!ok) return;
      decode_key(key, lat.size(), 2 * m, digits);
      for (int s = 0; s + 1 < 2 * m; ++s) {
        if (!(lat.energy(digits[s]) > lat.energy(digits[s + 1]))) {
          ok = false;
          break;
        }
      }
      if (!ok && out.pass) {
        out.pass = false;
        out.witness_level = m;
        std::ostringstream w;
        w << '(';
        for (int s = 0; s < 2 * m; ++s) {
          const auto& z = lat.freq_of(digits[s]);
          (s < m ? out.witness_unprimed : out.witness_primed).push_back(z);
          w << (s == 0 ? "" : (s == m ? "; " : ", ")) << to_string(z, lat.dim());
        }
        w << ')';
        out.witness = w.str();
      }
    });
    const double norm = h_alpha_norm(*g, alpha);
    if (norm > 0.0) out.c1 = std::max(out.c1, std::pow(norm, 1.0 / m));
    if (!out.pass) break;
  }
  return out;
}

HierarchyState nonresonant_sample(const LatticePtr& lattice, int m_max, std::uint64_t seed, double target_c1,
                                  double alpha, int entries_per_level) {
  if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
  if (!(target_c1 > 0.0)) throw std::invalid_argument("target C_1 must be positive");
  std::map<int, std::vector<LatticeIndex>> shells;
  for (LatticeIndex i = 0; i < lattice->size(); ++i) shells[lattice->energy(i)].push_back(i);
  std::vector<int> moduli;
  for (const auto& [e, pts] : shells) moduli.push_back(e);
  if (static_cast<int>(moduli.size()) < 2 * m_max) {
    throw std::invalid_argument("lattice has " + std::to_string(moduli.size()) + " distinct moduli, but m_max=" +
                                std::to_string(m_max) + " needs " + std::to_string(2 * m_max));
  }
  HierarchyState state(lattice, m_max);
  std::uint64_t counter = 0;
  auto draw = [&] { return CounterRng::bits(seed, streams::sampler, counter++); };
  for (int m = 1; m <= m_max; ++m) {
    std::vector<SparseEntry> entries;
    std::set<TensorKey> seen;
    std::vector<LatticeIndex> digits(static_cast<std::size_t>(2 * m));
    for (int e = 0; e < entries_per_level; ++e) {
      std::vector<int> pool = moduli;
      // partial Fisher-Yates for 2m distinct shells
      for (int i = 0; i < 2 * m; ++i) {
        const auto pick = i + static_cast<int>(draw() % (pool.size() - static_cast<std::size_t>(i)));
        std::swap(pool[i], pool[pick]);
      }
      std::vector<int> chosen(pool.begin(), pool.begin() + 2 * m);
      std::sort(chosen.rbegin(), chosen.rend());
      for (int s = 0; s < 2 * m; ++s) {
        const auto& pts = shells[chosen[s]];
        digits[s] = pts[draw() % pts.size()];
      }
      const TensorKey key = encode_key(digits, lattice->size());
      if (!seen.insert(key).second) continue;
      const std::uint64_t c = counter++;
      entries.push_back({key, cplx(CounterRng::normal(seed, streams::sampler, 2 * c),
                                   CounterRng::normal(seed, streams::sampler, 2 * c + 1))});
    }
    DensityMatrix g = DensityMatrix::from_entries(lattice, m, std::move(entries));
    const double u = 0.5 + 0.5 * CounterRng::uniform(seed, streams::sampler ^ 0xffULL, static_cast<std::uint64_t>(m));
    const double norm = h_alpha_norm(g, alpha);
    if (norm > 0.0) g *= std::pow(target_c1, m) * u / norm;
    state.set_level(m, g.to_storage(DensityMatrix::preferred_storage(*lattice, m)));
  }
  return state;
}

}  // namespace gph
