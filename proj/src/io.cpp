#include "gph/io.hpp"

#include "gph/nls.hpp"

#include <array>
#include <fstream>
#include <set>
#include <string>

namespace gph {

using nlohmann::json;

namespace {

json frequency_json(const FrequencyLattice& lattice, LatticeIndex i) {
  const auto& z = lattice.freq_of(i);
  json out = json::array();
  for (int c = 0; c < lattice.dim(); ++c) out.push_back(z[c]);
  return out;
}

LatticeIndex parse_frequency(const json& j, const FrequencyLattice& lattice) {
  if (!j.is_array() || static_cast<int>(j.size()) != lattice.dim()) {
    throw FormatError("frequency must be an integer array of length d=" + std::to_string(lattice.dim()));
  }
  Frequency z{};
  for (int c = 0; c < lattice.dim(); ++c) {
    if (!j[c].is_number_integer()) throw FormatError("frequency coordinates must be integers");
    z[c] = j[c].get<int>();
  }
  const auto idx = lattice.find(z);
  if (!idx) throw FormatError("frequency " + to_string(z, lattice.dim()) + " lies outside the lattice box");
  return *idx;
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

LatticePtr lattice_for(const json& j, const LatticePtr& expected) {
  const int d = require<int>(j, "d");
  const int m = require<int>(j, "M");
  if (expected) {
    if (expected->dim() != d || expected->cutoff() != m) {
      throw FormatError("lattice mismatch: file has d=" + std::to_string(d) + ", M=" + std::to_string(m) +
                        ", expected d=" + std::to_string(expected->dim()) + ", M=" + std::to_string(expected->cutoff()));
    }
    return expected;
  }
  try {
    return build_lattice(d, m);
  } catch (const LatticeError& e) {
    throw FormatError(e.what());
  }
}

}  // namespace

json to_json(const DensityMatrix& gamma) {
  const auto& lat = gamma.lattice();
  const int k = gamma.order();
  json entries = json::array();
  std::array<LatticeIndex, kMaxSlots> digits{};
  gamma.for_each_nonzero([&](TensorKey key, cplx v) {
    decode_key(key, lat.size(), 2 * k, digits);
    json xi = json::array(), xip = json::array();
    for (int s = 0; s < k; ++s) {
      xi.push_back(frequency_json(lat, digits[s]));
      xip.push_back(frequency_json(lat, digits[k + s]));
    }
    entries.push_back({{"xi", std::move(xi)}, {"xip", std::move(xip)}, {"re", v.real()}, {"im", v.imag()}});
  });
  return {{"d", lat.dim()}, {"M", lat.cutoff()}, {"k", k}, {"format", "coo"}, {"entries", std::move(entries)}};
}

json to_json(const HierarchyState& state) {
  json levels = json::array();
  for (int k = 1; k <= state.k_max(); ++k) {
    if (const auto* g = state.level(k)) levels.push_back(to_json(*g));
  }
  return {{"d", state.lattice().dim()},
          {"M", state.lattice().cutoff()},
          {"K_max", state.k_max()},
          {"format", "hierarchy"},
          {"levels", std::move(levels)}};
}

DensityMatrix density_from_json(const json& j, const LatticePtr& expected) {
  if (!j.is_object()) throw FormatError("density matrix must be a JSON object");
  if (require<std::string>(j, "format") != "coo") throw FormatError("unsupported format, expected \"coo\"");
  LatticePtr lat = lattice_for(j, expected);
  const int k = require<int>(j, "k");
  if (k < 1 || 2 * k > kMaxSlots) throw FormatError("order k out of range");
  const json& entries = j.contains("entries") ? j.at("entries") : json::array();
  if (!entries.is_array()) throw FormatError("'entries' must be an array");

  std::vector<SparseEntry> coo;
  coo.reserve(entries.size());
  std::set<TensorKey> seen;
  std::vector<LatticeIndex> digits(static_cast<std::size_t>(2 * k));
  for (const auto& e : entries) {
    const json xi = require<json>(e, "xi");
    const json xip = require<json>(e, "xip");
    if (!xi.is_array() || !xip.is_array() || static_cast<int>(xi.size()) != k || static_cast<int>(xip.size()) != k) {
      throw FormatError("index tuple arity does not match k=" + std::to_string(k));
    }
    for (int s = 0; s < k; ++s) {
      digits[s] = parse_frequency(xi[s], *lat);
      digits[k + s] = parse_frequency(xip[s], *lat);
    }
    const TensorKey key = encode_key(digits, lat->size());
    if (!seen.insert(key).second) throw FormatError("duplicate index tuple in entries");
    coo.push_back({key, cplx(require<double>(e, "re"), require<double>(e, "im"))});
  }
  DensityMatrix sparse = DensityMatrix::from_entries(lat, k, std::move(coo));
  return sparse.to_storage(DensityMatrix::preferred_storage(*lat, k));
}

HierarchyState hierarchy_from_json(const json& j, const LatticePtr& expected) {
  if (!j.is_object()) throw FormatError("hierarchy must be a JSON object");
  if (require<std::string>(j, "format") != "hierarchy") throw FormatError("unsupported format, expected \"hierarchy\"");
  LatticePtr lat = lattice_for(j, expected);
  const int k_max = require<int>(j, "K_max");
  if (k_max < 1) throw FormatError("K_max must be >= 1");
  HierarchyState state(lat, k_max);
  for (const auto& level : require<json>(j, "levels")) {
    DensityMatrix g = density_from_json(level, lat);
    if (g.order() > k_max) throw FormatError("level order exceeds K_max");
    if (state.level(g.order())) throw FormatError("level " + std::to_string(g.order()) + " appears twice");
    state.set_level(g.order(), std::move(g));
  }
  return state;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

void save(const DensityMatrix& gamma, const std::filesystem::path& path) { write_json_file(to_json(gamma), path); }
void save(const HierarchyState& state, const std::filesystem::path& path) { write_json_file(to_json(state), path); }

DensityMatrix load_density(const std::filesystem::path& path, const LatticePtr& expected) {
  return density_from_json(read_json_file(path), expected);
}

HierarchyState load_hierarchy(const std::filesystem::path& path, const LatticePtr& expected) {
  return hierarchy_from_json(read_json_file(path), expected);
}

// {"d":1,"M":8,"format":"phi","t":0.0,"coefficients":[{"xi":[-8],"re":..,"im":..}, ...]}
json nls_to_json(const NlsState& state) {
  const auto& lat = *state.lattice;
  json coeffs = json::array();
  for (LatticeIndex i = 0; i < lat.size(); ++i) {
    const cplx v = state.coefficients[static_cast<std::size_t>(i)];
    if (v == cplx{}) continue;
    coeffs.push_back({{"xi", frequency_json(lat, i)}, {"re", v.real()}, {"im", v.imag()}});
  }
  return {{"d", lat.dim()}, {"M", lat.cutoff()}, {"format", "phi"}, {"t", state.time}, {"coefficients", coeffs}};
}

NlsState nls_from_json(const json& j) {
  if (require<std::string>(j, "format") != "phi") throw FormatError("unsupported format, expected \"phi\"");
  NlsState out;
  out.lattice = lattice_for(j, nullptr);
  out.time = j.contains("t") ? require<double>(j, "t") : 0.0;
  out.coefficients.assign(static_cast<std::size_t>(out.lattice->size()), cplx{});
  std::set<LatticeIndex> seen;
  for (const auto& e : require<json>(j, "coefficients")) {
    const LatticeIndex i = parse_frequency(require<json>(e, "xi"), *out.lattice);
    if (!seen.insert(i).second) throw FormatError("duplicate coefficient for frequency " + to_string(out.lattice->freq_of(i), out.lattice->dim()));
    out.coefficients[static_cast<std::size_t>(i)] = cplx(require<double>(e, "re"), require<double>(e, "im"));
  }
  return out;
}

}  // namespace gph
