#pragma once

#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "gph/tensor.hpp"

namespace gph {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// COO JSON layout:
//   {"d":1,"M":2,"k":2,"format":"coo",
//    "entries":[{"xi":[[1],[0]],"xip":[[-1],[2]],"re":0.5,"im":-0.25}, ...]}
// Hierarchy files: {"d","M","K_max","format":"hierarchy","levels":[<coo>, ...]}.
// Doubles are written with round-trip precision.

nlohmann::json to_json(const DensityMatrix& gamma);
nlohmann::json to_json(const HierarchyState& state);

/// When `expected` is given the file's (d, M) must match it.
DensityMatrix density_from_json(const nlohmann::json& j, const LatticePtr& expected = nullptr);
HierarchyState hierarchy_from_json(const nlohmann::json& j, const LatticePtr& expected = nullptr);

void save(const DensityMatrix& gamma, const std::filesystem::path& path);
void save(const HierarchyState& state, const std::filesystem::path& path);
DensityMatrix load_density(const std::filesystem::path& path, const LatticePtr& expected = nullptr);
HierarchyState load_hierarchy(const std::filesystem::path& path, const LatticePtr& expected = nullptr);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace gph
