#pragma once

#include "carnot/lie_core.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace carnot {

/// Malformed or unreadable group-spec file.
class GroupFileError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parses a group-spec JSON document:
///   {"name": str, "step": int, "layer_dims": [int],
///    "brackets": [{"i": int, "j": int, "coeffs": {"k": float}}],
///    "metric_first_layer": "identity" | [[float]]}
/// Indices are 1-based with i < j; each pair at most once; unknown keys are
/// rejected. The returned spec keeps the metric as given.
CarnotSpec parse_group_json(std::string_view text);

/// Loads a group from a file path. If no such file exists and the stem names
/// a built-in group (heisenberg1, heisenberg2, engel, abelian3, step2-nonfat),
/// the built-in definition is used.
CarnotSpec load_group(const std::string& path_or_name);

std::vector<std::string> builtin_group_names();
std::string builtin_group_json(const std::string& name);

std::string group_to_json(const CarnotSpec& spec);

}  // namespace carnot
