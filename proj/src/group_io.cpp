#include "carnot/group_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace carnot {

using nlohmann::json;

namespace {

const std::map<std::string, std::string>& builtins() {
  static const std::map<std::string, std::string> table = {
      {"heisenberg1", R"({
  "name": "heisenberg1",
  "step": 2,
  "layer_dims": [2, 1],
  "brackets": [{"i": 1, "j": 2, "coeffs": {"3": 1.0}}],
  "metric_first_layer": "identity"
})"},
      {"heisenberg2", R"({
  "name": "heisenberg2",
  "step": 2,
  "layer_dims": [4, 1],
  "brackets": [
    {"i": 1, "j": 2, "coeffs": {"5": 1.0}},
    {"i": 3, "j": 4, "coeffs": {"5": 1.0}}
  ],
  "metric_first_layer": "identity"
})"},
      {"engel", R"({
  "name": "engel",
  "step": 3,
  "layer_dims": [2, 1, 1],
  "brackets": [
    {"i": 1, "j": 2, "coeffs": {"3": 1.0}},
    {"i": 1, "j": 3, "coeffs": {"4": 1.0}}
  ],
  "metric_first_layer": "identity"
})"},
      {"abelian3", R"({
  "name": "abelian3",
  "step": 1,
  "layer_dims": [3],
  "brackets": [],
  "metric_first_layer": "identity"
})"},
      {"step2-nonfat", R"({
  "name": "step2-nonfat",
  "step": 2,
  "layer_dims": [3, 1],
  "brackets": [{"i": 1, "j": 2, "coeffs": {"4": 1.0}}],
  "metric_first_layer": "identity"
})"},
  };
  return table;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw GroupFileError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw GroupFileError("missing key '" + std::string(key) + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw GroupFileError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

}  // namespace

CarnotSpec parse_group_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GroupFileError(std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw GroupFileError("group spec must be a JSON object");
  reject_unknown_keys(doc, {"name", "step", "layer_dims", "brackets", "metric_first_layer"}, "group spec");

  const auto name = require<std::string>(doc, "name", "group spec");
  const auto step = require<int>(doc, "step", "group spec");
  const auto dims = require<std::vector<int>>(doc, "layer_dims", "group spec");
  if (step < 1) throw GroupFileError("step must be >= 1");
  if (static_cast<int>(dims.size()) != step) {
    throw GroupFileError("layer_dims has " + std::to_string(dims.size()) + " entries but step is " +
                         std::to_string(step));
  }
  int n = 0;
  for (int d : dims) {
    if (d <= 0) throw GroupFileError("layer dimensions must be positive");
    n += d;
  }

  std::vector<BracketTerm> terms;
  std::set<std::pair<int, int>> seen;
  const json brackets = doc.contains("brackets") ? doc.at("brackets") : json::array();
  if (!brackets.is_array()) throw GroupFileError("'brackets' must be an array");
  for (std::size_t idx = 0; idx < brackets.size(); ++idx) {
    const auto& b = brackets[idx];
    const std::string where = "brackets[" + std::to_string(idx) + "]";
    if (!b.is_object()) throw GroupFileError(where + " must be an object");
    reject_unknown_keys(b, {"i", "j", "coeffs"}, where);
    const int i = require<int>(b, "i", where);
    const int j = require<int>(b, "j", where);
    if (i < 1 || j < 1 || i > n || j > n) throw GroupFileError(where + ": index out of range 1.." + std::to_string(n));
    if (i >= j) throw GroupFileError(where + ": pairs must be listed with i < j");
    if (!seen.insert({i, j}).second) {
      throw GroupFileError(where + ": pair (" + std::to_string(i) + "," + std::to_string(j) + ") listed twice");
    }
    if (!b.contains("coeffs") || !b.at("coeffs").is_object()) throw GroupFileError(where + ": 'coeffs' must be an object");
    for (const auto& [kstr, val] : b.at("coeffs").items()) {
      int k = 0;
      try {
        std::size_t pos = 0;
        k = std::stoi(kstr, &pos);
        if (pos != kstr.size()) throw std::invalid_argument(kstr);
      } catch (const std::exception&) {
        throw GroupFileError(where + ": coefficient key '" + kstr + "' is not an integer");
      }
      if (k < 1 || k > n) throw GroupFileError(where + ": coefficient index " + kstr + " out of range");
      if (!val.is_number()) throw GroupFileError(where + ": coefficient for '" + kstr + "' must be a number");
      terms.push_back({i - 1, j - 1, k - 1, val.get<double>()});
    }
  }

  const int m = dims.front();
  Matrix metric = Matrix::Identity(m, m);
  if (doc.contains("metric_first_layer")) {
    const auto& g = doc.at("metric_first_layer");
    if (g.is_string()) {
      if (g.get<std::string>() != "identity") throw GroupFileError("metric_first_layer must be \"identity\" or a matrix");
    } else if (g.is_array()) {
      if (static_cast<int>(g.size()) != m) throw GroupFileError("metric_first_layer must be " + std::to_string(m) + "x" + std::to_string(m));
      for (int r = 0; r < m; ++r) {
        if (!g[r].is_array() || static_cast<int>(g[r].size()) != m) {
          throw GroupFileError("metric_first_layer must be " + std::to_string(m) + "x" + std::to_string(m));
        }
        for (int c = 0; c < m; ++c) {
          if (!g[r][c].is_number()) throw GroupFileError("metric_first_layer entries must be numbers");
          metric(r, c) = g[r][c].get<double>();
        }
      }
    } else {
      throw GroupFileError("metric_first_layer must be \"identity\" or a matrix");
    }
  }

  try {
    return CarnotSpec(name, dims, std::move(terms), metric);
  } catch (const std::invalid_argument& e) {
    throw GroupFileError(e.what());
  }
}

CarnotSpec load_group(const std::string& path_or_name) {
  namespace fs = std::filesystem;
  const fs::path p(path_or_name);
  std::error_code ec;
  if (fs::is_regular_file(p, ec)) {
    std::ifstream in(p);
    if (!in) throw GroupFileError("cannot open " + path_or_name);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_group_json(ss.str());
  }
  const std::string stem = p.stem().string();
  const auto& table = builtins();
  if (auto it = table.find(stem); it != table.end()) return parse_group_json(it->second);
  throw GroupFileError("no such group file or built-in group: " + path_or_name);
}

std::vector<std::string> builtin_group_names() {
  std::vector<std::string> names;
  for (const auto& [k, _] : builtins()) names.push_back(k);
  return names;
}

std::string builtin_group_json(const std::string& name) {
  const auto& table = builtins();
  auto it = table.find(name);
  if (it == table.end()) throw GroupFileError("unknown built-in group: " + name);
  return it->second;
}

std::string group_to_json(const CarnotSpec& spec) {
  json doc;
  doc["name"] = spec.name();
  doc["step"] = spec.step();
  doc["layer_dims"] = spec.layer_dims();
  std::map<std::pair<int, int>, json> pairs;
  for (const auto& b : spec.brackets()) pairs[{b.i, b.j}][std::to_string(b.k + 1)] = b.coeff;
  json arr = json::array();
  for (const auto& [ij, coeffs] : pairs) arr.push_back({{"i", ij.first + 1}, {"j", ij.second + 1}, {"coeffs", coeffs}});
  doc["brackets"] = arr;
  if (spec.has_identity_metric()) {
    doc["metric_first_layer"] = "identity";
  } else {
    json g = json::array();
    for (int r = 0; r < spec.rank(); ++r) {
      json row = json::array();
      for (int c = 0; c < spec.rank(); ++c) row.push_back(spec.first_layer_metric()(r, c));
      g.push_back(row);
    }
    doc["metric_first_layer"] = g;
  }
  return doc.dump(2);
}

}  // namespace carnot
