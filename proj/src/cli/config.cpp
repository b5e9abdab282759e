#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "lpstab/cli/checks.hpp"
#include "lpstab/cli/run.hpp"
#include "lpstab/parabolic_solver.hpp"

namespace lpstab::cli {

namespace {

std::string located(const std::string& source, int line, const std::string& what) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ":" << line;
  os << ": " << what;
  return os.str();
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    throw ConfigError(source_, node.Mark().line + 1, what);
  }

  void require_map(const YAML::Node& node, const std::string& name,
                   const std::set<std::string>& allowed) const {
    if (!node.IsMap()) fail(node, "'" + name + "' must be a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + name);
    }
  }

  template <class T>
  void read(const YAML::Node& parent, const char* key, T& out) const {
    const YAML::Node node = parent[key];
    if (!node) return;
    if (!node.IsScalar()) fail(node, std::string("'") + key + "' must be a scalar");
    try {
      out = node.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(node, std::string("'") + key + "' has the wrong type: '" + node.Scalar() + "'");
    }
  }

  template <class T>
  void read_list(const YAML::Node& parent, const char* key, std::vector<T>& out) const {
    const YAML::Node node = parent[key];
    if (!node) return;
    if (!node.IsSequence() || node.size() == 0) fail(node, std::string("'") + key + "' must be a non-empty list");
    out.clear();
    for (const auto& item : node) {
      try {
        out.push_back(item.as<T>());
      } catch (const YAML::BadConversion&) {
        fail(item, std::string("'") + key + "' entry has the wrong type: '" + item.Scalar() + "'");
      }
    }
  }

 private:
  std::string source_;
};

bool power_of_two(int n) { return n >= 16 && (n & (n - 1)) == 0; }

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(located(source, line, what)), line_(line) {}

void Options::validate(const std::string& source) const {
  auto bad = [&](const std::string& what) { throw ConfigError(source, 0, what); };
  if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
    bad("unknown subcommand '" + subcommand + "'");
  }
  if (!power_of_two(grid)) bad("grid must be a power of two >= 16");
  if (!power_of_two(scan_grid)) bad("scan.grid must be a power of two >= 16");
  for (int g : energy_grids) {
    if (!power_of_two(g)) bad("energy.grids entries must be powers of two >= 16");
  }
  for (int st : energy_steps) {
    if (st < 1) bad("energy.steps entries must be positive");
  }
  for (const auto& f : energy_families) family_from_string(f);
  for (const auto& [name, v] : tolerance_overrides) {
    if (!checks::default_tolerances().count(name)) bad("unknown tolerance '" + name + "'");
    if (!(v > 0.0)) bad("tolerance '" + name + "' must be positive");
  }
  if (!(s > 0.0 && s < 1.0)) bad("weight_params.s must lie in (0, 1)");
  if (!(lambda > 1.0)) bad("weight_params.lambda must exceed 1");
  if (!(alpha1 > 0.0)) bad("weight_params.alpha1 must be positive");
  if (!(gamma > 0.0)) bad("weight_params.gamma must be positive");
  if (!(T > 0.0)) bad("solver.T must be positive");
  if (steps < 1) bad("solver.steps must be positive");
  scheme_from_string(scheme);
  if (m < 0) bad("paraproduct.m must be nonnegative");
  if (trials < 1 || fields < 1) bad("paraproduct.trials and paraproduct.fields must be positive");
  if (samples < 2) bad("weights.samples must be at least 2");
  if (nu_max < 0 || nu_max > 26) bad("mollify.nu_max must lie in [0, 26]");
  if (!(scan_T > 0.0) || scan_steps < 1 || scan_scales < 4 || !(scan_datum_width > 0.0)) {
    bad("scan: T, steps, datum_width must be positive and scales >= 4");
  }
  if (datum != "random" && datum.rfind("gaussian:", 0) != 0 && datum.rfind("cos:", 0) != 0) {
    bad("solver.datum must be random, gaussian:<width> or cos:<k>");
  }
  // Builds the family once so that ellipticity and the declared constants are checked here.
  FamilyParams p = coefficient_params;
  if (!p.count("T")) p["T"] = T;
  builtin_family(family_from_string(coefficient), p);
}

Options parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, e.msg);
  }
  Options o;
  if (!root || root.IsNull()) return o;
  const Reader r(source);
  r.require_map(root, "the top level",
                {"subcommand", "seed", "grid", "output_dir", "coefficient", "weight_params", "solver",
                 "paraproduct", "weights", "mollify", "energy", "scan", "tolerance_overrides"});
  r.read(root, "subcommand", o.subcommand);
  r.read(root, "seed", o.seed);
  r.read(root, "grid", o.grid);
  r.read(root, "output_dir", o.output_dir);
  if (root["grid"] && !power_of_two(o.grid)) r.fail(root["grid"], "grid must be a power of two >= 16");

  if (const auto c = root["coefficient"]) {
    r.require_map(c, "coefficient", {"tag", "params"});
    r.read(c, "tag", o.coefficient);
    try {
      family_from_string(o.coefficient);
    } catch (const std::exception& e) {
      r.fail(c["tag"] ? c["tag"] : c, e.what());
    }
    if (const auto p = c["params"]) {
      if (!p.IsMap()) r.fail(p, "'params' must be a mapping");
      for (const auto& kv : p) {
        const auto key = kv.first.as<std::string>();
        double v = 0.0;
        try {
          v = kv.second.as<double>();
        } catch (const YAML::BadConversion&) {
          r.fail(kv.second, "coefficient parameter '" + key + "' must be a number");
        }
        if (key == "kappa" && !(v > 0.0 && v < 1.0)) {
          r.fail(kv.second, "ellipticity invariant violated: kappa must lie in (0, 1), got " + kv.second.Scalar());
        }
        o.coefficient_params[key] = v;
      }
    }
  }
  if (const auto w = root["weight_params"]) {
    r.require_map(w, "weight_params", {"s", "lambda", "alpha1", "gamma"});
    r.read(w, "s", o.s);
    r.read(w, "lambda", o.lambda);
    r.read(w, "alpha1", o.alpha1);
    r.read(w, "gamma", o.gamma);
  }
  if (const auto sv = root["solver"]) {
    r.require_map(sv, "solver", {"T", "steps", "scheme", "datum"});
    r.read(sv, "T", o.T);
    r.read(sv, "steps", o.steps);
    r.read(sv, "scheme", o.scheme);
    r.read(sv, "datum", o.datum);
  }
  if (const auto pp = root["paraproduct"]) {
    r.require_map(pp, "paraproduct", {"m", "trials", "fields"});
    r.read(pp, "m", o.m);
    r.read(pp, "trials", o.trials);
    r.read(pp, "fields", o.fields);
  }
  if (const auto wt = root["weights"]) {
    r.require_map(wt, "weights", {"samples"});
    r.read(wt, "samples", o.samples);
  }
  if (const auto ml = root["mollify"]) {
    r.require_map(ml, "mollify", {"nu_max"});
    r.read(ml, "nu_max", o.nu_max);
  }
  if (const auto en = root["energy"]) {
    r.require_map(en, "energy", {"families", "grids", "steps"});
    r.read_list(en, "families", o.energy_families);
    r.read_list(en, "grids", o.energy_grids);
    r.read_list(en, "steps", o.energy_steps);
  }
  if (const auto sc = root["scan"]) {
    r.require_map(sc, "scan", {"grid", "T", "steps", "scales", "datum_width"});
    r.read(sc, "grid", o.scan_grid);
    r.read(sc, "T", o.scan_T);
    r.read(sc, "steps", o.scan_steps);
    r.read(sc, "scales", o.scan_scales);
    r.read(sc, "datum_width", o.scan_datum_width);
  }
  if (const auto to = root["tolerance_overrides"]) {
    if (!to.IsMap()) r.fail(to, "'tolerance_overrides' must be a mapping");
    for (const auto& kv : to) {
      const auto key = kv.first.as<std::string>();
      if (!checks::default_tolerances().count(key)) r.fail(kv.first, "unknown tolerance '" + key + "'");
      double v = 0.0;
      try {
        v = kv.second.as<double>();
      } catch (const YAML::BadConversion&) {
        r.fail(kv.second, "tolerance '" + key + "' must be a number");
      }
      if (!(v > 0.0)) r.fail(kv.second, "tolerance '" + key + "' must be positive");
      o.tolerance_overrides[key] = v;
    }
  }

  // Domain errors that depend on several keys are reported at the key that
  // most plausibly caused them.
  try {
    o.validate(source);
  } catch (const ConfigError& e) {
    throw;
  } catch (const std::exception& e) {
    const auto c = root["coefficient"];
    YAML::Node at = c ? (c["params"] ? c["params"] : c) : root;
    throw ConfigError(source, at.Mark().line + 1, e.what());
  }
  return o;
}

Options load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

nlohmann::ordered_json to_json(const Options& o) {
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : o.coefficient_params) params[k] = v;
  nlohmann::ordered_json overrides = nlohmann::ordered_json::object();
  for (const auto& [k, v] : o.tolerance_overrides) overrides[k] = v;
  return {{"subcommand", o.subcommand},
          {"seed", o.seed},
          {"grid", o.grid},
          {"coefficient", {{"tag", o.coefficient}, {"params", params}}},
          {"weight_params", {{"s", o.s}, {"lambda", o.lambda}, {"alpha1", o.alpha1}, {"gamma", o.gamma}}},
          {"solver", {{"T", o.T}, {"steps", o.steps}, {"scheme", o.scheme}, {"datum", o.datum}}},
          {"paraproduct", {{"m", o.m}, {"trials", o.trials}, {"fields", o.fields}}},
          {"weights", {{"samples", o.samples}}},
          {"mollify", {{"nu_max", o.nu_max}}},
          {"energy", {{"families", o.energy_families}, {"grids", o.energy_grids}, {"steps", o.energy_steps}}},
          {"scan", {{"grid", o.scan_grid}, {"T", o.scan_T}, {"steps", o.scan_steps},
                    {"scales", o.scan_scales}, {"datum_width", o.scan_datum_width}}},
          {"tolerance_overrides", overrides}};
}

}  // namespace lpstab::cli
