#include "polaron_app/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "polaron/errors.hpp"

namespace polaron::app {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

bool parse_real(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && !std::isnan(out);
}

const KeySpec* find_spec(const std::string& section, const std::string& key) {
  for (const auto& spec : schema()) {
    if (spec.section == section && spec.key == key) return &spec;
  }
  return nullptr;
}

[[noreturn]] void bad_value(const KeySpec& spec, const std::string& value, const std::string& why) {
  throw ConfigError(spec.section + "." + spec.key + ": " + why + " (got '" + value + "')");
}

std::vector<double> expand_list(const KeySpec& spec, const std::string& value) {
  std::vector<double> out;
  std::stringstream items(value);
  std::string item;
  while (std::getline(items, item, ',')) {
    item = trim(item);
    if (item.empty()) bad_value(spec, value, "empty list entry");
    if (item.find(':') != std::string::npos) {
      // start:stop:step, inclusive of stop up to rounding
      double a = 0.0, b = 0.0, h = 0.0;
      std::stringstream parts(item);
      std::string pa, pb, ph;
      if (!std::getline(parts, pa, ':') || !std::getline(parts, pb, ':') ||
          !std::getline(parts, ph, ':') || !parse_real(trim(pa), a) || !parse_real(trim(pb), b) ||
          !parse_real(trim(ph), h) || !(h > 0.0) || !(b >= a) || !std::isfinite(b)) {
        bad_value(spec, value, "range must read start:stop:step with step > 0");
      }
      const auto count = static_cast<long>(std::floor((b - a) / h + 1e-9)) + 1;
      if (count > 100000) bad_value(spec, value, "range too long");
      for (long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * h);
      continue;
    }
    double x = 0.0;
    if (!parse_real(item, x)) bad_value(spec, value, "expected a number");
    out.push_back(x);
  }
  if (out.empty()) bad_value(spec, value, "list must not be empty");
  return out;
}

std::string canonical(const KeySpec& spec, const std::string& raw) {
  const std::string value = trim(raw);
  switch (spec.type) {
    case ValueType::real: {
      double x = 0.0;
      if (!parse_real(value, x)) bad_value(spec, value, "expected a number");
      return format_real(x);
    }
    case ValueType::integer: {
      long long x = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), x);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        bad_value(spec, value, "expected an integer");
      }
      return std::to_string(x);
    }
    case ValueType::boolean: {
      std::string lower = value;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (lower == "true" || lower == "yes" || lower == "1" || lower == "on") return "true";
      if (lower == "false" || lower == "no" || lower == "0" || lower == "off") return "false";
      bad_value(spec, value, "expected true or false");
    }
    case ValueType::text: {
      if (!spec.choices.empty() &&
          std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string allowed;
        for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : "|") + c;
        bad_value(spec, value, "expected one of " + allowed);
      }
      if (value.empty()) bad_value(spec, value, "must not be empty");
      return value;
    }
    case ValueType::real_list: {
      std::string out;
      for (double x : expand_list(spec, value)) out += (out.empty() ? "" : ",") + format_real(x);
      return out;
    }
  }
  return value;
}

}  // namespace

const std::vector<KeySpec>& schema() {
  using enum ValueType;
  static const std::vector<KeySpec> keys = {
      {"model", "c", real, "1", "speed of sound", {}},
      {"model", "xi", real, "1", "quadratic dispersion coefficient", {}},
      {"model", "g", real, "0.2", "coupling constant", {}},
      {"model", "kappa", real, "0.1", "infrared phonon mass", {}},
      {"model", "lambda", real, "2", "ultraviolet cutoff (inf for none)", {}},
      {"grid", "kind", text, "cartesian", "cartesian or spherical_m0", {"cartesian", "spherical_m0"}},
      {"grid", "kmax", real, "2", "momentum box half-width or ball radius", {}},
      {"grid", "n", integer, "4", "cartesian points per axis", {}},
      {"grid", "n_radial", integer, "8", "spherical radial nodes", {}},
      {"grid", "n_angular", integer, "8", "spherical polar nodes", {}},
      {"grid", "exclude_origin", text, "auto", "auto (odd n), true or false", {"auto", "true", "false"}},
      {"fock", "nmax", integer, "2", "maximal phonon number", {}},
      {"solver", "tol", real, "1e-09", "Lanczos residual tolerance", {}},
      {"solver", "max_iter", integer, "20000", "matrix-vector product budget", {}},
      {"solver", "seed", integer, "0", "start-vector seed", {}},
      {"solver", "krylov_dim", integer, "120", "Lanczos vectors per restart", {}},
      {"solve", "P", real, "0", "total momentum along z", {}},
      {"scan", "P", real_list, "0:0.9:0.1", "momenta along z, ascending", {}},
      {"counterterm", "order", text, "sigma1", "sigma1 or sigma2", {"sigma1", "sigma2"}},
      {"counterterm", "lambdas", real_list, "200,400,800,1600", "cutoffs", {}},
      {"counterterm", "rel_tol", real, "1e-08", "quadrature relative tolerance", {}},
      {"uv", "lambdas", real_list, "0.5,1,2", "ascending cutoffs (grid.kmax must cover them)", {}},
      {"uv", "P", real, "0", "total momentum along z", {}},
      {"uv", "rel_tol", real, "1e-06", "quadrature relative tolerance for sigma2", {}},
      {"ir", "kappas", real_list, "0.08,0.04,0.02,0.01", "descending phonon masses", {}},
      {"ir", "P", real, "0", "total momentum along z", {}},
      {"gap", "P", real_list, "0,0.5,1", "momenta along z", {}},
      {"pstar", "P", real_list, "0:3.2:0.1", "ascending momenta along z", {}},
      {"pstar", "eps_crit", real, "-1", "threshold margin criterion (negative: 1e-3 c^2)", {}},
      {"pstar", "z_crit", real, "0.1", "quasiparticle residue criterion", {}},
      {"check", "n", integer, "4", "cartesian points per axis for the property suite", {}},
      {"check", "nmax", integer, "2", "phonon number for the property suite", {}},
      {"check", "g", real, "0.2", "coupling for the property suite", {}},
      {"check", "matrices", integer, "10", "random matrices in the solver cross-check", {}},
      {"output", "directory", text, ".", "output directory", {}},
      {"output", "format", text, "csv", "csv or json", {"csv", "json"}},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& spec : schema()) {
    values_[spec.section + "." + spec.key] = canonical(spec, spec.default_value);
  }
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig config;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = origin + ":" + std::to_string(number);
    const auto comment = line.find_first_of("#;");
    const std::string content = trim(comment == std::string::npos ? line : line.substr(0, comment));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(content.substr(1, content.size() - 2));
      const bool known = std::any_of(schema().begin(), schema().end(),
                                     [&](const KeySpec& s) { return s.section == section; });
      if (!known) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside of a section");
    const std::string key = trim(content.substr(0, eq));
    const std::string dotted = section + "." + key;
    if (const auto it = seen.find(dotted); it != seen.end()) {
      throw ConfigError(where + ": duplicate key " + dotted + " (first on line " +
                        std::to_string(it->second) + ")");
    }
    seen[dotted] = number;
    try {
      config.set(section, key, content.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return config;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path);
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must read section.key=value (got '" + assignment + "')");
  }
  set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
      assignment.substr(eq + 1));
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(section, key);
  if (spec == nullptr) throw ConfigError("unknown key " + section + "." + key);
  values_[section + "." + key] = canonical(*spec, value);
}

std::string RunConfig::serialize() const {
  std::string out;
  std::string section;
  for (const auto& spec : schema()) {
    if (spec.section != section) {
      out += (section.empty() ? "[" : "\n[") + spec.section + "]\n";
      section = spec.section;
    }
    out += spec.key + " = " + values_.at(spec.section + "." + spec.key) + "\n";
  }
  return out;
}

std::string RunConfig::canonical_inputs() const {
  std::string out;
  for (const auto& spec : schema()) {
    if (spec.section == "output" && spec.key == "directory") continue;
    out += spec.section + "." + spec.key + "=" + values_.at(spec.section + "." + spec.key) + "\n";
  }
  return out;
}

const std::string& RunConfig::raw(const std::string& dotted) const {
  const auto it = values_.find(dotted);
  if (it == values_.end()) throw ConfigError("unknown key " + dotted);
  return it->second;
}

double RunConfig::real(const std::string& dotted) const {
  double x = 0.0;
  parse_real(raw(dotted), x);
  return x;
}

std::int64_t RunConfig::integer(const std::string& dotted) const { return std::stoll(raw(dotted)); }

bool RunConfig::boolean(const std::string& dotted) const { return raw(dotted) == "true"; }

std::vector<double> RunConfig::list(const std::string& dotted) const {
  std::vector<double> out;
  std::stringstream items(raw(dotted));
  std::string item;
  while (std::getline(items, item, ',')) {
    double x = 0.0;
    parse_real(item, x);
    out.push_back(x);
  }
  return out;
}

ModelParams RunConfig::model() const {
  return ModelParams(real("model.c"), real("model.xi"), real("model.g"), real("model.kappa"),
                     real("model.lambda"));
}

GridSpec RunConfig::grid() const {
  GridSpec spec;
  spec.kind = grid_kind_from_string(text("grid.kind"));
  spec.kmax = real("grid.kmax");
  spec.n = static_cast<int>(integer("grid.n"));
  spec.n_radial = static_cast<int>(integer("grid.n_radial"));
  spec.n_angular = static_cast<int>(integer("grid.n_angular"));
  const std::string& origin = text("grid.exclude_origin");
  if (origin != "auto") spec.exclude_origin = origin == "true";
  return spec;
}

LanczosOptions RunConfig::lanczos() const {
  LanczosOptions options;
  options.tol = real("solver.tol");
  const auto max_iter = integer("solver.max_iter");
  const auto krylov = integer("solver.krylov_dim");
  if (!(options.tol > 0.0)) throw ConfigError("solver.tol must be > 0");
  if (max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
  if (krylov < 2) throw ConfigError("solver.krylov_dim must be >= 2");
  if (integer("solver.seed") < 0) throw ConfigError("solver.seed must be >= 0");
  options.max_iter = static_cast<std::size_t>(max_iter);
  options.seed = static_cast<std::uint64_t>(integer("solver.seed"));
  options.krylov_dim = static_cast<std::size_t>(krylov);
  return options;
}

int RunConfig::nmax() const {
  const auto n = integer("fock.nmax");
  if (n < 0 || n > 64) throw ConfigError("fock.nmax must lie in [0, 64]");
  return static_cast<int>(n);
}

}  // namespace polaron::app
