#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polaron/grid.hpp"
#include "polaron/model.hpp"
#include "polaron/solver.hpp"

namespace polaron::app {

enum class ValueType { real, integer, boolean, text, real_list };

struct KeySpec {
  std::string section;
  std::string key;
  ValueType type;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // text keys only; empty means free text
};

/// Every key the tool understands, in canonical order.
const std::vector<KeySpec>& schema();

/// Flat sectioned key-value configuration. Values are held in canonical text form: numbers in
/// their shortest round-trip decimal, lists comma-separated without spaces, ranges expanded.
class RunConfig {
 public:
  RunConfig();  // all defaults

  /// Parses INI-style text. Unknown sections or keys, duplicates and malformed values raise
  /// ConfigError naming the key (and line).
  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  /// Applies "section.key=value".
  void set(const std::string& assignment);
  void set(const std::string& section, const std::string& key, const std::string& value);

  std::string serialize() const;
  /// Canonical text of the sections that determine results (everything except [output]).
  std::string canonical_inputs() const;

  const std::string& raw(const std::string& dotted) const;
  double real(const std::string& dotted) const;
  std::int64_t integer(const std::string& dotted) const;
  bool boolean(const std::string& dotted) const;
  const std::string& text(const std::string& dotted) const { return raw(dotted); }
  std::vector<double> list(const std::string& dotted) const;

  ModelParams model() const;
  GridSpec grid() const;
  LanczosOptions lanczos() const;
  int nmax() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace polaron::app
