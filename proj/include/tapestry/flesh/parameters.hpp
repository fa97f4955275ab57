#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace tapestry::flesh {

enum class ParamKind { integer, real, boolean, keyword, string };

const char* to_string(ParamKind k);

using ParamValue = std::variant<std::int64_t, double, bool, std::string>;

std::string format_value(const ParamValue& v);

struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Declared parameter. Names are qualified as "thorn::name".
struct ParameterSpec {
  std::string name;
  ParamKind kind = ParamKind::real;
  ParamValue default_value = 0.0;
  std::optional<std::pair<double, double>> range;  // inclusive, numeric kinds only
  std::vector<ParamValue> allowed;                 // empty = unrestricted
  bool steerable = false;
  std::string description;

  /// Parse the textual form used in parameter files.
  ParamValue parse(std::string_view text) const;
  /// Throws ParameterError on kind mismatch or a value outside range/allowed.
  void check(const ParamValue& v) const;
  void validate() const;
};

ParameterSpec int_param(std::string name, std::int64_t def, std::optional<std::pair<double, double>> range = {},
                        bool steerable = false, std::string description = {});
ParameterSpec real_param(std::string name, double def, std::optional<std::pair<double, double>> range = {},
                         bool steerable = false, std::string description = {});
ParameterSpec bool_param(std::string name, bool def, bool steerable = false, std::string description = {});
ParameterSpec keyword_param(std::string name, std::string def, std::vector<std::string> allowed,
                            bool steerable = false, std::string description = {});
ParameterSpec string_param(std::string name, std::string def, bool steerable = false, std::string description = {});

/// Parameter values keyed by qualified name; every entry has a spec.
class ParameterTable {
 public:
  void declare(const ParameterSpec& spec);
  bool has(std::string_view name) const { return specs_.find(name) != specs_.end(); }
  const ParameterSpec& spec(std::string_view name) const;
  const std::map<std::string, ParameterSpec, std::less<>>& specs() const { return specs_; }

  const ParamValue& get(std::string_view name) const;
  void set(std::string_view name, const ParamValue& v);

  std::int64_t get_int(std::string_view name) const;
  double get_real(std::string_view name) const;
  bool get_bool(std::string_view name) const;
  const std::string& get_string(std::string_view name) const;

  const std::map<std::string, ParamValue, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, ParameterSpec, std::less<>> specs_;
  std::map<std::string, ParamValue, std::less<>> values_;
};

/// Parse `thorn::name = value` lines (`#` starts a comment) and validate every
/// assignment against the declared specs.
std::map<std::string, ParamValue> parse_parameter_file(std::string_view text, const ParameterTable& declared);

}  // namespace tapestry::flesh
