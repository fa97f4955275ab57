#include "tapestry/flesh/parameters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace tapestry::flesh {

const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::integer: return "int";
    case ParamKind::real: return "real";
    case ParamKind::boolean: return "bool";
    case ParamKind::keyword: return "keyword";
    case ParamKind::string: return "string";
  }
  return "?";
}

std::string format_value(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          char buf[64];
          auto res = std::to_chars(buf, buf + sizeof buf, x);
          return std::string(buf, res.ptr);
        }
      },
      v);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

ParamValue ParameterSpec::parse(std::string_view text) const {
  text = trim(text);
  auto mismatch = [&] {
    return ParameterError("parameter " + name + ": cannot read '" + std::string(text) + "' as " + to_string(kind));
  };
  switch (kind) {
    case ParamKind::integer: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size()) throw mismatch();
      return v;
    }
    case ParamKind::real: {
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size()) throw mismatch();
      return v;
    }
    case ParamKind::boolean: {
      std::string lower(text);
      std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
      if (lower == "true" || lower == "yes" || lower == "1") return true;
      if (lower == "false" || lower == "no" || lower == "0") return false;
      throw mismatch();
    }
    case ParamKind::keyword:
    case ParamKind::string:
      return std::string(unquote(text));
  }
  throw mismatch();
}

void ParameterSpec::check(const ParamValue& v) const {
  const bool kind_ok = (kind == ParamKind::integer && std::holds_alternative<std::int64_t>(v)) ||
                       (kind == ParamKind::real && std::holds_alternative<double>(v)) ||
                       (kind == ParamKind::boolean && std::holds_alternative<bool>(v)) ||
                       ((kind == ParamKind::keyword || kind == ParamKind::string) && std::holds_alternative<std::string>(v));
  if (!kind_ok) throw ParameterError("parameter " + name + ": value '" + format_value(v) + "' is not of kind " + to_string(kind));
  if (range) {
    const double x = std::holds_alternative<std::int64_t>(v) ? static_cast<double>(std::get<std::int64_t>(v))
                                                            : std::get<double>(v);
    if (!(x >= range->first && x <= range->second)) {
      std::ostringstream os;
      os << "parameter " << name << ": value " << format_value(v) << " outside range [" << range->first << ", "
         << range->second << "]";
      throw ParameterError(os.str());
    }
  }
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string set;
    for (const auto& a : allowed) set += (set.empty() ? "" : ", ") + format_value(a);
    throw ParameterError("parameter " + name + ": value " + format_value(v) + " not in allowed set {" + set + "}");
  }
}

void ParameterSpec::validate() const {
  if (name.find("::") == std::string::npos) throw ParameterError("parameter name '" + name + "' must be thorn::name");
  check(default_value);
}

ParameterSpec int_param(std::string name, std::int64_t def, std::optional<std::pair<double, double>> range,
                        bool steerable, std::string description) {
  return {std::move(name), ParamKind::integer, def, range, {}, steerable, std::move(description)};
}

ParameterSpec real_param(std::string name, double def, std::optional<std::pair<double, double>> range, bool steerable,
                         std::string description) {
  return {std::move(name), ParamKind::real, def, range, {}, steerable, std::move(description)};
}

ParameterSpec bool_param(std::string name, bool def, bool steerable, std::string description) {
  return {std::move(name), ParamKind::boolean, def, {}, {}, steerable, std::move(description)};
}

ParameterSpec keyword_param(std::string name, std::string def, std::vector<std::string> allowed, bool steerable,
                            std::string description) {
  std::vector<ParamValue> a(allowed.begin(), allowed.end());
  return {std::move(name), ParamKind::keyword, std::move(def), {}, std::move(a), steerable, std::move(description)};
}

ParameterSpec string_param(std::string name, std::string def, bool steerable, std::string description) {
  return {std::move(name), ParamKind::string, std::move(def), {}, {}, steerable, std::move(description)};
}

void ParameterTable::declare(const ParameterSpec& spec) {
  spec.validate();
  specs_.insert_or_assign(spec.name, spec);
  values_.insert_or_assign(spec.name, spec.default_value);
}

const ParameterSpec& ParameterTable::spec(std::string_view name) const {
  auto it = specs_.find(name);
  if (it == specs_.end()) throw ParameterError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

const ParamValue& ParameterTable::get(std::string_view name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ParameterError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

void ParameterTable::set(std::string_view name, const ParamValue& v) {
  const auto& s = spec(name);
  ParamValue value = v;
  // integers are acceptable wherever reals are expected
  if (s.kind == ParamKind::real && std::holds_alternative<std::int64_t>(v))
    value = static_cast<double>(std::get<std::int64_t>(v));
  s.check(value);
  values_.find(name)->second = std::move(value);
}

std::int64_t ParameterTable::get_int(std::string_view name) const { return std::get<std::int64_t>(get(name)); }
double ParameterTable::get_real(std::string_view name) const { return std::get<double>(get(name)); }
bool ParameterTable::get_bool(std::string_view name) const { return std::get<bool>(get(name)); }
const std::string& ParameterTable::get_string(std::string_view name) const { return std::get<std::string>(get(name)); }

std::map<std::string, ParamValue> parse_parameter_file(std::string_view text, const ParameterTable& declared) {
  std::map<std::string, ParamValue> out;
  int lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    // a '#' inside a quoted string is not a comment
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParameterError("line " + std::to_string(lineno) + ": expected 'thorn::name = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (!declared.has(key)) throw ParameterError("line " + std::to_string(lineno) + ": unknown parameter '" + key + "'");
    const auto& spec = declared.spec(key);
    ParamValue v = spec.parse(line.substr(eq + 1));
    spec.check(v);
    out.insert_or_assign(key, std::move(v));
  }
  return out;
}

}  // namespace tapestry::flesh
