#include "zetalab/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <type_traits>

#include "zetalab/error.hpp"

namespace zetalab::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view text, const std::string& where) {
  text = trim(text);
  if (text.size() >= 2 && text.front() == '[' && text.back() == ']') {
    text = trim(text.substr(1, text.size() - 2));
  } else if (!text.empty() && (text.front() == '[' || text.back() == ']')) {
    throw ValidationError(where + ": unbalanced brackets in list");
  }
  std::vector<std::string_view> items;
  if (text.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (item.empty()) throw ValidationError(where + ": empty list element");
    items.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

std::int64_t parse_int(std::string_view s, const std::string& where) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError(where + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

double parse_real(std::string_view s, const std::string& where) {
  std::string text(s);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError(where + ": expected a real number, got '" + text + "'");
  return v;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::string to_string(ValueType type) {
  switch (type) {
    case ValueType::kInt:
      return "int";
    case ValueType::kReal:
      return "real";
    case ValueType::kBool:
      return "bool";
    case ValueType::kString:
      return "string";
    case ValueType::kIntList:
      return "int[]";
    case ValueType::kRealList:
      return "real[]";
  }
  return "string";
}

ValueType parse_value_type(const std::string& name) {
  for (auto t : {ValueType::kInt, ValueType::kReal, ValueType::kBool, ValueType::kString, ValueType::kIntList,
                 ValueType::kRealList}) {
    if (to_string(t) == name) return t;
  }
  throw ValidationError("unknown value type '" + name + "'");
}

const std::vector<KeySpec>& config_schema() {
  using T = ValueType;
  static const std::vector<KeySpec> schema = {
      {"model", "mode", T::kString, "surrogate", "surrogate | prime-exact"},
      {"model", "t", T::kInt, "10", "number of slices of the surrogate model"},
      {"model", "atoms_per_slice", T::kInt, "4096", "surrogate atoms per slice"},
      {"model", "T", T::kReal, "10000", "prime-exact height; primes up to T are used"},
      {"model", "law", T::kString, "complex-gaussian", "complex-gaussian | uniform-phase"},

      {"run", "seed", T::kInt, "1", "master seed"},
      {"run", "threads", T::kInt, "1", "worker threads"},
      {"run", "out", T::kString, "", "output root (default $ZETALAB_OUT or ./results)"},
      {"run", "max_points", T::kInt, "100000000", "resource cap on grid points"},

      {"covariance", "deltas", T::kRealList, "[0, 0.001, 0.01, 0.1, 1]", "lags"},
      {"covariance", "k", T::kInt, "0", "restrict to slices k < s <= l"},
      {"covariance", "l", T::kInt, "0", "upper slice (0 means t)"},

      {"sample", "theta", T::kReal, "0", "half-width e^{theta t}"},
      {"sample", "half_width", T::kReal, "0", "explicit half-width (0 means e^{theta t})"},
      {"sample", "spacing", T::kReal, "0", "grid spacing (0 means e^{-t})"},
      {"sample", "slices", T::kBool, "false", "also write the per-slice partial sums"},
      {"sample", "binary", T::kBool, "false", "also write field.bin"},
      {"sample", "replicate", T::kInt, "0", "replicate index of the draw"},

      {"maxima", "theta", T::kReal, "0", ""},
      {"maxima", "recentering", T::kString, "m1", "m1 | m_iid | m_alpha | m0 | mu_t"},
      {"maxima", "alpha", T::kReal, "0", ""},
      {"maxima", "epsilon", T::kReal, "0.05", ""},
      {"maxima", "g", T::kReal, "nan", "offset g; nan means max(0, log log t)"},
      {"maxima", "replicates", T::kInt, "200", ""},

      {"tail", "y", T::kRealList, "[2, 3, 4, 5, 6]", "levels above m_1(t)"},
      {"tail", "replicates", T::kInt, "20000", "draws per level"},
      {"tail", "mixture_spacing", T::kReal, "0", "spacing of the tilt points; 0 tilts at every grid point"},
      {"tail", "half_width", T::kReal, "1", "interval |h| <= half_width"},

      {"barrier", "source", T::kString, "iid", "iid | field"},
      {"barrier", "kind", T::kString, "logarithmic", "none | logarithmic | interpolation | linear"},
      {"barrier", "horizon", T::kReal, "10", "t of the logarithmic or interpolation barrier"},
      {"barrier", "offset", T::kReal, "2", "y"},
      {"barrier", "log_scale", T::kReal, "1", "multiplier of the logarithm"},
      {"barrier", "slope", T::kReal, "0", "a of the linear barrier"},
      {"barrier", "alpha", T::kReal, "0.5", "interpolation barrier with alpha > 0"},
      {"barrier", "theta", T::kReal, "0", "interpolation barrier when alpha = 0"},
      {"barrier", "j", T::kInt, "5", ""},
      {"barrier", "x", T::kRealList, "[0]", "bin tops, bins (x-1, x]"},
      {"barrier", "replicates", T::kInt, "100000", ""},
      {"barrier", "step_variance", T::kReal, "0.5", "iid walk increment variance"},

      {"zdelta", "alpha", T::kReal, "0.5", ""},
      {"zdelta", "theta", T::kReal, "nan", "nan means t^{-alpha}"},
      {"zdelta", "epsilon", T::kReal, "0.05", ""},
      {"zdelta", "deltas", T::kRealList, "[0.5, 1]", ""},
      {"zdelta", "replicates", T::kInt, "4000", ""},

      {"decouple", "k", T::kInt, "1", ""},
      {"decouple", "multiples", T::kRealList, "[1, 10, 100]", "separations in units of e^{-k}"},
      {"decouple", "event_lo", T::kReal, "1", ""},
      {"decouple", "event_hi", T::kReal, "inf", ""},
      {"decouple", "replicates", T::kInt, "100000", ""},

      {"discretize", "j", T::kIntList, "[4, 6, 8]", ""},
      {"discretize", "y", T::kRealList, "[2, 3, 4]", ""},
      {"discretize", "replicates", T::kInt, "20000", ""},
      {"discretize", "subdivisions", T::kInt, "64", ""},

      {"ballot", "kind", T::kString, "logarithmic", "none | logarithmic | interpolation | linear"},
      {"ballot", "horizon", T::kReal, "100", ""},
      {"ballot", "offset", T::kReal, "1", ""},
      {"ballot", "log_scale", T::kReal, "1", ""},
      {"ballot", "slope", T::kReal, "0", ""},
      {"ballot", "alpha", T::kReal, "0.5", ""},
      {"ballot", "theta", T::kReal, "0", ""},
      {"ballot", "j", T::kIntList, "[10, 30, 100]", ""},
      {"ballot", "x", T::kRealList, "[0]", "bin tops"},
      {"ballot", "width", T::kReal, "1", "bin width"},
      {"ballot", "weight_rate", T::kReal, "0", "exponential weight inside the bin"},
      {"ballot", "grid_step", T::kReal, "0.05", ""},
      {"ballot", "step_variance", T::kReal, "0.5", ""},
      {"ballot", "tolerance", T::kReal, "0.01", "relative Richardson error accepted"},
      {"ballot", "max_refinements", T::kInt, "3", "grid halvings before giving up"},

      {"bbm", "horizon", T::kReal, "8", ""},
      {"bbm", "theta", T::kReal, "0", "ensemble of ceil(e^{t theta}) copies"},
      {"bbm", "replicates", T::kInt, "1000", ""},
      {"bbm", "envelope_constant", T::kReal, "3", ""},
      {"bbm", "line_constant", T::kReal, "3", ""},
      {"bbm", "line_max_k", T::kInt, "3", ""},

      {"report", "input", T::kString, "", "results root to aggregate (default: output root)"},
  };
  return schema;
}

const KeySpec& find_key(const std::string& section, const std::string& key) {
  for (const auto& k : config_schema()) {
    if (k.section == section && k.key == key) return k;
  }
  throw ValidationError("unknown configuration key '" + section + "." + key + "'");
}

Value parse_value(ValueType type, std::string_view text, const std::string& where) {
  text = trim(text);
  switch (type) {
    case ValueType::kInt:
      return parse_int(text, where);
    case ValueType::kReal:
      return parse_real(text, where);
    case ValueType::kBool:
      if (text == "true") return true;
      if (text == "false") return false;
      throw ValidationError(where + ": expected true or false, got '" + std::string(text) + "'");
    case ValueType::kString:
      if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
      return std::string(text);
    case ValueType::kIntList: {
      std::vector<std::int64_t> out;
      for (auto item : split_list(text, where)) out.push_back(parse_int(item, where));
      return out;
    }
    case ValueType::kRealList: {
      std::vector<double> out;
      for (auto item : split_list(text, where)) out.push_back(parse_real(item, where));
      return out;
    }
  }
  throw ValidationError(where + ": unsupported type");
}

std::string format_value(const Value& v) {
  struct Visitor {
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
    std::string operator()(const std::string& x) const { return x; }
    std::string operator()(const std::vector<std::int64_t>& xs) const {
      std::string s = "[";
      for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
      return s + "]";
    }
    std::string operator()(const std::vector<double>& xs) const {
      std::string s = "[";
      for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + format_real(xs[i]);
      return s + "]";
    }
  };
  return std::visit(Visitor{}, v);
}

Config::Config() {
  for (const auto& k : config_schema()) {
    values_[k.name()] = parse_value(k.type, k.default_text, "default " + k.name());
    explicit_[k.name()] = false;
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  source_path_ = path;
  load_text(ss.str(), path);
}

void Config::load_text(std::string_view text, const std::string& origin) {
  source_text_ = std::string(text);
  std::string section;
  std::map<std::string, bool> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      const bool known = std::any_of(config_schema().begin(), config_schema().end(),
                                     [&](const KeySpec& k) { return k.section == section; });
      if (!known) throw ValidationError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto colon = line.find(':');
    const auto eq = line.find('=');
    if (colon == std::string_view::npos || eq == std::string_view::npos || eq < colon) {
      throw ValidationError(where + ": expected 'key: type = value'");
    }
    if (section.empty()) throw ValidationError(where + ": key outside any section");
    const std::string key(trim(line.substr(0, colon)));
    const std::string type_name(trim(line.substr(colon + 1, eq - colon - 1)));
    const KeySpec* spec = nullptr;
    try {
      spec = &find_key(section, key);
    } catch (const ValidationError&) {
      throw ValidationError(where + ": unknown key '" + section + "." + key + "'");
    }
    const ValueType declared = parse_value_type(type_name);
    const bool widened = declared == ValueType::kInt && spec->type == ValueType::kReal;
    const bool widened_list = declared == ValueType::kIntList && spec->type == ValueType::kRealList;
    if (declared != spec->type && !widened && !widened_list) {
      throw ValidationError(where + ": key '" + spec->name() + "' has type " + to_string(spec->type) + ", declared " +
                            type_name);
    }
    if (seen[spec->name()]) throw ValidationError(where + ": key '" + spec->name() + "' given twice");
    seen[spec->name()] = true;
    // Validate against the declared type, then store with the schema type.
    parse_value(declared, line.substr(eq + 1), where);
    set(section, key, parse_value(spec->type, line.substr(eq + 1), where));
  }
}

void Config::apply_overrides(const std::vector<std::string>& assignments) {
  std::map<std::string, std::string> given;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    const auto dot = a.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ValidationError("override '" + a + "' must look like section.key=value");
    }
    const std::string section = a.substr(0, dot);
    const std::string key = a.substr(dot + 1, eq - dot - 1);
    const KeySpec& spec = find_key(section, key);
    const Value v = parse_value(spec.type, std::string_view(a).substr(eq + 1), "override " + spec.name());
    const std::string canonical = format_value(v);
    const auto it = given.find(spec.name());
    if (it != given.end() && it->second != canonical) {
      throw ValidationError("conflicting overrides for '" + spec.name() + "': " + it->second + " vs " + canonical);
    }
    given[spec.name()] = canonical;
    set(section, key, v);
    overrides_.push_back(a);
  }
}

void Config::set(const std::string& section, const std::string& key, const Value& value) {
  const KeySpec& spec = find_key(section, key);
  const bool ok = std::visit(
      [&](const auto& x) {
        using X = std::decay_t<decltype(x)>;
        switch (spec.type) {
          case ValueType::kInt:
            return std::is_same_v<X, std::int64_t>;
          case ValueType::kReal:
            return std::is_same_v<X, double>;
          case ValueType::kBool:
            return std::is_same_v<X, bool>;
          case ValueType::kString:
            return std::is_same_v<X, std::string>;
          case ValueType::kIntList:
            return std::is_same_v<X, std::vector<std::int64_t>>;
          case ValueType::kRealList:
            return std::is_same_v<X, std::vector<double>>;
        }
        return false;
      },
      value);
  if (!ok) throw ValidationError("value for '" + spec.name() + "' must have type " + to_string(spec.type));
  values_[spec.name()] = value;
  explicit_[spec.name()] = true;
}

const Value& Config::get(const std::string& section, const std::string& key) const {
  return values_.at(find_key(section, key).name());
}

std::int64_t Config::integer(const std::string& s, const std::string& k) const { return std::get<std::int64_t>(get(s, k)); }
double Config::real(const std::string& s, const std::string& k) const { return std::get<double>(get(s, k)); }
bool Config::boolean(const std::string& s, const std::string& k) const { return std::get<bool>(get(s, k)); }
const std::string& Config::string(const std::string& s, const std::string& k) const {
  return std::get<std::string>(get(s, k));
}
const std::vector<std::int64_t>& Config::int_list(const std::string& s, const std::string& k) const {
  return std::get<std::vector<std::int64_t>>(get(s, k));
}
const std::vector<double>& Config::real_list(const std::string& s, const std::string& k) const {
  return std::get<std::vector<double>>(get(s, k));
}
bool Config::explicitly_set(const std::string& s, const std::string& k) const {
  return explicit_.at(find_key(s, k).name());
}

std::string Config::render() const {
  std::string out;
  std::string section;
  for (const auto& k : config_schema()) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.key + ": " + to_string(k.type) + " = " + format_value(values_.at(k.name())) + "\n";
  }
  return out;
}

nlohmann::ordered_json Config::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& k : config_schema()) j[k.section][k.key] = format_value(values_.at(k.name()));
  return j;
}

}  // namespace zetalab::cli
