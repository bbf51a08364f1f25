#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace zetalab::cli {

enum class ValueType { kInt, kReal, kBool, kString, kIntList, kRealList };

std::string to_string(ValueType type);
ValueType parse_value_type(const std::string& name);

using Value = std::variant<std::int64_t, double, bool, std::string, std::vector<std::int64_t>, std::vector<double>>;

struct KeySpec {
  std::string section;
  std::string key;
  ValueType type;
  std::string default_text;
  std::string help;

  std::string name() const { return section + "." + key; }
};

/// Every accepted key, in rendering order.
const std::vector<KeySpec>& config_schema();
const KeySpec& find_key(const std::string& section, const std::string& key);

/// Parses one value of the given type; throws ValidationError with `where`.
Value parse_value(ValueType type, std::string_view text, const std::string& where);
std::string format_value(const Value& v);

/// Typed one-level key/value configuration:
///
///   # comment
///   [section]
///   key: type = value
///
/// Lists are written [a, b, c]. Unknown sections or keys, type mismatches and
/// repeated keys are validation errors.
class Config {
 public:
  Config();

  void load_file(const std::string& path);
  void load_text(std::string_view text, const std::string& origin);
  /// Applies section.key=value overrides; the same key given twice with
  /// different values is a conflict.
  void apply_overrides(const std::vector<std::string>& assignments);
  void set(const std::string& section, const std::string& key, const Value& value);

  std::int64_t integer(const std::string& section, const std::string& key) const;
  double real(const std::string& section, const std::string& key) const;
  bool boolean(const std::string& section, const std::string& key) const;
  const std::string& string(const std::string& section, const std::string& key) const;
  const std::vector<std::int64_t>& int_list(const std::string& section, const std::string& key) const;
  const std::vector<double>& real_list(const std::string& section, const std::string& key) const;
  bool explicitly_set(const std::string& section, const std::string& key) const;

  /// Canonical text form of the resolved configuration.
  std::string render() const;
  nlohmann::ordered_json to_json() const;

  const std::string& source_text() const { return source_text_; }
  const std::string& source_path() const { return source_path_; }
  const std::vector<std::string>& overrides() const { return overrides_; }

 private:
  const Value& get(const std::string& section, const std::string& key) const;

  std::map<std::string, Value> values_;
  std::map<std::string, bool> explicit_;
  std::string source_text_;
  std::string source_path_;
  std::vector<std::string> overrides_;
};

}  // namespace zetalab::cli
