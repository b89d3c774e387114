#pragma once

// Experiment configuration: a fixed schema of `section.key` fields with
// defaults, filled from an INI file and `--set section.key=value` overrides.

#include <map>
#include <string>
#include <vector>

namespace gjj::cli {

enum class FieldType { number, integer, boolean, text, list };

enum class Constraint { any, positive, nonnegative };

struct Field {
  std::string key;
  FieldType type;
  std::string default_value;
  Constraint constraint = Constraint::any;
  std::vector<std::string> choices;  ///< allowed values for text fields
  std::string help;
};

const std::vector<Field>& schema();
/// nullptr when the key is not part of the schema.
const Field* find_field(const std::string& key);

class Config {
 public:
  Config() = default;

  /// INI file; keys before the first section are top-level (`experiment`).
  static Config from_file(const std::string& path);
  static Config from_map(const std::map<std::string, std::string>& values);

  /// Validates the key against the schema and the value against its type.
  void set(const std::string& key, const std::string& value);
  /// "section.key=value".
  void apply_override(const std::string& assignment);

  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;

  bool is_set(const std::string& key) const { return values_.count(key) != 0; }
  /// Explicitly given values only.
  const std::map<std::string, std::string>& explicit_values() const { return values_; }
  /// Every schema field with its effective value.
  std::map<std::string, std::string> resolved() const;

 private:
  const std::string& raw(const std::string& key, FieldType expected) const;

  std::map<std::string, std::string> values_;
};

/// Strict parsers shared with the sweep axis handling; `key` names the field
/// in the error message.
double parse_number(const std::string& key, const std::string& text);
std::vector<double> parse_list(const std::string& key, const std::string& text);

}  // namespace gjj::cli
