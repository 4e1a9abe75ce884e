#pragma once

// Sectioned key = value run configuration with a fixed schema.
//
//   # comment
//   [synth]
//   n_fluct = 10000
//
// Keys are addressed as "section.key". Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tlsnoise::config {

enum class ValueType { number, integer, boolean, text, choice, number_list, stage_list };

struct KeySpec {
  std::string_view key;             // "section.key"
  ValueType type;
  std::string_view default_value;   // empty: derived at run time or optional
  std::string_view choices;         // '|' separated, for ValueType::choice
  std::string_view help;
};

const std::vector<KeySpec>& schema();
const KeySpec* find_key(std::string_view key);

struct Diagnostic {
  std::string key;  // path-like address, e.g. "chain.stages[2].attenuation_db"
  std::string message;
};

class Config {
 public:
  /// Syntax errors and unknown keys throw UsageError.
  static Config parse(std::istream& in, std::string_view source = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Parses "section.key=value" and applies it; unknown keys throw UsageError.
  void apply_override(std::string_view assignment);
  void set(std::string_view key, std::string value);

  bool has(std::string_view key) const;
  /// Explicit value, else the schema default; UsageError when neither exists.
  std::string get(std::string_view key) const;
  std::optional<std::string> get_optional(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<double> get_list(std::string_view key) const;

  /// Every schema key that has an explicit or default value, in schema order.
  std::string serialize() const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

/// Type and invariant checks without running anything.
std::vector<Diagnostic> validate(const Config& cfg);

struct StageSpec {
  std::string name;
  double temperature = 0.0;
  double attenuation_db = 0.0;
};

/// "NAME:T_K:dB, NAME:T_K:dB, ..."
std::vector<StageSpec> parse_stage_list(std::string_view text);
std::vector<double> parse_number_list(std::string_view text);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace tlsnoise::config
