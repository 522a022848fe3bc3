#pragma once

// Experiment config documents: typed keys with defaults, strict key checking
// and sweep expansion (a scalar key given as an array becomes a sweep axis).

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace oampump::app {

using json = nlohmann::json;

enum class KeyType { Number, Integer, String, Bool, NumberList, IntegerList };

struct KeySpec {
  std::string name;
  KeyType type = KeyType::Number;
  json fallback;                         // null: required
  std::vector<std::string> choices = {};  // allowed values for strings
  std::optional<double> min = std::nullopt;
  std::optional<double> max = std::nullopt;
};

using Schema = std::vector<KeySpec>;

/// One resolved sweep point: every schema key present with a scalar or list
/// value of the declared type.
class Params {
 public:
  explicit Params(json values) : values_(std::move(values)) {}

  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  int int32(const std::string& key) const;
  std::string string(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<long long> integers(const std::string& key) const;
  const json& values() const { return values_; }

 private:
  const json& at(const std::string& key) const;
  json values_;
};

/// Checks keys and types, fills defaults and expands sweeps (cartesian
/// product, first swept key varies slowest). Throws Error(Config).
std::vector<Params> expand_config(const json& config, const Schema& schema);

/// Parses a config document; throws Error(Config) on syntax errors.
json parse_config(const std::string& text);

/// Value rounded to 12 significant digits.
double round12(double v);
std::string format12(double v);

}  // namespace oampump::app
