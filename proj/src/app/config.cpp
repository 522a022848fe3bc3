#include "app/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "core/error.hpp"

namespace oampump::app {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::Config, what); }

bool is_integral(const json& v) {
  if (v.is_number_integer()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15;
}

json check_scalar(const KeySpec& k, const json& v) {
  switch (k.type) {
    case KeyType::Number: {
      if (!v.is_number()) fail("'" + k.name + "' must be a number");
      const double d = v.get<double>();
      if (!std::isfinite(d)) fail("'" + k.name + "' must be finite");
      if (k.min && d < *k.min) fail("'" + k.name + "' must be >= " + format12(*k.min));
      if (k.max && d > *k.max) fail("'" + k.name + "' must be <= " + format12(*k.max));
      return d;
    }
    case KeyType::Integer: {
      if (!is_integral(v)) fail("'" + k.name + "' must be an integer");
      const long long i = v.is_number_integer() ? v.get<long long>() : static_cast<long long>(v.get<double>());
      if (k.min && static_cast<double>(i) < *k.min) fail("'" + k.name + "' must be >= " + format12(*k.min));
      if (k.max && static_cast<double>(i) > *k.max) fail("'" + k.name + "' must be <= " + format12(*k.max));
      return i;
    }
    case KeyType::String: {
      if (!v.is_string()) fail("'" + k.name + "' must be a string");
      const std::string s = v.get<std::string>();
      if (!k.choices.empty()) {
        bool ok = false;
        for (const auto& c : k.choices) ok = ok || c == s;
        if (!ok) {
          std::string list;
          for (const auto& c : k.choices) list += (list.empty() ? "" : ", ") + c;
          fail("'" + k.name + "' must be one of: " + list);
        }
      }
      return s;
    }
    case KeyType::Bool:
      if (!v.is_boolean()) fail("'" + k.name + "' must be true or false");
      return v;
    case KeyType::NumberList:
    case KeyType::IntegerList: {
      if (!v.is_array() || v.empty()) fail("'" + k.name + "' must be a non-empty array");
      KeySpec elem = k;
      elem.type = k.type == KeyType::NumberList ? KeyType::Number : KeyType::Integer;
      json out = json::array();
      for (const auto& e : v) out.push_back(check_scalar(elem, e));
      return out;
    }
  }
  fail("unsupported key type");
}

bool is_list(KeyType t) { return t == KeyType::NumberList || t == KeyType::IntegerList; }

}  // namespace

json parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config must be a JSON object");
  return j;
}

std::vector<Params> expand_config(const json& config, const Schema& schema) {
  if (!config.is_object()) fail("config must be a JSON object");
  std::set<std::string> known;
  for (const auto& k : schema) known.insert(k.name);
  for (const auto& [key, value] : config.items()) {
    (void)value;
    if (!known.count(key)) fail("unknown key '" + key + "'");
  }

  struct Axis {
    std::string name;
    std::vector<json> values;
  };
  json base = json::object();
  std::vector<Axis> axes;
  for (const auto& k : schema) {
    if (!config.contains(k.name)) {
      if (k.fallback.is_null()) fail("missing required key '" + k.name + "'");
      base[k.name] = k.fallback;
      continue;
    }
    const json& v = config.at(k.name);
    const bool sweep = is_list(k.type) ? (v.is_array() && !v.empty() && v.front().is_array())
                                       : v.is_array();
    if (sweep) {
      if (v.empty()) fail("sweep '" + k.name + "' is empty");
      Axis a{k.name, {}};
      for (const auto& e : v) a.values.push_back(check_scalar(k, e));
      axes.push_back(std::move(a));
    } else {
      base[k.name] = check_scalar(k, v);
    }
  }

  std::size_t total = 1;
  for (const auto& a : axes) {
    total *= a.values.size();
    if (total > 100000) fail("sweep has too many points");
  }
  std::vector<Params> out;
  out.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    json p = base;
    std::size_t r = i;
    for (std::size_t a = axes.size(); a-- > 0;) {
      p[axes[a].name] = axes[a].values[r % axes[a].values.size()];
      r /= axes[a].values.size();
    }
    out.emplace_back(std::move(p));
  }
  return out;
}

const json& Params::at(const std::string& key) const {
  if (!values_.contains(key)) throw Error(ErrorCode::Config, "internal: key '" + key + "' not in schema");
  return values_.at(key);
}

double Params::number(const std::string& key) const { return at(key).get<double>(); }
long long Params::integer(const std::string& key) const { return at(key).get<long long>(); }

int Params::int32(const std::string& key) const {
  const long long v = integer(key);
  if (v < -2147483647LL || v > 2147483647LL) fail("'" + key + "' is out of range");
  return static_cast<int>(v);
}

std::string Params::string(const std::string& key) const { return at(key).get<std::string>(); }
bool Params::flag(const std::string& key) const { return at(key).get<bool>(); }

std::vector<double> Params::numbers(const std::string& key) const {
  return at(key).get<std::vector<double>>();
}

std::vector<long long> Params::integers(const std::string& key) const {
  return at(key).get<std::vector<long long>>();
}

std::string format12(double v) {
  if (v == 0.0) return "0";  // no negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format12(v).c_str(), nullptr);
}

}  // namespace oampump::app
