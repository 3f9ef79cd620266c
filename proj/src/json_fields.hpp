#pragma once

// Field access over parsed JSON with path-qualified diagnostics. Private to
// the library.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "json.hpp"
#include "sppsbl/errors.hpp"

namespace sppsbl::detail {

using Json = nlohmann::json;

inline std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

inline std::string describe(const Json& v) {
  switch (v.type()) {
    case Json::value_t::null: return "null";
    case Json::value_t::boolean: return "a boolean";
    case Json::value_t::string: return "a string";
    case Json::value_t::array: return "an array";
    case Json::value_t::object: return "an object";
    default: return "a number";
  }
}

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
  throw ConfigError("field '" + path + "': " + what);
}

/// Parses text as JSON (comments allowed). Syntax errors carry line:column.
inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

inline void require_object(const Json& v, const std::string& path) {
  if (!v.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object, got " + describe(v));
}

/// Numbers, or the strings "inf"/"-inf" for the infinities.
inline double as_double(const Json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  field_error(path, "expected a number, got " + describe(v));
}

inline std::int64_t as_int(const Json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  field_error(path, "expected an integer, got " + describe(v));
}

inline std::uint64_t as_u64(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    try {
      std::size_t used = 0;
      const auto out = std::stoull(s, &used, 0);
      if (used == s.size() && !s.empty() && s[0] != '-') return out;
    } catch (const std::exception&) {
    }
  }
  field_error(path, "expected an unsigned 64-bit integer, got " + describe(v));
}

inline bool as_bool(const Json& v, const std::string& path) {
  if (v.is_boolean()) return v.get<bool>();
  field_error(path, "expected a boolean, got " + describe(v));
}

inline std::string as_string(const Json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  field_error(path, "expected a string, got " + describe(v));
}

template <class T, class Conv>
T get_or(const Json& obj, const char* key, const std::string& parent, T fallback, Conv conv) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return conv(*it, join_path(parent, key));
}

inline double get_double(const Json& obj, const char* key, const std::string& parent, double fallback) {
  return get_or(obj, key, parent, fallback, as_double);
}
inline std::int64_t get_int(const Json& obj, const char* key, const std::string& parent, std::int64_t fallback) {
  return get_or(obj, key, parent, fallback, as_int);
}
inline bool get_bool(const Json& obj, const char* key, const std::string& parent, bool fallback) {
  return get_or(obj, key, parent, fallback, as_bool);
}
inline std::string get_string(const Json& obj, const char* key, const std::string& parent,
                              const std::string& fallback) {
  return get_or(obj, key, parent, fallback, as_string);
}

/// Rejects keys outside `allowed`, so typos surface instead of being ignored.
inline void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) field_error(join_path(path, key), "unknown field");
  }
}

}  // namespace sppsbl::detail

namespace sppsbl {
struct GeneratorSpec;
namespace detail {
/// Generator object at `path`; defined with the instance reader.
GeneratorSpec generator_spec_from(const Json& j, const std::string& path, const GeneratorSpec& base);
}  // namespace detail
}  // namespace sppsbl
