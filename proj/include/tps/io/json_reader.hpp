#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "tps/error.hpp"

namespace tps::io {

using Json = nlohmann::json;

/// Strict reader over one JSON object: every member must be consumed, and all
/// errors carry the dotted path of the offending field.
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string path);

  bool has(const std::string& key) const { return object_->contains(key); }
  std::string path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!object_->contains(key)) return;
    out = as<T>((*object_)[key], path_of(key));
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!object_->contains(key)) throw ConfigError(path_of(key) + ": missing required field");
    return as<T>((*object_)[key], path_of(key));
  }

  /// Nested object; absent members yield an empty object.
  ObjectReader child(const std::string& key);
  const Json* raw(const std::string& key);

  /// Throws ConfigError naming the first member that was never read.
  void finish() const;

  template <class T>
  static T as(const Json& value, const std::string& path) {
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) throw ConfigError(path + ": expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer()) throw ConfigError(path + ": expected an integer");
        if (std::is_unsigned_v<T> && value.is_number_integer() && !value.is_number_unsigned() &&
            value.get<long long>() < 0) {
          throw ConfigError(path + ": expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!value.is_number()) throw ConfigError(path + ": expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) throw ConfigError(path + ": expected a string");
      }
      return value.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }

 private:
  const Json* object_;
  std::string path_;
  std::set<std::string> seen_;
};

/// Reads and parses a JSON file; IoError when unreadable, ConfigError on syntax.
Json read_json_file(const std::string& path);
/// Writes pretty-printed JSON; IoError on failure.
void write_json_file(const std::string& path, const Json& value);

}  // namespace tps::io
