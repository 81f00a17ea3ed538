#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "heatplan/errors.hpp"

namespace heatplan::jsonu {

using nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void require_object(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ParseError("config field '" + path + "': expected an object");
}

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& path) {
  require_object(obj, path.empty() ? "<root>" : path);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) throw ParseError("config field '" + join(path, it.key()) + "': unknown key");
  }
}

inline void read(const json& obj, const char* key, double& target, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number()) throw ParseError("config field '" + join(path, key) + "': expected a number");
  target = it->get<double>();
}

inline void read(const json& obj, const char* key, int& target, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_integer()) {
    throw ParseError("config field '" + join(path, key) + "': expected an integer");
  }
  target = it->get<int>();
}

inline void read(const json& obj, const char* key, bool& target, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_boolean()) throw ParseError("config field '" + join(path, key) + "': expected a boolean");
  target = it->get<bool>();
}

inline void read(const json& obj, const char* key, std::string& target, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_string()) throw ParseError("config field '" + join(path, key) + "': expected a string");
  target = it->get<std::string>();
}

}  // namespace heatplan::jsonu
