#pragma once

// JSON (de)serialization shared by dataset files, experiment documents and
// result records. Parsing helpers throw ParseError naming the offending field.

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "qieo/datagen.hpp"
#include "qieo/error.hpp"

namespace qieo {

nlohmann::json to_json(const SparseGenConfig& c);
nlohmann::json to_json(const RobustGenConfig& c);
SparseGenConfig sparse_gen_from_json(const nlohmann::json& j);
RobustGenConfig robust_gen_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const nlohmann::json& j);

namespace json_field {

/// j[key] converted to T, or ParseError("<key>: ...") when missing or mistyped.
template <class T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T optional(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

/// Rejects keys outside `allowed` so typos in config documents are caught.
void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const char* context);

}  // namespace json_field
}  // namespace qieo
