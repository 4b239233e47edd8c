#include "tps/io/json_reader.hpp"

#include <fstream>
#include <sstream>

namespace tps::io {

namespace {
const Json& empty_object() {
  static const Json empty = Json::object();
  return empty;
}
}  // namespace

ObjectReader::ObjectReader(const Json& object, std::string path) : object_(&object), path_(std::move(path)) {
  if (!object.is_object()) throw ConfigError((path_.empty() ? std::string("document") : path_) + ": expected an object");
}

ObjectReader ObjectReader::child(const std::string& key) {
  seen_.insert(key);
  if (!object_->contains(key)) return ObjectReader(empty_object(), path_of(key));
  return ObjectReader((*object_)[key], path_of(key));
}

const Json* ObjectReader::raw(const std::string& key) {
  seen_.insert(key);
  if (!object_->contains(key)) return nullptr;
  return &(*object_)[key];
}

void ObjectReader::finish() const {
  for (auto it = object_->begin(); it != object_->end(); ++it) {
    if (!seen_.contains(it.key())) throw ConfigError(path_of(it.key()) + ": unknown key");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path);
  try {
    return Json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << value.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace tps::io
