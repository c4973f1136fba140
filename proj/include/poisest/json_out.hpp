#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "poisest/model.hpp"

namespace poisest {

/// Insertion-ordered JSON value for deterministic report emission. Numbers are
/// printed with 17 significant digits so output is byte-stable and round-trips.
/// (Parsing uses nlohmann::json; this type is write-only by design.)
class JsonValue {
 public:
  JsonValue() : data_(nullptr) {}
  JsonValue(std::nullptr_t) : data_(nullptr) {}
  JsonValue(bool b) : data_(b) {}
  JsonValue(int i) : data_(static_cast<long>(i)) {}
  JsonValue(long i) : data_(i) {}
  JsonValue(unsigned long i) : data_(static_cast<long>(i)) {}
  JsonValue(double d) : data_(d) {}
  JsonValue(const char* s) : data_(std::string(s)) {}
  JsonValue(std::string s) : data_(std::move(s)) {}
  JsonValue(const Vec& v);
  JsonValue(const Mat& m);

  static JsonValue array();
  static JsonValue object();

  /// Object access: inserts the key on first use, preserving order.
  JsonValue& operator[](const std::string& key);
  void push_back(JsonValue v);

  [[nodiscard]] std::string dump(int indent = 2) const;

 private:
  using Array = std::vector<JsonValue>;
  using Object = std::vector<std::pair<std::string, JsonValue>>;
  std::variant<std::nullptr_t, bool, long, double, std::string, Array, Object> data_;

  void write(std::string& out, int indent, int depth) const;
};

}  // namespace poisest
