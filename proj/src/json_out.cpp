#include "poisest/json_out.hpp"

#include <cmath>
#include <cstdio>

#include "poisest/errors.hpp"
#include "poisest/format.hpp"

namespace poisest {

JsonValue::JsonValue(const Vec& v) : data_(Array{}) {
  auto& arr = std::get<Array>(data_);
  arr.reserve(static_cast<std::size_t>(v.size()));
  for (int i = 0; i < v.size(); ++i) arr.emplace_back(v[i]);
}

JsonValue::JsonValue(const Mat& m) : data_(Array{}) {
  auto& arr = std::get<Array>(data_);
  arr.reserve(static_cast<std::size_t>(m.rows()));
  for (int r = 0; r < m.rows(); ++r) {
    arr.push_back(JsonValue(Vec(m.row(r).transpose())));
  }
}

JsonValue JsonValue::array() {
  JsonValue v;
  v.data_ = Array{};
  return v;
}

JsonValue JsonValue::object() {
  JsonValue v;
  v.data_ = Object{};
  return v;
}

JsonValue& JsonValue::operator[](const std::string& key) {
  if (!std::holds_alternative<Object>(data_)) data_ = Object{};
  auto& obj = std::get<Object>(data_);
  for (auto& [k, v] : obj) {
    if (k == key) return v;
  }
  obj.emplace_back(key, JsonValue());
  return obj.back().second;
}

void JsonValue::push_back(JsonValue v) {
  if (!std::holds_alternative<Array>(data_)) data_ = Array{};
  std::get<Array>(data_).push_back(std::move(v));
}

namespace {

void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void write_number(std::string& out, double d) {
  if (!std::isfinite(d)) {
    // JSON has no inf/nan literals; report files carry them as strings.
    write_escaped(out, format_double(d));
    return;
  }
  out += format_double(d);
}

}  // namespace

void JsonValue::write(std::string& out, int indent, int depth) const {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string closing_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  if (std::holds_alternative<std::nullptr_t>(data_)) {
    out += "null";
  } else if (std::holds_alternative<bool>(data_)) {
    out += std::get<bool>(data_) ? "true" : "false";
  } else if (std::holds_alternative<long>(data_)) {
    out += std::to_string(std::get<long>(data_));
  } else if (std::holds_alternative<double>(data_)) {
    write_number(out, std::get<double>(data_));
  } else if (std::holds_alternative<std::string>(data_)) {
    write_escaped(out, std::get<std::string>(data_));
  } else if (std::holds_alternative<Array>(data_)) {
    const auto& arr = std::get<Array>(data_);
    if (arr.empty()) {
      out += "[]";
      return;
    }
    out += '[';
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out += i ? "," : "";
      out += nl;
      out += pad;
      arr[i].write(out, indent, depth + 1);
    }
    out += nl;
    out += closing_pad;
    out += ']';
  } else {
    const auto& obj = std::get<Object>(data_);
    if (obj.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    for (std::size_t i = 0; i < obj.size(); ++i) {
      out += i ? "," : "";
      out += nl;
      out += pad;
      write_escaped(out, obj[i].first);
      out += indent > 0 ? ": " : ":";
      obj[i].second.write(out, indent, depth + 1);
    }
    out += nl;
    out += closing_pad;
    out += '}';
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  return out;
}

}  // namespace poisest
