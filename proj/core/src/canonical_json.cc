#include "canonical_json.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fusionlab/error.h"

namespace fusionlab::detail {

namespace {

void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(2 * depth), ' '); }

void dump_double(std::string& out, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("canonical_dump: non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void dump(std::string& out, const json& v, int depth) {
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann's default object type is an ordered std::map.
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        indent(out, depth + 1);
        out += json(it.key()).dump();
        out += ": ";
        dump(out, it.value(), depth + 1);
      }
      out += "\n";
      indent(out, depth);
      out += "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        indent(out, depth + 1);
        dump(out, v[i], depth + 1);
      }
      out += "\n";
      indent(out, depth);
      out += "]";
      return;
    }
    case json::value_t::number_float:
      dump_double(out, v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

[[noreturn]] void bad_type(const char* key, const char* expected) {
  throw std::invalid_argument(std::string("config: field '") + key + "' must be " + expected);
}

}  // namespace

std::string canonical_dump(const json& value) {
  std::string out;
  dump(out, value, 0);
  out += "\n";
  return out;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path);
}

double get_number(const json& obj, const char* key, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) bad_type(key, "a number");
  return v->get<double>();
}

long long get_integer(const json& obj, const char* key, long long fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) bad_type(key, "an integer");
  return v->get<long long>();
}

std::uint64_t get_unsigned(const json& obj, const char* key, std::uint64_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
    bad_type(key, "a nonnegative integer");
  }
  return v->get<std::uint64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad_type(key, "a boolean");
  return v->get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) bad_type(key, "a string");
  return v->get<std::string>();
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const char* where) {
  if (!obj.is_object()) {
    throw std::invalid_argument(std::string(where) + ": expected an object");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) {
      throw std::invalid_argument(std::string(where) + ": unknown field '" + it.key() + "'");
    }
  }
}

}  // namespace fusionlab::detail
