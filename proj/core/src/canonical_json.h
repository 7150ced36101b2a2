#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"

namespace fusionlab::detail {

using json = nlohmann::json;

// Sorted keys, two-space indentation, integers verbatim, doubles with 17
// significant digits, trailing newline. Non-finite doubles are rejected.
std::string canonical_dump(const json& value);

// Throws std::invalid_argument with the parser's message on malformed text.
json parse_json(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Typed field access that reports the offending key.
double get_number(const json& obj, const char* key, double fallback);
long long get_integer(const json& obj, const char* key, long long fallback);
std::uint64_t get_unsigned(const json& obj, const char* key, std::uint64_t fallback);
bool get_bool(const json& obj, const char* key, bool fallback);
std::string get_string(const json& obj, const char* key, const std::string& fallback);
// Throws when `obj` has a key outside `allowed`.
void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const char* where);

}  // namespace fusionlab::detail

namespace fusionlab {
struct ExperimentConfig;
namespace detail {
json config_json(const ExperimentConfig& c);
ExperimentConfig config_from(const json& j);
}  // namespace detail
}  // namespace fusionlab
