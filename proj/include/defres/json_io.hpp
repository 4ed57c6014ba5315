#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace defres {

using Json = nlohmann::ordered_json;

/// Deterministic JSON text: floating-point numbers in "%.16e" (17 significant
/// digits), non-finite numbers as null, two-space indentation.
std::string to_text(const Json& j);

/// Same number format for CSV cells; non-finite values print as "nan"/"inf".
std::string format_number(double v);

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace defres
