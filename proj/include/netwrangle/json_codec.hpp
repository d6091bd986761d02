#pragma once

#include <string>

#include "json.hpp"

#include "netwrangle/value.hpp"

namespace nw {

using Json = nlohmann::ordered_json;

/// Value -> JSON. Integral numbers within 2^53 encode as JSON integers so
/// that "3" and "3.0" both round-trip to the same text.
Json toJson(const Value& value);
Value fromJson(const Json& json);

/// Recursively sorts object keys, except keys listed in `reserved`, which
/// come first in the listed order.
Json canonicalize(const Json& json, std::initializer_list<const char*> reserved = {});

/// Canonical document text: sorted keys, two-space indent, trailing newline.
std::string dumpDocument(const Json& json);

/// Compact single-line form used inside CSV cells and expressions.
std::string dumpCompact(const Json& json);

}  // namespace nw
