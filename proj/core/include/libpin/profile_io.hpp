#pragma once

#include <string>
#include <string_view>

#include "libpin/profile.hpp"

namespace libpin {

inline constexpr int kProfileFormatVersion = 1;

/// Parses a profile interchange document (JSON, UTF-8). Errors:
/// MalformedDocument for syntax, SchemaViolation for structure, DuplicateName
/// for repeated class names or method keys.
Profile parse_profile(std::string_view document);

/// Canonical interchange rendering: sorted keys and arrays, no whitespace.
/// parse_profile(serialize_profile(p)) == p.
std::string serialize_profile(const Profile& profile);

}  // namespace libpin
