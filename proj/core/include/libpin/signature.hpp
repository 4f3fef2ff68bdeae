#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "libpin/profile.hpp"

namespace libpin {

inline constexpr std::string_view kDigestAlgorithm = "sha256";

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& digest);
Digest digest_from_hex(std::string_view hex);
Digest sha256(std::string_view bytes);

struct Signature {
  Digest digest{};
  Level level = Level::class_level;

  [[nodiscard]] std::string hex() const { return to_hex(digest); }
  friend bool operator==(const Signature&, const Signature&) = default;
};

// Length-prefixed canonical text: classes by canonical name, methods by
// (kind, selector), feature items by (kind, value). The class-level form
// omits feature maps entirely.
std::string canonical_form(const Profile& profile, Level level);

/// Throws LevelUnavailable when `level` is code_level and the profile is not.
Signature signature(const Profile& profile, Level level);

}  // namespace libpin
