#include "libpin/signature.hpp"

#include <openssl/evp.h>

#include <memory>

#include "libpin/error.hpp"

namespace libpin {

namespace {

constexpr std::string_view kCanonicalHeader = "libpin-canonical/1 ";

void append_field(std::string& out, std::string_view value) {
  out += std::to_string(value.size());
  out += ':';
  out += value;
}

}  // namespace

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (const auto byte : digest) {
    out += kHex[byte >> 4];
    out += kHex[byte & 0x0f];
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) {
    throw Error(ErrorCode::schema_violation, "digest must be 64 hex characters");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorCode::schema_violation, "invalid hex digit in digest");
  };
  Digest out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

Digest sha256(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  Digest out{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &length) != 1 || length != out.size()) {
    throw Error(ErrorCode::io_failure, "sha256 digest failed");
  }
  return out;
}

std::string canonical_form(const Profile& profile, Level level) {
  std::string out(kCanonicalHeader);
  out += to_string(level);
  out += '\n';
  const bool with_features = level == Level::code_level;
  for (const auto& node : profile.classes()) {
    out += "C ";
    append_field(out, node->name().str());
    out += '\n';
    for (const auto& method : node->methods()) {
      out += "M ";
      append_field(out, method.to_string());
      out += '\n';
      if (!with_features) {
        continue;
      }
      const FeatureVector* features = node->features_for(method);
      if (features == nullptr) {
        continue;
      }
      for (const auto& [item, count] : features->entries()) {
        out += "F ";
        out += to_string(item.kind);
        out += ' ';
        out += std::to_string(count);
        out += ' ';
        append_field(out, item.value);
        out += '\n';
      }
    }
  }
  return out;
}

Signature signature(const Profile& profile, Level level) {
  if (level == Level::code_level && profile.level() != Level::code_level) {
    throw Error(ErrorCode::level_unavailable, "code-level signature requested on a class-level profile");
  }
  return Signature{sha256(canonical_form(profile, level)), level};
}

}  // namespace libpin
