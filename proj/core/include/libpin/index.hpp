#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "libpin/database.hpp"
#include "libpin/profile.hpp"
#include "libpin/signature.hpp"

namespace libpin {

inline constexpr std::uint32_t kIndexFormatVersion = 1;

/// Dense handle for one library version inside a ClassIndex.
struct VersionRef {
  std::uint32_t library = 0;
  std::uint32_t version = 0;  // position in the library's release order

  friend bool operator==(const VersionRef&, const VersionRef&) = default;
  friend std::strong_ordering operator<=>(const VersionRef&, const VersionRef&) = default;
};

/// One occurrence of a class name in a library version. The node carries the
/// method set so similarity needs no second fetch.
struct ClassEntry {
  VersionRef version;
  ClassNodePtr node;
};

class ClassIndex {
 public:
  struct LibraryVersions {
    std::string name;
    std::vector<std::string> versions;          // release order, empty versions included
    std::vector<std::uint32_t> class_counts;    // parallel to versions
  };

  ClassIndex() = default;

  /// Entries sorted by (library name, release order); empty when unknown.
  [[nodiscard]] std::span<const ClassEntry> lookup(std::string_view canonical) const;
  [[nodiscard]] std::span<const ClassEntry> lookup(const ClassName& name) const {
    return lookup(name.str());
  }

  [[nodiscard]] std::span<const LibraryVersions> libraries() const noexcept { return libraries_; }
  [[nodiscard]] std::optional<std::uint32_t> library_id(std::string_view name) const;
  [[nodiscard]] std::optional<VersionRef> find(const LibraryVersionId& id) const;
  [[nodiscard]] LibraryVersionId id_of(VersionRef ref) const;
  [[nodiscard]] std::uint32_t class_count(VersionRef ref) const;
  [[nodiscard]] std::uint32_t class_count(const LibraryVersionId& id) const;

  [[nodiscard]] const Digest& manifest_digest() const noexcept { return manifest_digest_; }
  [[nodiscard]] std::vector<std::string> names() const;  // sorted
  [[nodiscard]] std::size_t name_count() const noexcept { return table_.size(); }
  [[nodiscard]] std::size_t entry_count() const noexcept;

 private:
  friend ClassIndex build_index(const LibraryDatabase& db);
  friend ClassIndex load_index(const std::filesystem::path& path, const std::optional<Digest>& expected);

  std::unordered_map<std::string, std::vector<ClassEntry>> table_;
  std::vector<LibraryVersions> libraries_;
  Digest manifest_digest_{};
};

/// Unfolds every class of every non-empty entry, keyed by canonical name.
ClassIndex build_index(const LibraryDatabase& db);

/// Binary layout is documented in docs/index-format.md.
void save_index(const ClassIndex& index, const std::filesystem::path& path);

/// IoFailure on unreadable or truncated files; StaleIndex when `expected` is
/// given and differs from the recorded manifest digest.
ClassIndex load_index(const std::filesystem::path& path, const std::optional<Digest>& expected = std::nullopt);

inline constexpr std::string_view kIndexFileName = "index.lpix";

}  // namespace libpin
