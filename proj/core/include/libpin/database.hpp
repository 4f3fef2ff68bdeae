#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "libpin/profile.hpp"
#include "libpin/signature.hpp"

namespace libpin {

inline constexpr int kDatabaseFormatVersion = 1;

struct LibraryVersionId {
  std::string library;
  std::string version;

  [[nodiscard]] std::string str() const { return library + "@" + version; }

  friend bool operator==(const LibraryVersionId&, const LibraryVersionId&) = default;
  friend std::strong_ordering operator<=>(const LibraryVersionId&, const LibraryVersionId&) = default;
};

struct DatabaseMetadata {
  std::string created = "1970-01-01T00:00:00Z";
  std::string digest_algorithm{kDigestAlgorithm};
  int format_version = kDatabaseFormatVersion;
};

struct DatabaseEntry {
  LibraryVersionId id;
  std::shared_ptr<const Profile> profile;
  Signature class_signature;
  std::optional<Signature> code_signature;

  /// Empty profiles stay in the database but never take part in matching.
  [[nodiscard]] bool empty() const { return profile->empty(); }
};

/// All collected library versions. Entries are grouped by library (libraries
/// in name order) and, within a library, kept in release order: the order
/// in which the versions were supplied to build_database.
class LibraryDatabase {
 public:
  struct Library {
    std::string name;
    std::vector<std::size_t> entries;  // release order
  };

  LibraryDatabase() = default;

  [[nodiscard]] std::span<const DatabaseEntry> entries() const noexcept { return entries_; }
  [[nodiscard]] std::span<const Library> libraries() const noexcept { return libraries_; }
  [[nodiscard]] const DatabaseMetadata& metadata() const noexcept { return metadata_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] std::size_t empty_count() const;

  [[nodiscard]] const DatabaseEntry* find(const LibraryVersionId& id) const;
  [[nodiscard]] const Library* library(std::string_view name) const;
  /// Version strings of `library` in release order; empty if unknown.
  [[nodiscard]] std::vector<std::string> versions_of(std::string_view library) const;
  /// Position of `version` in the library's release order.
  [[nodiscard]] std::optional<std::size_t> release_index(std::string_view library,
                                                         std::string_view version) const;

  /// Digest over format version and the ordered (id, signatures) list.
  /// Creation time is excluded so rebuilding identical content is not stale.
  [[nodiscard]] Digest manifest_digest() const;

 private:
  friend LibraryDatabase build_database(std::vector<std::pair<LibraryVersionId, Profile>> items,
                                        DatabaseMetadata metadata);

  std::vector<DatabaseEntry> entries_;
  std::vector<Library> libraries_;
  std::map<LibraryVersionId, std::size_t> by_id_;
  DatabaseMetadata metadata_;
};

/// Throws DuplicateId on a repeated (library, version). Library and version
/// strings must be usable as single path components.
LibraryDatabase build_database(std::vector<std::pair<LibraryVersionId, Profile>> items,
                               DatabaseMetadata metadata = {});

// On-disk layout:
//   <dir>/manifest                              JSON metadata + ordered entry list
//   <dir>/profiles/<library>/<version>.profile  one interchange document per entry
void save_database(const LibraryDatabase& db, const std::filesystem::path& dir);
LibraryDatabase load_database(const std::filesystem::path& dir);

/// Digest recorded in an on-disk manifest, without loading profiles.
Digest read_manifest_digest(const std::filesystem::path& dir);

struct ProfileTreeError {
  std::filesystem::path file;
  std::string message;
};

struct ProfileTree {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  std::vector<ProfileTreeError> errors;
};

/// Scans `<root>/<library>/<version>.profile`. Versions of one library are
/// ordered by `<root>/<library>/ORDER` (one version per line) when present,
/// otherwise by natural order (digit runs compared numerically). Parse
/// failures are collected rather than thrown.
ProfileTree read_profile_tree(const std::filesystem::path& root);

/// Digit-run-aware string ordering used when no ORDER file is supplied.
bool natural_less(std::string_view a, std::string_view b);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::string utc_timestamp_now();

}  // namespace libpin
