#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "libpin/database.hpp"
#include "libpin/profile.hpp"
#include "libpin/rational.hpp"
#include "libpin/version_detect.hpp"

namespace libpin {

// ---- overlap --------------------------------------------------------------

/// Shared class names over a's class count. Throws EmptyProfile if a is empty.
Rational overlap(const Profile& a, const Profile& b);

/// overlap(a_y, b_x) for every pair of non-empty versions; rows follow a's
/// release order, columns b's.
struct OverlapMatrix {
  std::string a;
  std::string b;
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<Rational>> ratio;
};

OverlapMatrix overlap_matrix(std::string_view a, std::string_view b, const LibraryDatabase& db);

/// Max over all version pairs. Throws EmptyProfile when either library has
/// no non-empty version.
Rational library_overlap(std::string_view a, std::string_view b, const LibraryDatabase& db);

struct PairOverlap {
  std::string a;
  std::string b;
  Rational ratio;         // library_overlap(a, b)
  std::string a_version;  // first pair attaining it
  std::string b_version;
};

/// Every ordered pair with a non-zero overlap; both directions are kept.
struct OverlapReport {
  std::vector<PairOverlap> pairs;  // sorted by (a, b)
};

OverlapReport overlap_report(const LibraryDatabase& db);

// ---- uniqueness -----------------------------------------------------------

struct UniquenessGroup {
  std::string signature;                  // hex digest
  std::vector<LibraryVersionId> members;  // database order
};

struct UniquenessReport {
  Level level = Level::class_level;
  std::size_t profiles = 0;
  std::vector<UniquenessGroup> groups;         // ordered by first member
  std::map<std::size_t, std::size_t> histogram;  // group size -> group count
};

/// Partitions non-empty profiles by signature. At code level only code-level
/// entries take part.
UniquenessReport uniqueness_groups(const LibraryDatabase& db, Level level);

// ---- vulnerability triage -------------------------------------------------

/// Explicit version set or bounds over the database's release order.
/// Bounds combine conjunctively; no semantic-version parsing happens.
struct VersionPredicate {
  std::vector<std::string> set;
  std::optional<std::string> min_inclusive;
  std::optional<std::string> min_exclusive;
  std::optional<std::string> max_inclusive;
  std::optional<std::string> max_exclusive;

  [[nodiscard]] bool is_set() const {
    return !min_inclusive && !min_exclusive && !max_inclusive && !max_exclusive;
  }
  /// Throws InvalidArgument if a bound does not name a version in
  /// `release_order`, or `version` itself is unknown for a bounded predicate.
  [[nodiscard]] bool matches(std::string_view version, const std::vector<std::string>& release_order) const;
};

struct Advisory {
  std::string library;
  VersionPredicate vulnerable;
  std::string reference;
};

/// Accepts one advisory object or an array of them:
/// {library, vulnerable:{set:[..]} | {max_inclusive|max_exclusive|min_inclusive|min_exclusive: v}, reference}
std::vector<Advisory> parse_advisories(std::string_view document);

enum class Triage { vulnerable, risky, safe, not_applicable };

std::string_view to_string(Triage triage);

Triage classify(std::string_view library, const std::vector<std::string>& detected, const Advisory& advisory,
                const std::vector<std::string>& release_order);

Triage classify(const VersionVerdict& verdict, const Advisory& advisory, const LibraryDatabase& db);

}  // namespace libpin
