#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "libpin/database.hpp"
#include "libpin/profile.hpp"
#include "libpin/rational.hpp"

namespace libpin {

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
};

enum class DuplicationPattern { complete_inclusion, partial_inclusion, multi_party_sharing };

std::string_view to_string(DuplicationPattern pattern);
DuplicationPattern parse_duplication_pattern(std::string_view text);

/// A participant may be named or given by position in the library list.
using LibraryRef = std::variant<std::string, std::size_t>;

/// A shared region of classes carried by several libraries.
///
/// complete_inclusion [A, B]: B consists of the region only, version j of B
///   being region version j; A embeds region snapshots.
/// partial_inclusion [A, B]: B owns the region next to its own classes
///   (version j carries region version j); A embeds snapshots.
/// multi_party_sharing [P1, P2, ...]: no owner; every participant embeds
///   snapshots.
///
/// `presence` maps a participant's version index to the region version it
/// embeds; versions not listed carry no region. When a participant is not
/// listed, owners carry the region everywhere and the others carry it in all
/// but their last version, mapped monotonically onto the region history.
struct SharingGroup {
  DuplicationPattern pattern = DuplicationPattern::partial_inclusion;
  std::vector<LibraryRef> participants;
  IntRange region_classes{4, 8};
  std::optional<std::size_t> region_versions;  // defaults from the owner, else 2
  std::map<std::size_t, std::map<std::size_t, std::size_t>> presence;  // participant position -> (version -> region version)
};

struct LibraryOverride {
  std::string name;                       // generated when empty
  std::optional<std::string> prefix;      // class-name prefix, may be shared
  std::optional<std::size_t> versions;
  std::optional<IntRange> classes;
  std::vector<std::string> version_names;  // release order; generated when empty
};

struct AppUse {
  LibraryRef library;
  std::variant<std::string, std::size_t> version;  // version string or release index
};

struct FixedApp {
  std::vector<AppUse> uses;
  std::optional<double> customization_rate;
  std::optional<std::int64_t> app_classes;
};

struct AppPlan {
  std::size_t count = 0;              // random apps, after the fixed ones
  IntRange libraries_per_app{1, 3};
  double customization_rate = 0.0;
  IntRange app_classes{0, 10};        // app-authored classes with no library counterpart
  std::vector<LibraryRef> pool;       // libraries random apps draw from; empty = all
  std::vector<FixedApp> fixed;
};

struct CorpusSpec {
  std::uint64_t seed = 1;
  std::size_t library_count = 4;
  IntRange versions_per_library{2, 4};
  IntRange classes_per_version{4, 10};
  IntRange methods_per_class{2, 6};
  RealRange feature_density{2.0, 5.0};  // distinct feature items per method
  bool code_level = true;
  double code_only_release_rate = 0.3;  // releases that change code features only
  double empty_version_rate = 0.0;      // versions generated with an empty profile
  std::vector<LibraryOverride> libraries;
  std::vector<SharingGroup> duplication;
  AppPlan apps;
};

/// Parses a JSON corpus spec document (see docs/corpus-spec.md).
CorpusSpec parse_corpus_spec(std::string_view document);

struct GeneratedApp {
  std::string id;
  Profile profile;
};

struct IntegratedLibrary {
  LibraryVersionId id;
  std::vector<ClassName> classes;  // as present in the app, sorted
};

/// Per app id, the integrated library versions. Class sets within one app are
/// pairwise disjoint.
using GroundTruth = std::map<std::string, std::vector<IntegratedLibrary>>;

/// Overlap between two participant versions predicted from the region model.
struct ScheduledOverlap {
  LibraryVersionId a;
  LibraryVersionId b;
  Rational ratio;
};

struct Corpus {
  LibraryDatabase database;
  std::vector<GeneratedApp> apps;
  GroundTruth truth;
  std::vector<ScheduledOverlap> schedule;
};

/// Deterministic in the seed. Throws InfeasibleSpec when a sharing group
/// admits no conflict-free version pair or an app cannot be assembled, and
/// InvalidArgument for malformed ranges or references.
Corpus generate_corpus(const CorpusSpec& spec);

/// Writes <dir>/db (database + index), <dir>/apps/<id>.profile,
/// <dir>/truth.json and <dir>/schedule.json.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

std::string truth_to_json(const GroundTruth& truth);
/// app id -> [{library, version, classes?}].
GroundTruth parse_truth(std::string_view document);

}  // namespace libpin
