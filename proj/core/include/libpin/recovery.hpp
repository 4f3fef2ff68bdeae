#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "libpin/index.hpp"
#include "libpin/profile.hpp"
#include "libpin/rational.hpp"

namespace libpin {

struct Match {
  const ClassEntry* entry = nullptr;  // points into the ClassIndex
  Rational score;                     // class_similarity, always > 0
};

/// Library classes sharing the app class's name with non-zero method-set
/// similarity, in index order.
struct Counterparts {
  ClassName app_class;
  std::vector<Match> matches;
};

Counterparts counterparts(const ClassNode& ac, const ClassIndex& index);

/// App classes arranged by possible provenance. Settled nodes hold classes
/// whose counterparts all come from one library; floating nodes are keyed by
/// the sorted set (size >= 2) of libraries their counterparts come from.
/// Every library seen in any counterpart owns a settled node, possibly empty.
/// A floating node is a successor of each settled node in its key.
struct RegionGraph {
  std::map<std::string, std::vector<ClassName>> settled;
  std::map<std::vector<std::string>, std::vector<ClassName>> floating;
  std::vector<ClassName> unmatched;
  std::map<std::string, Counterparts> counterparts;  // by canonical app class name

  /// Floating keys containing `library`, in key order.
  [[nodiscard]] std::vector<std::vector<std::string>> successors(std::string_view library) const;
};

RegionGraph build_region_graph(const Profile& app, const ClassIndex& index);

struct Indicators {
  std::size_t matched = 0;  // |M(C, Vx)|
  Rational sim_s;           // Σ sim over M
  Rational sim_a;           // sim_s / |M|, 0 when M is empty
  Rational prop;            // |M| / |Vx|
  Rational comp;            // |M| / |C|, 0 when C is empty
};

// The candidate-level functions below look up each class's counterparts in
// `graph.counterparts`; classes absent from it contribute nothing.

/// Throws UnknownVersion when `version` is not indexed.
Indicators indicators(std::span<const ClassName> candidate, const LibraryVersionId& version,
                      const RegionGraph& graph, const ClassIndex& index);

/// Argmax of Sim_s over the library's non-empty versions, every tying version
/// included, in release order. The empty candidate yields all of them.
std::vector<std::string> best_version_set(std::span<const ClassName> candidate, std::string_view library,
                                          const RegionGraph& graph, const ClassIndex& index);

/// Max over V_p of Sim_a * Prop * Comp; 0 for the empty candidate.
Rational candidate_score(std::span<const ClassName> candidate, std::string_view library,
                         const RegionGraph& graph, const ClassIndex& index);

/// V_p(candidate) ∩ V_p({floating_class}) ≠ ∅ within `library`.
bool compatible(std::span<const ClassName> candidate, const ClassName& floating_class, std::string_view library,
                const RegionGraph& graph, const ClassIndex& index);

struct InstanceClass {
  ClassName name;
  Rational score;  // similarity to its counterpart at the scoring version, else the best in the library
};

struct LibraryInstance {
  std::string library;
  std::vector<InstanceClass> classes;  // by canonical name
  std::vector<std::string> versions;   // V_p, release order
  Rational score;
  Indicators indicators;               // evaluated at scoring_version
  std::string scoring_version;         // first V_p version attaining the score
};

struct RecoveryResult {
  std::vector<LibraryInstance> instances;  // by library name
  std::vector<ClassName> residual;         // held by discarded candidates or never settled
  std::vector<ClassName> unmatched;        // no counterparts at all
};

/// Two-round floating-class attribution. Round one walks non-empty settled
/// candidates by size (descending, then library name) and moves every
/// compatible floating class in, refreshing V_p after each move. Round two
/// scores every candidate extended by its successors and repeatedly accepts
/// the best-scoring one (ties by library name), absorbing its floating
/// nodes and rescoring the candidates that shared them.
RecoveryResult filter_candidates(const RegionGraph& graph, const ClassIndex& index);

/// build_region_graph followed by filter_candidates.
RecoveryResult recover(const Profile& app, const ClassIndex& index);

}  // namespace libpin
