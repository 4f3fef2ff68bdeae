#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "libpin/database.hpp"
#include "libpin/profile.hpp"
#include "libpin/rational.hpp"
#include "libpin/recovery.hpp"

namespace libpin {

enum class VersionPhase { class_level, code_level };

std::string_view to_string(VersionPhase phase);

struct VersionVerdict {
  LibraryInstance instance;
  std::vector<std::string> candidates_in;   // release order
  std::vector<std::string> candidates_out;  // subset of candidates_in, never empty
  VersionPhase phase = VersionPhase::class_level;
  std::map<std::string, Rational> similarity;  // code-level score per candidate
};

/// Class-level verdict: the instance's V_p, unrefined.
VersionVerdict class_level_verdict(const LibraryInstance& instance);

using QualifiedMethod = std::pair<ClassName, MethodKey>;

/// Methods whose feature vectors differ between at least two candidates,
/// plus methods defined by only some of them. Throws CodeLevelUnavailable if
/// a candidate is not a code-level profile, UnknownVersion if one is missing.
std::vector<QualifiedMethod> inconsistent_methods(const std::vector<std::string>& candidates,
                                                  std::string_view library, const LibraryDatabase& db);

/// Scores each candidate by Σ feature_similarity over the inconsistent
/// methods the app's copy still defines, and keeps the argmax set. With no
/// such method the input set is returned unchanged.
VersionVerdict refine_versions(const LibraryInstance& instance, const Profile& app,
                               const std::vector<std::string>& candidates, const LibraryDatabase& db);

enum class VerdictQuality { correct, sound, incorrect };

std::string_view to_string(VerdictQuality quality);

VerdictQuality verdict_quality(const std::vector<std::string>& detected, std::string_view truth);
inline VerdictQuality verdict_quality(const VersionVerdict& verdict, std::string_view truth) {
  return verdict_quality(verdict.candidates_out, truth);
}

}  // namespace libpin
