#include "libpin/version_detect.hpp"

#include <algorithm>
#include <set>

#include "libpin/error.hpp"

namespace libpin {

std::string_view to_string(VersionPhase phase) {
  return phase == VersionPhase::code_level ? "code_level" : "class_level";
}

std::string_view to_string(VerdictQuality quality) {
  switch (quality) {
    case VerdictQuality::correct: return "correct";
    case VerdictQuality::sound: return "sound";
    case VerdictQuality::incorrect: return "incorrect";
  }
  return "incorrect";
}

VersionVerdict class_level_verdict(const LibraryInstance& instance) {
  VersionVerdict verdict;
  verdict.instance = instance;
  verdict.candidates_in = instance.versions;
  verdict.candidates_out = instance.versions;
  verdict.phase = VersionPhase::class_level;
  return verdict;
}

namespace {

std::vector<const Profile*> candidate_profiles(const std::vector<std::string>& candidates, std::string_view library,
                                               const LibraryDatabase& db) {
  std::vector<const Profile*> out;
  out.reserve(candidates.size());
  for (const auto& version : candidates) {
    const DatabaseEntry* entry = db.find({std::string(library), version});
    if (entry == nullptr) {
      throw Error(ErrorCode::unknown_version, std::string(library) + "@" + version + " is not in the database");
    }
    if (entry->profile->level() != Level::code_level) {
      throw Error(ErrorCode::code_level_unavailable, entry->id.str() + " has no code-level profile");
    }
    out.push_back(entry->profile.get());
  }
  return out;
}

const FeatureVector& features_or_empty(const ClassNode* node, const MethodKey& key) {
  static const FeatureVector kEmpty;
  if (node == nullptr) {
    return kEmpty;
  }
  const FeatureVector* v = node->features_for(key);
  return v == nullptr ? kEmpty : *v;
}

}  // namespace

std::vector<QualifiedMethod> inconsistent_methods(const std::vector<std::string>& candidates,
                                                  std::string_view library, const LibraryDatabase& db) {
  const auto profiles = candidate_profiles(candidates, library, db);
  std::set<QualifiedMethod> all;
  for (const Profile* p : profiles) {
    for (const auto& node : p->classes()) {
      for (const auto& m : node->methods()) {
        all.emplace(node->name(), m);
      }
    }
  }
  std::vector<QualifiedMethod> out;
  for (const auto& qm : all) {
    const FeatureVector* first = nullptr;
    bool consistent = true;
    for (const Profile* p : profiles) {
      const ClassNode* node = p->find(qm.first);
      if (node == nullptr || !node->defines(qm.second)) {
        consistent = false;
        break;
      }
      const FeatureVector& v = features_or_empty(node, qm.second);
      if (first == nullptr) {
        first = &v;
      } else if (!(*first == v)) {
        consistent = false;
        break;
      }
    }
    if (!consistent) {
      out.push_back(qm);
    }
  }
  return out;
}

VersionVerdict refine_versions(const LibraryInstance& instance, const Profile& app,
                               const std::vector<std::string>& candidates, const LibraryDatabase& db) {
  VersionVerdict verdict;
  verdict.instance = instance;
  verdict.candidates_in = candidates;
  verdict.phase = VersionPhase::code_level;
  if (app.level() != Level::code_level) {
    throw Error(ErrorCode::code_level_unavailable, "app profile has no code-level features");
  }
  if (candidates.size() < 2) {
    // Nothing to discriminate; still validate the candidates.
    candidate_profiles(candidates, instance.library, db);
    verdict.candidates_out = candidates;
    for (const auto& v : candidates) {
      verdict.similarity.emplace(v, Rational(0));
    }
    return verdict;
  }

  const auto profiles = candidate_profiles(candidates, instance.library, db);
  std::set<std::string> instance_classes;
  for (const auto& cls : instance.classes) {
    instance_classes.insert(cls.name.str());
  }
  std::vector<std::pair<const ClassNode*, MethodKey>> present;  // N, with the app's node
  for (auto& [cls, method] : inconsistent_methods(candidates, instance.library, db)) {
    if (!instance_classes.contains(cls.str())) {
      continue;
    }
    const ClassNode* node = app.find(cls);
    if (node != nullptr && node->defines(method)) {
      present.emplace_back(node, std::move(method));
    }
  }

  std::vector<Rational> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (const auto& [app_node, method] : present) {
      scores[i] += feature_similarity(features_or_empty(app_node, method),
                                      features_or_empty(profiles[i]->find(app_node->name()), method));
    }
    verdict.similarity.emplace(candidates[i], scores[i]);
  }
  if (present.empty()) {
    verdict.candidates_out = candidates;
    return verdict;
  }
  const Rational best = *std::max_element(scores.begin(), scores.end());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (scores[i] == best) {
      verdict.candidates_out.push_back(candidates[i]);
    }
  }
  return verdict;
}

VerdictQuality verdict_quality(const std::vector<std::string>& detected, std::string_view truth) {
  const bool contains = std::find(detected.begin(), detected.end(), truth) != detected.end();
  if (!contains) {
    return VerdictQuality::incorrect;
  }
  return detected.size() == 1 ? VerdictQuality::correct : VerdictQuality::sound;
}

}  // namespace libpin
