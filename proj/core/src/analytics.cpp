#include "libpin/analytics.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "libpin/error.hpp"

namespace libpin {

using nlohmann::json;

namespace {

std::size_t shared_names(const Profile& a, const Profile& b) {
  std::size_t shared = 0;
  const auto ca = a.classes();
  const auto cb = b.classes();
  auto ia = ca.begin();
  auto ib = cb.begin();
  while (ia != ca.end() && ib != cb.end()) {
    if ((*ia)->name() < (*ib)->name()) {
      ++ia;
    } else if ((*ib)->name() < (*ia)->name()) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return shared;
}

std::vector<const DatabaseEntry*> non_empty_versions(std::string_view library, const LibraryDatabase& db) {
  std::vector<const DatabaseEntry*> out;
  if (const auto* lib = db.library(library)) {
    for (const auto i : lib->entries) {
      if (!db.entries()[i].empty()) {
        out.push_back(&db.entries()[i]);
      }
    }
  }
  return out;
}

}  // namespace

Rational overlap(const Profile& a, const Profile& b) {
  if (a.empty()) {
    throw Error(ErrorCode::empty_profile, "overlap is undefined for an empty first profile");
  }
  return Rational(static_cast<std::int64_t>(shared_names(a, b)), static_cast<std::int64_t>(a.size()));
}

OverlapMatrix overlap_matrix(std::string_view a, std::string_view b, const LibraryDatabase& db) {
  OverlapMatrix m;
  m.a = std::string(a);
  m.b = std::string(b);
  const auto va = non_empty_versions(a, db);
  const auto vb = non_empty_versions(b, db);
  for (const auto* e : va) m.rows.push_back(e->id.version);
  for (const auto* e : vb) m.columns.push_back(e->id.version);
  m.ratio.reserve(va.size());
  for (const auto* ea : va) {
    std::vector<Rational> row;
    row.reserve(vb.size());
    for (const auto* eb : vb) {
      row.push_back(overlap(*ea->profile, *eb->profile));
    }
    m.ratio.push_back(std::move(row));
  }
  return m;
}

namespace {

PairOverlap max_overlap(std::string_view a, std::string_view b, const LibraryDatabase& db) {
  const auto va = non_empty_versions(a, db);
  const auto vb = non_empty_versions(b, db);
  if (va.empty() || vb.empty()) {
    throw Error(ErrorCode::empty_profile, "library overlap needs a non-empty version on both sides");
  }
  PairOverlap best{std::string(a), std::string(b), Rational(-1), {}, {}};
  for (const auto* ea : va) {
    for (const auto* eb : vb) {
      Rational r = overlap(*ea->profile, *eb->profile);
      if (r > best.ratio) {
        best.ratio = std::move(r);
        best.a_version = ea->id.version;
        best.b_version = eb->id.version;
      }
    }
  }
  return best;
}

}  // namespace

Rational library_overlap(std::string_view a, std::string_view b, const LibraryDatabase& db) {
  return max_overlap(a, b, db).ratio;
}

OverlapReport overlap_report(const LibraryDatabase& db) {
  // Only pairs that share at least one class name can overlap.
  std::map<std::string, std::set<std::string>> owners;
  for (const auto& entry : db.entries()) {
    for (const auto& node : entry.profile->classes()) {
      owners[node->name().str()].insert(entry.id.library);
    }
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& [name, libs] : owners) {
    for (const auto& x : libs) {
      for (const auto& y : libs) {
        if (x != y) pairs.emplace(x, y);
      }
    }
  }
  OverlapReport report;
  for (const auto& [a, b] : pairs) {
    PairOverlap p = max_overlap(a, b, db);
    if (p.ratio > 0) {
      report.pairs.push_back(std::move(p));
    }
  }
  return report;
}

UniquenessReport uniqueness_groups(const LibraryDatabase& db, Level level) {
  UniquenessReport report;
  report.level = level;
  std::map<std::string, std::size_t> by_signature;
  for (const auto& entry : db.entries()) {
    if (entry.empty()) {
      continue;
    }
    const Signature* sig = nullptr;
    if (level == Level::class_level) {
      sig = &entry.class_signature;
    } else if (entry.code_signature) {
      sig = &*entry.code_signature;
    } else {
      continue;
    }
    ++report.profiles;
    const std::string hex = sig->hex();
    const auto [it, inserted] = by_signature.try_emplace(hex, report.groups.size());
    if (inserted) {
      report.groups.push_back(UniquenessGroup{hex, {}});
    }
    report.groups[it->second].members.push_back(entry.id);
  }
  for (const auto& g : report.groups) {
    ++report.histogram[g.members.size()];
  }
  return report;
}

bool VersionPredicate::matches(std::string_view version, const std::vector<std::string>& release_order) const {
  if (is_set()) {
    return std::find(set.begin(), set.end(), version) != set.end();
  }
  auto position = [&release_order](std::string_view v) -> std::size_t {
    const auto it = std::find(release_order.begin(), release_order.end(), v);
    if (it == release_order.end()) {
      throw Error(ErrorCode::invalid_argument, "version '" + std::string(v) + "' is not in the release order");
    }
    return static_cast<std::size_t>(it - release_order.begin());
  };
  const std::size_t pos = position(version);
  if (min_inclusive && pos < position(*min_inclusive)) return false;
  if (min_exclusive && pos <= position(*min_exclusive)) return false;
  if (max_inclusive && pos > position(*max_inclusive)) return false;
  if (max_exclusive && pos >= position(*max_exclusive)) return false;
  if (!set.empty() && std::find(set.begin(), set.end(), version) == set.end()) return false;
  return true;
}

std::vector<Advisory> parse_advisories(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_document, e.what());
  }
  auto fail = [](const std::string& what) { throw Error(ErrorCode::schema_violation, "advisory: " + what); };
  auto parse_one = [&fail](const json& j) {
    if (!j.is_object()) fail("must be an object");
    Advisory adv;
    if (!j.contains("library") || !j["library"].is_string()) fail("missing library");
    adv.library = j["library"].get<std::string>();
    if (j.contains("reference")) {
      if (!j["reference"].is_string()) fail("reference must be a string");
      adv.reference = j["reference"].get<std::string>();
    }
    if (!j.contains("vulnerable") || !j["vulnerable"].is_object()) fail("missing vulnerable predicate");
    const json& v = j["vulnerable"];
    bool any = false;
    for (const auto& [key, value] : v.items()) {
      if (key == "set") {
        if (!value.is_array()) fail("set must be an array");
        for (const auto& s : value) {
          if (!s.is_string()) fail("set members must be strings");
          adv.vulnerable.set.push_back(s.get<std::string>());
        }
      } else {
        if (!value.is_string()) fail(key + " must be a version string");
        auto text = value.get<std::string>();
        if (key == "min_inclusive") adv.vulnerable.min_inclusive = text;
        else if (key == "min_exclusive") adv.vulnerable.min_exclusive = text;
        else if (key == "max_inclusive") adv.vulnerable.max_inclusive = text;
        else if (key == "max_exclusive") adv.vulnerable.max_exclusive = text;
        else fail("unknown predicate '" + key + "'");
      }
      any = true;
    }
    if (!any) fail("empty vulnerable predicate");
    return adv;
  };
  std::vector<Advisory> out;
  if (root.is_array()) {
    for (const auto& j : root) out.push_back(parse_one(j));
  } else {
    out.push_back(parse_one(root));
  }
  return out;
}

std::string_view to_string(Triage triage) {
  switch (triage) {
    case Triage::vulnerable: return "vulnerable";
    case Triage::risky: return "risky";
    case Triage::safe: return "safe";
    case Triage::not_applicable: return "not_applicable";
  }
  return "not_applicable";
}

Triage classify(std::string_view library, const std::vector<std::string>& detected, const Advisory& advisory,
                const std::vector<std::string>& release_order) {
  if (library != advisory.library) {
    return Triage::not_applicable;
  }
  std::size_t hits = 0;
  for (const auto& v : detected) {
    if (advisory.vulnerable.matches(v, release_order)) {
      ++hits;
    }
  }
  // An empty detection covers no vulnerable version.
  if (hits == 0) return Triage::safe;
  if (hits == detected.size()) return Triage::vulnerable;
  return Triage::risky;
}

Triage classify(const VersionVerdict& verdict, const Advisory& advisory, const LibraryDatabase& db) {
  return classify(verdict.instance.library, verdict.candidates_out, advisory,
                  db.versions_of(verdict.instance.library));
}

}  // namespace libpin
