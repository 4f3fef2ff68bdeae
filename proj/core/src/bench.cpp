#include "libpin/bench.hpp"

#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "libpin/error.hpp"

namespace libpin {

void VerdictTally::add(VerdictQuality q) {
  switch (q) {
    case VerdictQuality::correct: ++correct; break;
    case VerdictQuality::sound: ++sound; break;
    case VerdictQuality::incorrect: ++incorrect; break;
  }
}

BenchSummary run_bench(const std::vector<std::pair<std::string, Profile>>& apps, const GroundTruth& truth,
                       const ClassIndex& index, const LibraryDatabase& db, const ScanOptions& options) {
  std::set<std::string> ids;
  for (const auto& [id, app] : apps) {
    if (!truth.count(id)) {
      throw Error(ErrorCode::invalid_argument, "app '" + id + "' has no ground truth");
    }
    ids.insert(id);
  }
  for (const auto& [id, uses] : truth) {
    if (!ids.count(id)) {
      throw Error(ErrorCode::invalid_argument, "ground truth names app '" + id + "' which was not supplied");
    }
  }

  BenchSummary s;
  s.refined = options.code_level;
  ScanOptions plain = options;
  plain.advisories.clear();
  for (const auto& [id, app] : apps) {
    ++s.apps;
    std::map<std::string, std::string> expected;
    for (const auto& use : truth.at(id)) expected[use.id.library] = use.id.version;
    s.uses += expected.size();

    const ScanReport report = scan_app(id, app, index, db, plain);
    std::set<std::string> found;
    for (const auto& r : report.instances) {
      const auto it = expected.find(r.instance.library);
      if (it == expected.end()) {
        ++s.false_positives;
        continue;
      }
      ++s.true_positives;
      found.insert(it->first);
      s.class_level.add(verdict_quality(r.instance.versions, it->second));
      if (options.code_level) s.code_level.add(verdict_quality(r.verdict, it->second));
    }
    s.false_negatives += expected.size() - found.size();
  }
  const auto tp = static_cast<std::int64_t>(s.true_positives);
  const auto fp = static_cast<std::int64_t>(s.false_positives);
  const auto fn = static_cast<std::int64_t>(s.false_negatives);
  s.precision = tp + fp == 0 ? Rational(1) : Rational(tp, tp + fp);
  s.recall = tp + fn == 0 ? Rational(1) : Rational(tp, tp + fn);
  return s;
}

namespace {

nlohmann::ordered_json tally_json(const VerdictTally& t) {
  auto pct = [&t](std::size_t n) {
    return t.total() == 0 ? std::string("0") : to_decimal_string(Rational(static_cast<std::int64_t>(n) * 100,
                                                                          static_cast<std::int64_t>(t.total())), 2);
  };
  return {{"correct", t.correct},
          {"sound", t.sound},
          {"incorrect", t.incorrect},
          {"correct_pct", pct(t.correct)},
          {"sound_pct", pct(t.sound)},
          {"incorrect_pct", pct(t.incorrect)}};
}

}  // namespace

std::string bench_to_json(const BenchSummary& s) {
  nlohmann::ordered_json root;
  root["apps"] = s.apps;
  root["uses"] = s.uses;
  root["true_positives"] = s.true_positives;
  root["false_positives"] = s.false_positives;
  root["false_negatives"] = s.false_negatives;
  root["precision"] = to_exact_string(s.precision);
  root["precision_decimal"] = to_decimal_string(s.precision);
  root["recall"] = to_exact_string(s.recall);
  root["recall_decimal"] = to_decimal_string(s.recall);
  root["class_level"] = tally_json(s.class_level);
  if (s.refined) root["code_level"] = tally_json(s.code_level);
  return root.dump(2) + "\n";
}

std::string bench_to_text(const BenchSummary& s) {
  std::ostringstream out;
  out << "apps " << s.apps << "  uses " << s.uses << "\n";
  out << "TP " << s.true_positives << "  FP " << s.false_positives << "  FN " << s.false_negatives << "\n";
  out << "precision " << to_decimal_string(s.precision) << "  recall " << to_decimal_string(s.recall) << "\n";
  auto line = [&out](const char* name, const VerdictTally& t) {
    out << name << "  correct " << t.correct << "  sound " << t.sound << "  incorrect " << t.incorrect << "\n";
  };
  line("class-level", s.class_level);
  if (s.refined) line("code-level", s.code_level);
  return out.str();
}

}  // namespace libpin
