#include <gtest/gtest.h>

#include <json.hpp>

#include "builders.hpp"
#include "libpin/bench.hpp"
#include "libpin/error.hpp"
#include "libpin/index.hpp"

using namespace libpin;
using namespace libpin::test;

namespace {

std::vector<std::pair<std::string, Profile>> app_list(const Corpus& c) {
  std::vector<std::pair<std::string, Profile>> out;
  for (const auto& a : c.apps) out.emplace_back(a.id, a.profile);
  return out;
}

CorpusSpec single_library_apps(std::size_t apps) {
  CorpusSpec spec;
  spec.seed = 5;
  spec.library_count = 6;
  spec.versions_per_library = {3, 5};
  spec.apps.count = apps;
  spec.apps.libraries_per_app = {1, 1};
  spec.apps.app_classes = {0, 4};
  return spec;
}

}  // namespace

TEST(RunBench, PerfectRecovery) {
  const Corpus c = generate_corpus(single_library_apps(20));
  const auto index = build_index(c.database);
  const BenchSummary s = run_bench(app_list(c), c.truth, index, c.database, {});
  EXPECT_EQ(s.apps, 20u);
  EXPECT_EQ(s.uses, 20u);
  EXPECT_EQ(s.true_positives, 20u);
  EXPECT_EQ(s.precision, 1);
  EXPECT_EQ(s.recall, 1);
  EXPECT_EQ(s.class_level.total(), 20u);
  EXPECT_EQ(s.code_level.total(), 0u);
  EXPECT_FALSE(s.refined);
}

TEST(RunBench, OneSpuriousInstanceOverHundredUses) {
  const Corpus c = generate_corpus(single_library_apps(100));
  auto apps = app_list(c);
  // The first app also carries a library its truth does not mention.
  const std::string used = c.truth.at(apps[0].first)[0].id.library;
  const DatabaseEntry* extra = nullptr;
  for (const auto& e : c.database.entries()) {
    if (e.id.library != used && !e.empty()) {
      extra = &e;
      break;
    }
  }
  ASSERT_NE(extra, nullptr);
  std::vector<ClassNodePtr> nodes(apps[0].second.classes().begin(), apps[0].second.classes().end());
  nodes.insert(nodes.end(), extra->profile->classes().begin(), extra->profile->classes().end());
  apps[0].second = Profile(apps[0].second.level(), std::move(nodes));

  const auto index = build_index(c.database);
  const BenchSummary s = run_bench(apps, c.truth, index, c.database, {});
  EXPECT_EQ(s.uses, 100u);
  EXPECT_EQ(s.true_positives, 100u);
  EXPECT_EQ(s.false_positives, 1u);
  EXPECT_EQ(s.false_negatives, 0u);
  EXPECT_EQ(s.precision, Rational(100, 101));
  EXPECT_EQ(s.recall, 1);
}

TEST(RunBench, TalliesMatchPerUseRecount) {
  CorpusSpec spec = single_library_apps(40);
  spec.apps.libraries_per_app = {1, 3};
  spec.code_only_release_rate = 0.6;
  spec.apps.customization_rate = 0.1;
  spec.duplication.push_back({DuplicationPattern::partial_inclusion, {std::size_t{0}, std::size_t{1}}, {3, 5}});
  const Corpus c = generate_corpus(spec);
  const auto index = build_index(c.database);
  ScanOptions opts;
  opts.code_level = true;
  const BenchSummary s = run_bench(app_list(c), c.truth, index, c.database, opts);

  VerdictTally cl, code;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& app : c.apps) {
    const ScanReport r = scan_app(app.id, app.profile, index, c.database, opts);
    std::map<std::string, std::string> want;
    for (const auto& u : c.truth.at(app.id)) want[u.id.library] = u.id.version;
    std::size_t hit = 0;
    for (const auto& inst : r.instances) {
      const auto it = want.find(inst.instance.library);
      if (it == want.end()) {
        ++fp;
        continue;
      }
      ++hit;
      cl.add(verdict_quality(inst.instance.versions, it->second));
      code.add(verdict_quality(inst.verdict.candidates_out, it->second));
    }
    tp += hit;
    fn += want.size() - hit;
  }
  EXPECT_TRUE(s.refined);
  EXPECT_EQ(s.true_positives, tp);
  EXPECT_EQ(s.false_positives, fp);
  EXPECT_EQ(s.false_negatives, fn);
  EXPECT_EQ(s.class_level.correct, cl.correct);
  EXPECT_EQ(s.class_level.sound, cl.sound);
  EXPECT_EQ(s.class_level.incorrect, cl.incorrect);
  EXPECT_EQ(s.code_level.correct, code.correct);
  EXPECT_EQ(s.code_level.sound, code.sound);
  EXPECT_EQ(s.code_level.incorrect, code.incorrect);
  EXPECT_EQ(s.code_level.total(), tp);
}

TEST(RunBench, MismatchedTruthIsRejected) {
  const Corpus c = generate_corpus(single_library_apps(3));
  const auto index = build_index(c.database);
  auto apps = app_list(c);
  apps.pop_back();
  EXPECT_THROW(run_bench(apps, c.truth, index, c.database, {}), Error);
  GroundTruth truth = c.truth;
  truth.erase(truth.begin());
  EXPECT_THROW(run_bench(app_list(c), truth, index, c.database, {}), Error);
}

TEST(RunBench, EmptyDenominatorsAreOne) {
  const auto db = build_database({});
  const BenchSummary s = run_bench({}, {}, build_index(db), db, {});
  EXPECT_EQ(s.precision, 1);
  EXPECT_EQ(s.recall, 1);
}

TEST(BenchJson, Fields) {
  const Corpus c = generate_corpus(single_library_apps(4));
  const auto index = build_index(c.database);
  const auto j = nlohmann::json::parse(bench_to_json(run_bench(app_list(c), c.truth, index, c.database, {})));
  EXPECT_EQ(j["apps"], 4);
  EXPECT_EQ(j["precision"], "1");
  EXPECT_EQ(j["recall"], "1");
  EXPECT_TRUE(j.contains("class_level"));
  EXPECT_FALSE(bench_to_text(run_bench(app_list(c), c.truth, index, c.database, {})).empty());
}
