#include <gtest/gtest.h>

#include <set>

#include "builders.hpp"
#include "libpin/corpus.hpp"
#include "libpin/error.hpp"
#include "libpin/recovery.hpp"
#include "oracles.hpp"

using namespace libpin;
using namespace libpin::test;

namespace {

struct Fixture {
  LibraryDatabase db;
  ClassIndex index;
  Fixture(std::vector<std::pair<LibraryVersionId, Profile>> items)
      : db(build_database(std::move(items))), index(build_index(db)) {}
};

std::vector<ClassName> names(std::initializer_list<std::string_view> list) {
  std::vector<ClassName> out;
  for (auto n : list) out.push_back(ClassName::parse(n));
  return out;
}

std::set<std::string> libraries(const RecoveryResult& r) {
  std::set<std::string> out;
  for (const auto& i : r.instances) out.insert(i.library);
  return out;
}

// Indicator example: L@1 has 10 classes; the app matches three of them with
// scores 4/5, 1 and 3/5 and carries one class of its own.
Fixture indicator_fixture() {
  std::vector<ClassNodePtr> lib = {cls("P", {"-a", "-b", "-c", "-d", "-e"}), cls("Q", {"-a"}),
                                   cls("R", {"-a", "-b", "-c", "-d", "-e"})};
  for (int i = 0; i < 7; ++i) lib.push_back(cls("F" + std::to_string(i), {"-x"}));
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("L", "1"), class_profile(lib));
  return Fixture(std::move(items));
}

Profile indicator_app() {
  return class_profile({cls("P", {"-a", "-b", "-c", "-d"}), cls("Q", {"-a"}), cls("R", {"-a", "-b", "-c"}),
                        cls("S", {"-own"})});
}

}  // namespace

TEST(Counterparts, KeepsEveryPositiveMatch) {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("A", "1"), class_profile({cls("X", {"-a", "-b", "-c", "-d", "-e"})}));
  items.emplace_back(id("B", "1"), class_profile({cls("X", {"-a", "-b"})}));
  items.emplace_back(id("C", "1"), class_profile({cls("X", {"-z"})}));
  const Fixture f(std::move(items));
  const auto ac = cls("X", {"-a", "-b", "-c", "-d"});
  const Counterparts cp = counterparts(*ac, f.index);
  ASSERT_EQ(cp.matches.size(), 2u);
  EXPECT_EQ(f.index.id_of(cp.matches[0].entry->version).str(), "A@1");
  EXPECT_EQ(cp.matches[0].score, Rational(4, 5));
  EXPECT_EQ(f.index.id_of(cp.matches[1].entry->version).str(), "B@1");
  EXPECT_EQ(cp.matches[1].score, Rational(1, 2));
  EXPECT_TRUE(counterparts(*cls("Absent", {"-a"}), f.index).matches.empty());
  EXPECT_TRUE(counterparts(*cls("X", {"-nothing"}), f.index).matches.empty());
}

TEST(RegionGraph, SettledFloatingUnmatched) {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("A", "1"), class_profile({cls("OnlyA", {"-a"}), cls("Shared", {"-s"})}));
  items.emplace_back(id("B", "1"), class_profile({cls("OnlyB", {"-b"}), cls("Shared", {"-s"})}));
  const Fixture f(std::move(items));
  const Profile app = class_profile({cls("OnlyA", {"-a"}), cls("Shared", {"-s"}), cls("Mine", {"-m"})});
  const RegionGraph g = build_region_graph(app, f.index);
  EXPECT_EQ(g.settled.at("A"), names({"OnlyA"}));
  EXPECT_TRUE(g.settled.at("B").empty());  // seen only through the shared class
  EXPECT_EQ(g.floating.at({"A", "B"}), names({"Shared"}));
  EXPECT_EQ(g.unmatched, names({"Mine"}));
  EXPECT_EQ(g.successors("B"), (std::vector<std::vector<std::string>>{{"A", "B"}}));
}

TEST(Indicators, HandEvaluatedExample) {
  const Fixture f = indicator_fixture();
  const Profile app = indicator_app();
  const RegionGraph g = build_region_graph(app, f.index);
  const auto c = names({"P", "Q", "R", "S"});
  const Indicators ind = indicators(c, id("L", "1"), g, f.index);
  EXPECT_EQ(ind.matched, 3u);
  EXPECT_EQ(ind.sim_s, Rational(12, 5));
  EXPECT_EQ(ind.sim_a, Rational(4, 5));
  EXPECT_EQ(ind.comp, Rational(3, 4));
  EXPECT_EQ(ind.prop, Rational(3, 10));
  EXPECT_EQ(candidate_score(c, "L", g, f.index), Rational(18, 100));
  EXPECT_THROW(indicators(c, id("L", "2"), g, f.index), Error);
}

TEST(Indicators, SelfMatch) {
  const Fixture f = indicator_fixture();
  const Profile& app = *f.db.entries()[0].profile;
  const RegionGraph g = build_region_graph(app, f.index);
  std::vector<ClassName> c;
  for (const auto& n : app.classes()) c.push_back(n->name());
  const Indicators ind = indicators(c, id("L", "1"), g, f.index);
  EXPECT_EQ(ind.sim_a, 1);
  EXPECT_EQ(ind.prop, 1);
  EXPECT_EQ(ind.comp, 1);
  EXPECT_EQ(candidate_score(c, "L", g, f.index), 1);
}

TEST(BestVersionSet, Examples) {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("A", "1"), class_profile({cls("K", {"-a"})}));
  items.emplace_back(id("A", "2"), class_profile({cls("K", {"-a"}), cls("New", {"-n"})}));
  items.emplace_back(id("A", "3"), class_profile({cls("K", {"-a"}), cls("New", {"-n"})}));
  items.emplace_back(id("A", "4"), class_profile({cls("K", {"-b"})}));
  items.emplace_back(id("A", "5"), class_profile({cls("K", {"-b"}), cls("Late", {"-l"})}));
  items.emplace_back(id("A", "6"), class_profile({}));
  const Fixture f(std::move(items));
  const Profile app = class_profile({cls("K", {"-a"}), cls("New", {"-n"}), cls("Late", {"-l"})});
  const RegionGraph g = build_region_graph(app, f.index);
  EXPECT_EQ(best_version_set(names({"K", "New"}), "A", g, f.index), (std::vector<std::string>{"2", "3"}));
  EXPECT_EQ(best_version_set(names({"K"}), "A", g, f.index), (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_EQ(best_version_set(names({"Late"}), "A", g, f.index), (std::vector<std::string>{"5"}));
  // The empty candidate ties everywhere except on empty profiles.
  EXPECT_EQ(best_version_set({}, "A", g, f.index), (std::vector<std::string>{"1", "2", "3", "4", "5"}));
  EXPECT_EQ(candidate_score({}, "A", g, f.index), 0);
}

TEST(Compatible, Examples) {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("A", "1"), class_profile({cls("K", {"-a"}), cls("G", {"-g"})}));
  items.emplace_back(id("A", "2"), class_profile({cls("K", {"-a", "-b"})}));
  items.emplace_back(id("A", "3"), class_profile({cls("K", {"-a", "-b"}), cls("F", {"-f"})}));
  items.emplace_back(id("A", "4"), class_profile({cls("K", {"-z"}), cls("F", {"-f"})}));
  items.emplace_back(id("A", "5"), class_profile({cls("K", {"-z"}), cls("H", {"-h"})}));
  items.emplace_back(id("B", "1"), class_profile({cls("F", {"-f"}), cls("H", {"-h"})}));
  const Fixture f(std::move(items));
  const Profile app = class_profile({cls("K", {"-a", "-b"}), cls("F", {"-f"}), cls("H", {"-h"})});
  const RegionGraph g = build_region_graph(app, f.index);
  // K pins {2,3}; F lives in {3,4}.
  EXPECT_EQ(best_version_set(names({"K"}), "A", g, f.index), (std::vector<std::string>{"2", "3"}));
  EXPECT_TRUE(compatible(names({"K"}), ClassName("F"), "A", g, f.index));
  EXPECT_FALSE(compatible(names({"K"}), ClassName("H"), "A", g, f.index));
  EXPECT_TRUE(compatible({}, ClassName("H"), "A", g, f.index));
}

TEST(FilterCandidates, NoThirdPartyClasses) {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("A", "1"), class_profile({cls("K", {"-a"})}));
  const Fixture f(std::move(items));
  const RecoveryResult r = recover(class_profile({cls("Mine", {"-m"})}), f.index);
  EXPECT_TRUE(r.instances.empty());
  EXPECT_TRUE(r.residual.empty());
  EXPECT_EQ(r.unmatched, names({"Mine"}));
}

TEST(FilterCandidates, CompleteInclusionAppUsingOnlyIncluder) {
  CorpusSpec spec;
  spec.seed = 21;
  spec.library_count = 2;
  spec.libraries = {{"Outer", std::nullopt, 4, IntRange{6, 10}, {}}, {"Inner", std::nullopt, 4, std::nullopt, {}}};
  spec.duplication.push_back({DuplicationPattern::complete_inclusion, {std::string("Outer"), std::string("Inner")}, {6, 9}});
  spec.apps.fixed.push_back({{{std::string("Outer"), std::size_t{0}}}, 0.0, 0});
  const Corpus c = generate_corpus(spec);
  const auto index = build_index(c.database);
  const auto& app = c.apps.at(0);
  // The app carries the embedded region, so it holds classes Inner also defines.
  const Profile& inner = *c.database.find({"Inner", c.database.versions_of("Inner")[0]})->profile;
  std::size_t shared = 0;
  for (const auto& n : inner.classes()) shared += app.profile.find(n->name()) != nullptr;
  EXPECT_GT(shared, 0u);
  ASSERT_EQ(c.truth.at(app.id).size(), 1u);
  EXPECT_EQ(c.truth.at(app.id)[0].id.library, "Outer");
  const RecoveryResult r = recover(app.profile, index);
  EXPECT_EQ(libraries(r), (std::set<std::string>{"Outer"}));
  EXPECT_EQ(r.instances[0].classes.size(), app.profile.size());
  EXPECT_TRUE(r.residual.empty());
}

TEST(FilterCandidates, ZeroOverlapPairKeepsBothLibraries) {
  CorpusSpec spec;
  spec.seed = 3;
  spec.libraries = {{"FirebaseAnalytics", std::string("FIR"), 2, IntRange{5, 5}, {"y1", "y2"}},
                    {"FirebaseCore", std::string("FIR"), 2, IntRange{8, 8}, {"x1", "x2"}}};
  spec.library_count = 2;
  SharingGroup g{DuplicationPattern::partial_inclusion, {std::string("FirebaseAnalytics"), std::string("FirebaseCore")},
                 {11, 11}};
  g.presence[0] = {{0, 0}};
  g.presence[1] = {{0, 0}};
  g.region_versions = 1;
  spec.duplication.push_back(g);
  spec.apps.fixed.push_back({{{std::string("FirebaseAnalytics"), std::string("y1")},
                              {std::string("FirebaseCore"), std::string("x2")}},
                             0.0, 3});
  const Corpus c = generate_corpus(spec);
  const auto index = build_index(c.database);
  const RecoveryResult r = recover(c.apps.at(0).profile, index);
  ASSERT_EQ(libraries(r), (std::set<std::string>{"FirebaseAnalytics", "FirebaseCore"}));
  const auto& fa = r.instances[0];
  const auto& fc = r.instances[1];
  EXPECT_NE(std::find(fa.versions.begin(), fa.versions.end(), "y1"), fa.versions.end());
  EXPECT_NE(std::find(fc.versions.begin(), fc.versions.end(), "x2"), fc.versions.end());
  EXPECT_EQ(fa.classes.size(), 16u);
}

TEST(RecoveryProperty, ConservationScoresAndDeterminism) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    CorpusSpec spec;
    spec.seed = seed;
    spec.library_count = 8;
    spec.duplication = {
        {DuplicationPattern::complete_inclusion, {std::size_t{0}, std::size_t{1}}, {3, 6}},
        {DuplicationPattern::partial_inclusion, {std::size_t{2}, std::size_t{3}}, {3, 6}},
        {DuplicationPattern::multi_party_sharing, {std::size_t{4}, std::size_t{5}, std::size_t{6}}, {3, 6}},
    };
    spec.apps.count = 15;
    spec.apps.libraries_per_app = {1, 4};
    spec.apps.customization_rate = 0.2;
    const Corpus c = generate_corpus(spec);
    const auto index = build_index(c.database);
    for (const auto& app : c.apps) {
      const RecoveryResult r = recover(app.profile, index);
      std::multiset<std::string> seen;
      for (const auto& inst : r.instances) {
        ASSERT_FALSE(inst.classes.empty());
        ASSERT_FALSE(inst.versions.empty());
        ASSERT_GT(inst.score, 0);
        ASSERT_LE(inst.score, 1);
        for (const auto& ic : inst.classes) seen.insert(ic.name.str());
      }
      for (const auto& n : r.residual) seen.insert(n.str());
      for (const auto& n : r.unmatched) seen.insert(n.str());
      std::multiset<std::string> all;
      for (const auto& n : app.profile.classes()) all.insert(n->name().str());
      ASSERT_EQ(seen, all) << app.id;

      const RecoveryResult again = recover(app.profile, index);
      ASSERT_EQ(again.instances.size(), r.instances.size());
      for (std::size_t i = 0; i < r.instances.size(); ++i) {
        ASSERT_EQ(again.instances[i].library, r.instances[i].library);
        ASSERT_EQ(again.instances[i].versions, r.instances[i].versions);
        ASSERT_EQ(again.instances[i].score, r.instances[i].score);
      }
    }
  }
}

TEST(RecoveryProperty, IndicatorsMatchBruteForce) {
  oracle::Gen gen(99);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    CorpusSpec spec;
    spec.seed = seed;
    spec.library_count = 3;
    spec.versions_per_library = {3, 5};
    spec.duplication = {{DuplicationPattern::partial_inclusion, {std::size_t{0}, std::size_t{1}}, {3, 6}}};
    spec.apps.count = 3;
    spec.apps.libraries_per_app = {2, 3};
    spec.apps.customization_rate = 0.3;
    const Corpus c = generate_corpus(spec);
    const auto index = build_index(c.database);
    for (const auto& app : c.apps) {
      const RegionGraph g = build_region_graph(app.profile, index);
      std::vector<std::string> all;
      for (const auto& n : app.profile.classes()) all.push_back(n->name().str());
      for (int round = 0; round < 20; ++round) {
        std::vector<std::string> pick;
        std::vector<ClassName> cand;
        for (const auto& n : all) {
          if (gen.coin(40)) {
            pick.push_back(n);
            cand.push_back(ClassName::parse(n));
          }
        }
        for (const auto& lib : c.database.libraries()) {
          for (const auto& e : lib.entries) {
            const auto& entry = c.database.entries()[e];
            const auto want = oracle::indicators(pick, app.profile, *entry.profile);
            const auto got = indicators(cand, entry.id, g, index);
            ASSERT_EQ(static_cast<std::int64_t>(got.matched), want.matched);
            ASSERT_EQ(got.sim_s, want.sim_s);
            ASSERT_EQ(got.sim_a, want.sim_a);
            ASSERT_EQ(got.prop, want.prop);
            ASSERT_EQ(got.comp, want.comp);
          }
          ASSERT_EQ(best_version_set(cand, lib.name, g, index),
                    oracle::best_versions(pick, app.profile, c.database, lib.name));
          ASSERT_EQ(candidate_score(cand, lib.name, g, index), oracle::score(pick, app.profile, c.database, lib.name));
        }
      }
    }
  }
}
