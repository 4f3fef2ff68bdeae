#include <gtest/gtest.h>

#include <fstream>

#include "builders.hpp"
#include "libpin/corpus.hpp"
#include "libpin/error.hpp"
#include "libpin/index.hpp"

using namespace libpin;
using namespace libpin::test;

namespace {

LibraryDatabase example_db(bool with_b) {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("A", "1"), class_profile({cls("X", {"-a"}), cls("Y", {"-b"})}));
  items.emplace_back(id("A", "2"), class_profile({cls("X", {"-a", "-c"}), cls("Z", {"-d"})}));
  if (with_b) {
    items.emplace_back(id("B", "1"), class_profile({cls("X", {"-q"}), cls("NSData(GMSCrypto)", {"+h"})}));
  }
  return build_database(std::move(items));
}

std::vector<std::string> ids(const ClassIndex& index, std::string_view name) {
  std::vector<std::string> out;
  for (const auto& e : index.lookup(name)) out.push_back(index.id_of(e.version).str());
  return out;
}

}  // namespace

TEST(BuildIndex, UnfoldsClasses) {
  const auto index = build_index(example_db(false));
  EXPECT_EQ(ids(index, "X"), (std::vector<std::string>{"A@1", "A@2"}));
  EXPECT_EQ(ids(index, "Y"), (std::vector<std::string>{"A@1"}));
  EXPECT_EQ(ids(index, "Z"), (std::vector<std::string>{"A@2"}));
}

TEST(BuildIndex, EmptyDatabase) {
  const auto index = build_index(build_database({}));
  EXPECT_EQ(index.name_count(), 0u);
  EXPECT_TRUE(index.lookup("X").empty());
}

TEST(BuildIndex, SecondLibrarySharesName) {
  const auto index = build_index(example_db(true));
  EXPECT_EQ(ids(index, "X"), (std::vector<std::string>{"A@1", "A@2", "B@1"}));
  EXPECT_TRUE(index.lookup("Nope").empty());
  EXPECT_EQ(ids(index, "NSData(GMSCrypto)"), (std::vector<std::string>{"B@1"}));
  EXPECT_TRUE(index.lookup("NSData").empty());
  for (const auto& e : index.lookup("X")) EXPECT_EQ(e.node->name().str(), "X");
}

TEST(BuildIndex, ClassCounts) {
  const auto db = example_db(true);
  const auto index = build_index(db);
  EXPECT_EQ(index.class_count(id("A", "2")), 2u);
  EXPECT_THROW((void)index.class_count(id("A", "9")), Error);
}

TEST(IndexProperty, PostingsEqualClassCounts) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CorpusSpec spec;
    spec.seed = seed;
    spec.library_count = 6;
    spec.empty_version_rate = 0.2;
    spec.duplication.push_back({DuplicationPattern::partial_inclusion, {std::size_t{0}, std::size_t{1}}, {3, 5}});
    const Corpus c = generate_corpus(spec);
    const auto index = build_index(c.database);
    std::size_t classes = 0;
    for (const auto& e : c.database.entries()) classes += e.profile->size();
    EXPECT_EQ(index.entry_count(), classes);
    // one posting per (name, version)
    for (const auto& name : index.names()) {
      std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
      for (const auto& e : index.lookup(name)) {
        EXPECT_TRUE(seen.emplace(e.version.library, e.version.version).second);
      }
    }
  }
}

TEST(IndexStorage, RoundTrip) {
  TempDir dir;
  const auto db = example_db(true);
  const auto index = build_index(db);
  save_index(index, dir / "index.lpix");
  const auto loaded = load_index(dir / "index.lpix", db.manifest_digest());
  EXPECT_EQ(loaded.names(), index.names());
  for (const auto& name : index.names()) {
    const auto a = index.lookup(name);
    const auto b = loaded.lookup(name);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(index.id_of(a[i].version), loaded.id_of(b[i].version));
      EXPECT_TRUE(std::equal(a[i].node->methods().begin(), a[i].node->methods().end(),
                             b[i].node->methods().begin(), b[i].node->methods().end()));
    }
  }
  EXPECT_EQ(loaded.class_count(id("B", "1")), 2u);
}

TEST(IndexStorage, HeaderLayout) {
  TempDir dir;
  const auto db = example_db(false);
  save_index(build_index(db), dir / "i");
  const std::string bytes = read_file(dir / "i");
  ASSERT_GT(bytes.size(), 40u);
  EXPECT_EQ(bytes.substr(0, 4), "LPIX");
  EXPECT_EQ(bytes[4], 1);
  const auto digest = db.manifest_digest();
  EXPECT_EQ(bytes.substr(8, 32), std::string(digest.begin(), digest.end()));
  EXPECT_EQ(bytes.substr(bytes.size() - 4), "XIPL");
}

TEST(IndexStorage, StaleAgainstChangedManifest) {
  TempDir dir;
  save_index(build_index(example_db(false)), dir / "i");
  try {
    load_index(dir / "i", example_db(true).manifest_digest());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::stale_index);
  }
}

TEST(IndexStorage, TruncatedFileIsIoFailure) {
  TempDir dir;
  save_index(build_index(example_db(true)), dir / "i");
  const std::string bytes = read_file(dir / "i");
  for (const std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    write_file(dir / "t", bytes.substr(0, cut));
    try {
      load_index(dir / "t");
      FAIL() << "cut at " << cut;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::io_failure) << "cut at " << cut;
    }
  }
}
