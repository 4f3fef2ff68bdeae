#include <gtest/gtest.h>

#include "builders.hpp"
#include "libpin/database.hpp"
#include "libpin/error.hpp"
#include "libpin/profile_io.hpp"

using namespace libpin;
using namespace libpin::test;

namespace {

std::vector<std::pair<LibraryVersionId, Profile>> two_by_three() {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  for (const std::string lib : {"A", "B"}) {
    for (int v = 1; v <= 3; ++v) {
      items.emplace_back(id(lib, "1." + std::to_string(v)),
                         class_profile({cls(lib + "Core", {"-a", "-v" + std::to_string(v)})}));
    }
  }
  return items;
}

}  // namespace

TEST(BuildDatabase, CountsEntriesAndSignatures) {
  const auto db = build_database(two_by_three());
  EXPECT_EQ(db.size(), 6u);
  for (const auto& e : db.entries()) {
    EXPECT_EQ(e.class_signature.level, Level::class_level);
    EXPECT_FALSE(e.code_signature.has_value());
  }
  EXPECT_EQ(db.libraries().size(), 2u);
  EXPECT_EQ(db.versions_of("A"), (std::vector<std::string>{"1.1", "1.2", "1.3"}));
  EXPECT_EQ(db.release_index("B", "1.3"), 2u);
}

TEST(BuildDatabase, CodeSignatureIffCodeLevel) {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("A", "1"), code_profile({code_cls("X", {{"-a", fv({{"s", 1}})}})}));
  items.emplace_back(id("A", "2"), class_profile({cls("X", {"-a"})}));
  const auto db = build_database(std::move(items));
  EXPECT_TRUE(db.find(id("A", "1"))->code_signature.has_value());
  EXPECT_FALSE(db.find(id("A", "2"))->code_signature.has_value());
  EXPECT_EQ(db.find(id("A", "1"))->class_signature, db.find(id("A", "2"))->class_signature);
}

TEST(BuildDatabase, EmptyProfileIsFlaggedAndKept) {
  auto items = two_by_three();
  items.emplace_back(id("C", "0.1"), class_profile({}));
  const auto db = build_database(std::move(items));
  EXPECT_EQ(db.size(), 7u);
  EXPECT_EQ(db.empty_count(), 1u);
  EXPECT_TRUE(db.find(id("C", "0.1"))->empty());
}

TEST(BuildDatabase, DuplicateIdIsRejected) {
  auto items = two_by_three();
  items.emplace_back(id("A", "1.2"), class_profile({}));
  try {
    build_database(std::move(items));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::duplicate_id);
  }
}

TEST(BuildDatabase, IdsMustBePathComponents) {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  items.emplace_back(id("A/B", "1"), class_profile({}));
  EXPECT_THROW(build_database(std::move(items)), Error);
  std::vector<std::pair<LibraryVersionId, Profile>> items2;
  items2.emplace_back(id("A", ""), class_profile({}));
  EXPECT_THROW(build_database(std::move(items2)), Error);
}

TEST(ManifestDigest, IgnoresCreationTimeButNotContent) {
  DatabaseMetadata m1, m2;
  m2.created = "2024-05-01T00:00:00Z";
  EXPECT_EQ(build_database(two_by_three(), m1).manifest_digest(), build_database(two_by_three(), m2).manifest_digest());
  auto items = two_by_three();
  items.pop_back();
  EXPECT_NE(build_database(std::move(items)).manifest_digest(), build_database(two_by_three()).manifest_digest());
}

TEST(DatabaseStorage, SaveLoadRoundTrip) {
  TempDir dir;
  const auto db = build_database(two_by_three());
  save_database(db, dir.path());
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest"));
  EXPECT_TRUE(std::filesystem::exists(dir / "profiles/A/1.2.profile"));
  const auto loaded = load_database(dir.path());
  ASSERT_EQ(loaded.size(), db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    EXPECT_EQ(loaded.entries()[i].id, db.entries()[i].id);
    EXPECT_EQ(*loaded.entries()[i].profile, *db.entries()[i].profile);
  }
  EXPECT_EQ(loaded.manifest_digest(), db.manifest_digest());
  EXPECT_EQ(read_manifest_digest(dir.path()), db.manifest_digest());
}

TEST(DatabaseStorage, TamperedProfileIsStale) {
  TempDir dir;
  save_database(build_database(two_by_three()), dir.path());
  write_file(dir / "profiles/A/1.2.profile", serialize_profile(class_profile({cls("ACore", {"-other"})})));
  try {
    load_database(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::stale_index);
  }
}

TEST(ProfileTree, NaturalOrderAndOrderFile) {
  TempDir dir;
  const std::string doc = serialize_profile(class_profile({cls("X", {"-a"})}));
  for (const auto* v : {"1.10.0", "1.2.0", "1.9.1"}) write_file(dir / (std::string("L/") + v + ".profile"), doc);
  for (const auto* v : {"b", "a"}) write_file(dir / (std::string("M/") + v + ".profile"), doc);
  write_file(dir / "M/ORDER", "b\na\n");
  const ProfileTree tree = read_profile_tree(dir.path());
  ASSERT_TRUE(tree.errors.empty());
  const auto db = build_database(tree.items);
  EXPECT_EQ(db.versions_of("L"), (std::vector<std::string>{"1.2.0", "1.9.1", "1.10.0"}));
  EXPECT_EQ(db.versions_of("M"), (std::vector<std::string>{"b", "a"}));
}

TEST(ProfileTree, CollectsErrorsPerFile) {
  TempDir dir;
  write_file(dir / "L/1.profile", "{not json");
  write_file(dir / "L/2.profile", serialize_profile(class_profile({})));
  const ProfileTree tree = read_profile_tree(dir.path());
  ASSERT_EQ(tree.errors.size(), 1u);
  EXPECT_EQ(tree.errors[0].file.filename(), "1.profile");
  EXPECT_EQ(tree.items.size(), 1u);
}

TEST(NaturalLess, DigitRunsCompareNumerically) {
  EXPECT_TRUE(natural_less("2.5.1", "2.5.10"));
  EXPECT_TRUE(natural_less("1.9", "1.10"));
  EXPECT_FALSE(natural_less("1.10", "1.9"));
  EXPECT_TRUE(natural_less("a", "b"));
  EXPECT_FALSE(natural_less("3.0", "3.0"));
}
