#include <gtest/gtest.h>

#include "builders.hpp"
#include "libpin/error.hpp"
#include "libpin/profile.hpp"
#include "oracles.hpp"

using namespace libpin;
using namespace libpin::test;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST(MethodKey, ParsesBothKinds) {
  EXPECT_EQ(m("-foo:bar:").kind, MethodKind::instance);
  EXPECT_EQ(m("+sharedInstance").kind, MethodKind::class_method);
  EXPECT_EQ(m("-foo:bar:").selector, "foo:bar:");
  EXPECT_EQ(m("+x").to_string(), "+x");
  EXPECT_NE(m("-x"), m("+x"));
}

TEST(MethodKey, RejectsMissingSignOrSelector) {
  EXPECT_EQ(code_of([] { m("foo"); }), ErrorCode::schema_violation);
  EXPECT_EQ(code_of([] { m("-"); }), ErrorCode::schema_violation);
  EXPECT_EQ(code_of([] { MethodKey(MethodKind::instance, ""); }), ErrorCode::schema_violation);
}

TEST(ClassName, CategoryRendering) {
  const ClassName c("NSData", "GMSCrypto");
  EXPECT_EQ(c.str(), "NSData(GMSCrypto)");
  EXPECT_EQ(ClassName::parse("NSData(GMSCrypto)"), c);
  EXPECT_NE(ClassName::parse("NSData"), c);
  EXPECT_EQ(ClassName::parse("NSData(GMSCrypto)").base(), "NSData");
  EXPECT_EQ(*ClassName::parse("NSData(GMSCrypto)").category(), "GMSCrypto");
}

TEST(ClassName, RejectsEmptyParts) {
  EXPECT_THROW(ClassName(""), Error);
  EXPECT_THROW(ClassName("NSData", ""), Error);
  EXPECT_THROW(ClassName::parse("NSData()"), Error);
  EXPECT_THROW(ClassName::parse("(Cat)"), Error);
}

TEST(FeatureVector, SumsRepeatsAndDropsZeros) {
  std::vector<FeatureVector::Entry> entries = {
      {{FeatureKind::const_string, "x"}, 1}, {{FeatureKind::const_string, "x"}, 2}, {{FeatureKind::class_ref, "y"}, 0}};
  const FeatureVector v(entries);
  EXPECT_EQ(v.entries().size(), 1u);
  EXPECT_EQ(v.count({FeatureKind::const_string, "x"}), 3u);
  EXPECT_EQ(v.count({FeatureKind::class_ref, "y"}), 0u);
  EXPECT_EQ(v.total(), 3u);
}

TEST(FeatureVector, KindsAreNamespaced) {
  const FeatureVector a({{{FeatureKind::const_string, "init"}, 1}});
  const FeatureVector b({{{FeatureKind::selector_ref, "init"}, 1}});
  EXPECT_EQ(feature_similarity(a, b), 0);
}

TEST(ClassNode, DuplicateMethodIsRejected) {
  EXPECT_EQ(code_of([] { cls("K", {"-a", "-a"}); }), ErrorCode::duplicate_name);
}

TEST(ClassNode, FeatureKeyMustBeAMethod) {
  FeatureMap f;
  f[m("-b")] = fv({{"x", 1}});
  EXPECT_EQ(code_of([&] { ClassNode(ClassName("K"), methods({"-a"}), f); }), ErrorCode::schema_violation);
}

TEST(ClassNode, MetadataOnlyClassIsAllowed) {
  const auto k = cls("K", {});
  EXPECT_TRUE(k->methods().empty());
}

TEST(Profile, DuplicateClassIsRejected) {
  EXPECT_EQ(code_of([] { class_profile({cls("A", {"-a"}), cls("A", {"-b"})}); }), ErrorCode::duplicate_name);
}

TEST(Profile, LevelMustMatchFeatures) {
  EXPECT_EQ(code_of([] { code_profile({cls("A", {"-a"})}); }), ErrorCode::schema_violation);
  EXPECT_EQ(code_of([] { class_profile({code_cls("A", {{"-a", fv({{"x", 1}})}})}); }),
            ErrorCode::schema_violation);
  // A code-level class without methods needs no feature map.
  EXPECT_NO_THROW(code_profile({cls("A", {})}));
}

TEST(Profile, ClassesSortedAndFindable) {
  const Profile p = class_profile({cls("Zeta", {"-a"}), cls("Alpha", {"-b"}), cls("NSData(Cat)", {})});
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p.classes()[0]->name().str(), "Alpha");
  EXPECT_NE(p.find("NSData(Cat)"), nullptr);
  EXPECT_EQ(p.find("NSData"), nullptr);
}

TEST(ClassSimilarity, Examples) {
  EXPECT_EQ(class_similarity(*cls("K", {"-init", "-foo:"}), *cls("K", {"-init", "-foo:"})), 1);
  EXPECT_EQ(class_similarity(*cls("K", {"-a", "-b", "-c"}), *cls("K", {"-b", "-c", "-d"})), Rational(1, 2));
  EXPECT_EQ(class_similarity(*cls("K", {"-a"}), *cls("K", {"-b"})), 0);
}

TEST(ClassSimilarity, EmptyMethodSets) {
  EXPECT_EQ(class_similarity(*cls("K", {}), *cls("K", {})), 1);
  EXPECT_EQ(class_similarity(*cls("K", {}), *cls("K", {"-a"})), 0);
}

TEST(ClassSimilarity, InstanceAndClassMethodsDiffer) {
  EXPECT_EQ(class_similarity(*cls("K", {"-a"}), *cls("K", {"+a"})), 0);
}

TEST(FeatureSimilarity, Examples) {
  EXPECT_EQ(feature_similarity(fv({{"x", 2}, {"y", 1}}), fv({{"x", 2}, {"y", 1}})), 1);
  EXPECT_EQ(feature_similarity(fv({{"x", 2}, {"y", 1}}), fv({{"x", 1}, {"y", 1}, {"z", 1}})), Rational(2, 3));
  EXPECT_EQ(feature_similarity(fv({{"x", 3}}), fv({{"y", 2}})), 0);
  EXPECT_EQ(feature_similarity(FeatureVector{}, FeatureVector{}), 1);
  EXPECT_EQ(feature_similarity(fv({{"x", 1}}), FeatureVector{}), 0);
}

TEST(ClassSimilarityProperty, MatchesJaccardOracleSymmetricReflexive) {
  oracle::Gen gen(11);
  for (int i = 0; i < 2000; ++i) {
    const ClassNode a(ClassName("K"), gen.method_set(64, 80));
    const ClassNode b(ClassName("K"), gen.method_set(64, 80));
    const Rational s = class_similarity(a, b);
    ASSERT_EQ(s, oracle::class_sim(a, b));
    ASSERT_EQ(s, class_similarity(b, a));
    ASSERT_GE(s, 0);
    ASSERT_LE(s, 1);
    if (!a.methods().empty()) {
      ASSERT_EQ(class_similarity(a, a), 1);
    }
  }
}

TEST(FeatureSimilarityProperty, MatchesOracleSymmetricBoundedIdentity) {
  oracle::Gen gen(12);
  for (int i = 0; i < 2000; ++i) {
    const FeatureVector a = gen.vector(8, 6);
    const FeatureVector b = gen.coin(20) ? a : gen.vector(8, 6);
    const Rational s = feature_similarity(a, b);
    ASSERT_EQ(s, oracle::manhattan(oracle::bag(a), oracle::bag(b)));
    ASSERT_EQ(s, feature_similarity(b, a));
    ASSERT_GE(s, 0);
    ASSERT_LE(s, 1);
    ASSERT_EQ(s == 1, a == b);
  }
}
