#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "libpin/rational.hpp"

namespace libpin {

enum class Level : std::uint8_t { class_level, code_level };

std::string_view to_string(Level level);
Level parse_level(std::string_view text);

enum class MethodKind : std::uint8_t { instance, class_method };

/// An Objective-C method identity: instance (-) or class (+) plus the full
/// selector, colons included.
struct MethodKey {
  MethodKind kind = MethodKind::instance;
  std::string selector;

  MethodKey() = default;
  MethodKey(MethodKind k, std::string sel);

  /// Parses "-foo:" / "+foo:". The sign is mandatory.
  static MethodKey parse(std::string_view text);
  /// "-foo:" / "+foo:".
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const MethodKey&, const MethodKey&) = default;
  friend std::strong_ordering operator<=>(const MethodKey&, const MethodKey&) = default;
};

/// A class or category name. Categories render as "Base(Category)" and are
/// distinct from the base class; equality and ordering use the rendering.
class ClassName {
 public:
  ClassName() = default;
  explicit ClassName(std::string base, std::optional<std::string> category = std::nullopt);

  /// Accepts "Base" or "Base(Category)".
  static ClassName parse(std::string_view canonical);

  [[nodiscard]] const std::string& base() const noexcept { return base_; }
  [[nodiscard]] const std::optional<std::string>& category() const noexcept { return category_; }
  [[nodiscard]] const std::string& str() const noexcept { return canonical_; }

  friend bool operator==(const ClassName& a, const ClassName& b) {
    return a.canonical_ == b.canonical_;
  }
  friend std::strong_ordering operator<=>(const ClassName& a, const ClassName& b) {
    return a.canonical_ <=> b.canonical_;
  }

 private:
  std::string base_;
  std::optional<std::string> category_;
  std::string canonical_;
};

enum class FeatureKind : std::uint8_t { class_ref, selector_ref, const_string, external_symbol };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

struct FeatureItem {
  FeatureKind kind = FeatureKind::class_ref;
  std::string value;

  friend bool operator==(const FeatureItem&, const FeatureItem&) = default;
  friend std::strong_ordering operator<=>(const FeatureItem&, const FeatureItem&) = default;
};

/// Multiset of constant-data usages in one method body. Entries are kept
/// sorted by item, and zero multiplicities are never stored.
class FeatureVector {
 public:
  using Entry = std::pair<FeatureItem, std::uint32_t>;

  FeatureVector() = default;
  /// Repeated items are summed; zero counts are dropped.
  explicit FeatureVector(std::vector<Entry> entries);

  [[nodiscard]] std::span<const Entry> entries() const noexcept { return entries_; }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] std::uint64_t total() const noexcept;
  [[nodiscard]] std::uint32_t count(const FeatureItem& item) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<Entry> entries_;
};

using FeatureMap = std::map<MethodKey, FeatureVector>;

class ClassNode {
 public:
  ClassNode() = default;
  /// Throws DuplicateName on repeated method keys and SchemaViolation when a
  /// feature map names a method the class does not define.
  ClassNode(ClassName name, std::vector<MethodKey> methods,
            std::optional<FeatureMap> features = std::nullopt);

  [[nodiscard]] const ClassName& name() const noexcept { return name_; }
  /// Sorted by (kind, selector).
  [[nodiscard]] std::span<const MethodKey> methods() const noexcept { return methods_; }
  [[nodiscard]] bool has_features() const noexcept { return features_.has_value(); }
  [[nodiscard]] const std::optional<FeatureMap>& features() const noexcept { return features_; }
  [[nodiscard]] bool defines(const MethodKey& key) const;
  /// nullptr when the class carries no vector for `key`.
  [[nodiscard]] const FeatureVector* features_for(const MethodKey& key) const;

 private:
  ClassName name_;
  std::vector<MethodKey> methods_;
  std::optional<FeatureMap> features_;
};

using ClassNodePtr = std::shared_ptr<const ClassNode>;

/// A binary's identity card: its class nodes keyed by canonical name.
/// Nodes are immutable and may be shared between profiles (library versions
/// that did not touch a class share its node).
class Profile {
 public:
  Profile() = default;
  /// Throws DuplicateName on repeated class names. A code-level profile
  /// requires a feature map on every class that defines methods; a
  /// class-level profile must not carry feature maps (SchemaViolation).
  Profile(Level level, std::vector<ClassNodePtr> classes);

  [[nodiscard]] Level level() const noexcept { return level_; }
  /// Sorted by canonical class name.
  [[nodiscard]] std::span<const ClassNodePtr> classes() const noexcept { return classes_; }
  [[nodiscard]] std::size_t size() const noexcept { return classes_.size(); }
  [[nodiscard]] bool empty() const noexcept { return classes_.empty(); }
  [[nodiscard]] const ClassNode* find(const ClassName& name) const;
  [[nodiscard]] const ClassNode* find(std::string_view canonical) const;

 private:
  Level level_ = Level::class_level;
  std::vector<ClassNodePtr> classes_;
};

bool operator==(const ClassNode& a, const ClassNode& b);
bool operator==(const Profile& a, const Profile& b);

/// |a ∩ b| / |a ∪ b| over two sorted method-key ranges. Two empty sets
/// score 1 only when `same_name` holds.
Rational method_set_similarity(std::span<const MethodKey> a, std::span<const MethodKey> b,
                               bool same_name = true);

/// Method-set Jaccard between two class nodes.
Rational class_similarity(const ClassNode& ac, const ClassNode& lc);

/// 1 - Σ|A_i - B_i| / Σ(A_i + B_i) over the union of items; 1 for two
/// empty vectors.
Rational feature_similarity(const FeatureVector& a, const FeatureVector& b);

}  // namespace libpin
