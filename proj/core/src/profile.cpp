#include "libpin/profile.hpp"

#include <algorithm>

#include "libpin/error.hpp"

namespace libpin {

std::string_view to_string(Level level) {
  return level == Level::code_level ? "code_level" : "class_level";
}

Level parse_level(std::string_view text) {
  if (text == "class_level") return Level::class_level;
  if (text == "code_level") return Level::code_level;
  throw Error(ErrorCode::schema_violation, "unknown profile level '" + std::string(text) + "'");
}

MethodKey::MethodKey(MethodKind k, std::string sel) : kind(k), selector(std::move(sel)) {
  if (selector.empty()) {
    throw Error(ErrorCode::schema_violation, "method selector must be non-empty");
  }
}

MethodKey MethodKey::parse(std::string_view text) {
  if (text.size() < 2 || (text.front() != '-' && text.front() != '+')) {
    throw Error(ErrorCode::schema_violation, "method key must look like -sel or +sel: '" +
                                                 std::string(text) + "'");
  }
  return {text.front() == '+' ? MethodKind::class_method : MethodKind::instance,
          std::string(text.substr(1))};
}

std::string MethodKey::to_string() const {
  return (kind == MethodKind::class_method ? "+" : "-") + selector;
}

ClassName::ClassName(std::string base, std::optional<std::string> category)
    : base_(std::move(base)), category_(std::move(category)) {
  if (base_.empty()) {
    throw Error(ErrorCode::schema_violation, "class name must be non-empty");
  }
  if (category_ && category_->empty()) {
    throw Error(ErrorCode::schema_violation, "category name must be non-empty when present");
  }
  canonical_ = category_ ? base_ + "(" + *category_ + ")" : base_;
}

ClassName ClassName::parse(std::string_view canonical) {
  const auto open = canonical.find('(');
  if (open == std::string_view::npos) {
    return ClassName(std::string(canonical));
  }
  if (canonical.back() != ')' || open + 1 >= canonical.size() - 1) {
    throw Error(ErrorCode::schema_violation, "malformed category name '" + std::string(canonical) + "'");
  }
  return ClassName(std::string(canonical.substr(0, open)),
                   std::string(canonical.substr(open + 1, canonical.size() - open - 2)));
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::class_ref: return "class_ref";
    case FeatureKind::selector_ref: return "selector_ref";
    case FeatureKind::const_string: return "const_string";
    case FeatureKind::external_symbol: return "external_symbol";
  }
  return "class_ref";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "class_ref") return FeatureKind::class_ref;
  if (text == "selector_ref") return FeatureKind::selector_ref;
  if (text == "const_string") return FeatureKind::const_string;
  if (text == "external_symbol") return FeatureKind::external_symbol;
  throw Error(ErrorCode::schema_violation, "unknown feature kind '" + std::string(text) + "'");
}

FeatureVector::FeatureVector(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (auto& entry : entries) {
    if (entry.second == 0) {
      continue;
    }
    if (!entries_.empty() && entries_.back().first == entry.first) {
      entries_.back().second += entry.second;
    } else {
      entries_.push_back(std::move(entry));
    }
  }
}

std::uint64_t FeatureVector::total() const noexcept {
  std::uint64_t sum = 0;
  for (const auto& entry : entries_) {
    sum += entry.second;
  }
  return sum;
}

std::uint32_t FeatureVector::count(const FeatureItem& item) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), item,
                                   [](const Entry& e, const FeatureItem& key) { return e.first < key; });
  return it != entries_.end() && it->first == item ? it->second : 0;
}

ClassNode::ClassNode(ClassName name, std::vector<MethodKey> methods, std::optional<FeatureMap> features)
    : name_(std::move(name)), methods_(std::move(methods)), features_(std::move(features)) {
  std::sort(methods_.begin(), methods_.end());
  const auto dup = std::adjacent_find(methods_.begin(), methods_.end());
  if (dup != methods_.end()) {
    throw Error(ErrorCode::duplicate_name,
                "method " + dup->to_string() + " defined twice in class " + name_.str());
  }
  if (features_) {
    for (auto it = features_->begin(); it != features_->end();) {
      if (!std::binary_search(methods_.begin(), methods_.end(), it->first)) {
        throw Error(ErrorCode::schema_violation, "features for undefined method " +
                                                     it->first.to_string() + " in class " + name_.str());
      }
      // An absent vector and an empty one mean the same thing.
      it = it->second.empty() ? features_->erase(it) : std::next(it);
    }
  }
}

bool ClassNode::defines(const MethodKey& key) const {
  return std::binary_search(methods_.begin(), methods_.end(), key);
}

const FeatureVector* ClassNode::features_for(const MethodKey& key) const {
  if (!features_) {
    return nullptr;
  }
  const auto it = features_->find(key);
  return it == features_->end() ? nullptr : &it->second;
}

Profile::Profile(Level level, std::vector<ClassNodePtr> classes) : level_(level), classes_(std::move(classes)) {
  std::sort(classes_.begin(), classes_.end(),
            [](const ClassNodePtr& a, const ClassNodePtr& b) { return a->name() < b->name(); });
  for (std::size_t i = 1; i < classes_.size(); ++i) {
    if (classes_[i - 1]->name() == classes_[i]->name()) {
      throw Error(ErrorCode::duplicate_name, "class " + classes_[i]->name().str() + " defined twice");
    }
  }
  for (const auto& node : classes_) {
    if (level_ == Level::code_level && !node->methods().empty() && !node->has_features()) {
      throw Error(ErrorCode::schema_violation,
                  "code-level profile class " + node->name().str() + " lacks a feature map");
    }
    if (level_ == Level::class_level && node->has_features()) {
      throw Error(ErrorCode::schema_violation,
                  "class-level profile class " + node->name().str() + " carries a feature map");
    }
  }
}

const ClassNode* Profile::find(std::string_view canonical) const {
  const auto it = std::lower_bound(classes_.begin(), classes_.end(), canonical,
                                   [](const ClassNodePtr& node, std::string_view key) {
                                     return node->name().str() < key;
                                   });
  return it != classes_.end() && (*it)->name().str() == canonical ? it->get() : nullptr;
}

const ClassNode* Profile::find(const ClassName& name) const { return find(name.str()); }

bool operator==(const ClassNode& a, const ClassNode& b) {
  static const FeatureMap kNone;
  const FeatureMap& fa = a.features() ? *a.features() : kNone;
  const FeatureMap& fb = b.features() ? *b.features() : kNone;
  return a.name() == b.name() && std::ranges::equal(a.methods(), b.methods()) && fa == fb;
}

bool operator==(const Profile& a, const Profile& b) {
  return a.level() == b.level() &&
         std::ranges::equal(a.classes(), b.classes(),
                            [](const ClassNodePtr& x, const ClassNodePtr& y) { return *x == *y; });
}

Rational method_set_similarity(std::span<const MethodKey> a, std::span<const MethodKey> b, bool same_name) {
  if (a.empty() && b.empty()) {
    return same_name ? Rational(1) : Rational(0);
  }
  std::int64_t shared = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  const auto total = static_cast<std::int64_t>(a.size() + b.size()) - shared;
  return Rational(shared, total);
}

Rational class_similarity(const ClassNode& ac, const ClassNode& lc) {
  return method_set_similarity(ac.methods(), lc.methods(), ac.name() == lc.name());
}

Rational feature_similarity(const FeatureVector& a, const FeatureVector& b) {
  std::uint64_t distance = 0;
  std::uint64_t mass = 0;
  const auto ea = a.entries();
  const auto eb = b.entries();
  auto ia = ea.begin();
  auto ib = eb.begin();
  while (ia != ea.end() || ib != eb.end()) {
    if (ib == eb.end() || (ia != ea.end() && ia->first < ib->first)) {
      distance += ia->second;
      mass += ia->second;
      ++ia;
    } else if (ia == ea.end() || ib->first < ia->first) {
      distance += ib->second;
      mass += ib->second;
      ++ib;
    } else {
      distance += ia->second > ib->second ? ia->second - ib->second : ib->second - ia->second;
      mass += static_cast<std::uint64_t>(ia->second) + ib->second;
      ++ia;
      ++ib;
    }
  }
  if (mass == 0) {
    return Rational(1);
  }
  return Rational(1) - Rational(static_cast<std::int64_t>(distance), static_cast<std::int64_t>(mass));
}

}  // namespace libpin
