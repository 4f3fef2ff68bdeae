#include "libpin/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>

#include <json.hpp>

#include "libpin/error.hpp"
#include "libpin/index.hpp"
#include "libpin/profile_io.hpp"

namespace libpin {

using nlohmann::json;

std::string_view to_string(DuplicationPattern pattern) {
  switch (pattern) {
    case DuplicationPattern::complete_inclusion: return "complete_inclusion";
    case DuplicationPattern::partial_inclusion: return "partial_inclusion";
    case DuplicationPattern::multi_party_sharing: return "multi_party_sharing";
  }
  return "partial_inclusion";
}

DuplicationPattern parse_duplication_pattern(std::string_view text) {
  if (text == "complete_inclusion") return DuplicationPattern::complete_inclusion;
  if (text == "partial_inclusion") return DuplicationPattern::partial_inclusion;
  if (text == "multi_party_sharing") return DuplicationPattern::multi_party_sharing;
  throw Error(ErrorCode::schema_violation, "unknown duplication pattern '" + std::string(text) + "'");
}

namespace {

// std distributions are implementation-defined; these are not, so a seed
// yields the same corpus everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) {
      return static_cast<std::int64_t>(next());
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = next();
    while (x >= limit) {
      x = next();
    }
    return lo + static_cast<std::int64_t>(x % range);
  }

  std::int64_t uniform(const IntRange& r) { return uniform(r.lo, r.hi); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(n) - 1)); }

  double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return p > 0.0 && real() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[index(v.size())]; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

const std::vector<std::string> kNouns = {
    "View",     "Manager",  "Request",   "Cache",      "Parser",   "Client",     "Session",  "Store",
    "Image",    "Layout",   "Button",    "Cell",       "Label",    "Task",       "Queue",    "Stream",
    "Token",    "Config",   "Logger",    "Model",      "Router",   "Loader",     "Decoder",  "Encoder",
    "Helper",   "Item",     "Node",      "Record",     "Monitor",  "Serializer", "Provider", "Context",
    "Handler",  "Observer", "Operation", "Buffer",     "Proxy",    "Timer",      "Reporter", "Adapter"};
const std::vector<std::string> kVerbs = {"set",    "get",   "load",   "update",  "remove",   "add",  "handle",
                                         "reset",  "apply", "make",   "build",   "start",    "stop", "cancel",
                                         "refresh", "register", "process", "validate", "fetch", "prepare"};
const std::vector<std::string> kJoiners = {"with", "for", "from", "using", "into", "after"};
const std::vector<std::string> kSuffixes = {"Kit", "Network", "UI", "Core", "Analytics", "SDK",
                                            "Foundation", "Utils", "Media", "Storage"};
const std::vector<std::string> kSystemClasses = {"NSObject", "NSString", "NSArray",  "NSDictionary", "NSData",
                                                 "UIView",   "UIImage",  "NSURL",    "UIColor",      "NSDate"};
const std::vector<std::string> kExternalSymbols = {"_objc_msgSend", "_objc_retain",  "_objc_release",
                                                   "_dispatch_async", "_dispatch_once", "_CFRelease",
                                                   "_NSLog",        "_memcpy",       "_strlen",
                                                   "_objc_autoreleaseReturnValue"};

std::string selector_text(Rng& rng) {
  std::string s = rng.pick(kVerbs) + rng.pick(kNouns);
  const auto args = rng.uniform(0, 2);
  if (args >= 1) s += ':';
  if (args == 2) s += rng.pick(kJoiners) + rng.pick(kNouns) + ':';
  return s;
}

void check_range(const IntRange& r, std::int64_t floor, const char* what) {
  if (r.lo > r.hi || r.lo < floor) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " range is degenerate");
  }
}

void check_rate(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must lie in [0, 1]");
  }
}

using Snapshot = std::vector<ClassNodePtr>;  // sorted by name

struct RegionModel {
  std::string prefix;
  std::vector<Snapshot> history;
};

struct Carry {
  std::size_t region;
  std::vector<std::optional<std::size_t>> at;  // per library version
};

struct LibraryModel {
  std::string name;
  std::string prefix;
  std::size_t versions = 0;
  IntRange classes;
  bool own_classes = true;
  std::vector<std::string> version_names;
  std::vector<Carry> carries;
  std::vector<Snapshot> own;
  std::vector<bool> empty;
};

class Generator {
 public:
  explicit Generator(const CorpusSpec& spec) : spec_(spec), rng_(spec.seed) {}

  Corpus run();

 private:
  std::size_t resolve(const LibraryRef& ref) const;
  std::string fresh_prefix();
  ClassName fresh_class_name(const std::string& prefix);
  MethodKey fresh_method(const std::set<MethodKey>& taken);
  FeatureVector make_vector();
  ClassNodePtr make_class(const std::string& prefix);
  ClassNodePtr add_method(const ClassNode& node);
  ClassNodePtr remove_method(const ClassNode& node, std::size_t which);
  ClassNodePtr tweak_features(const ClassNode& node);
  Snapshot initial(const std::string& prefix, std::int64_t count);
  Snapshot release(const Snapshot& prev, const std::string& prefix, bool class_level, bool force_method_add);
  std::string next_version_name(const std::string& prev, bool class_level);

  void plan_libraries();
  void plan_groups();
  void evolve();
  Profile version_profile(const LibraryModel& lib, std::size_t v) const;
  std::vector<std::pair<LibraryVersionId, Profile>> assemble();
  void check_feasible() const;
  std::vector<ScheduledOverlap> schedule() const;
  void make_apps(Corpus& corpus);
  bool assemble_app(Corpus& corpus, std::vector<std::pair<std::size_t, std::size_t>> uses, double rate,
                    std::int64_t own_classes);

  Level level() const { return spec_.code_level ? Level::code_level : Level::class_level; }

  const CorpusSpec& spec_;
  Rng rng_;
  std::set<std::string> prefixes_;
  std::map<std::string, std::size_t> name_counters_;
  std::vector<LibraryModel> libs_;
  std::vector<RegionModel> regions_;
  std::vector<std::vector<std::size_t>> group_members_;
  std::vector<std::vector<std::set<std::string>>> names_;  // per library, per version
};

std::size_t Generator::resolve(const LibraryRef& ref) const {
  if (const auto* i = std::get_if<std::size_t>(&ref)) {
    if (*i >= libs_.size()) {
      throw Error(ErrorCode::invalid_argument, "library position " + std::to_string(*i) + " out of range");
    }
    return *i;
  }
  const auto& name = std::get<std::string>(ref);
  for (std::size_t i = 0; i < libs_.size(); ++i) {
    if (libs_[i].name == name) return i;
  }
  throw Error(ErrorCode::invalid_argument, "unknown library '" + name + "'");
}

std::string Generator::fresh_prefix() {
  const int width = prefixes_.size() < 400 ? 2 : 3;
  for (;;) {
    std::string p;
    for (int i = 0; i < width; ++i) {
      p += static_cast<char>('A' + rng_.uniform(0, 25));
    }
    if (prefixes_.insert(p).second) return p;
  }
}

ClassName Generator::fresh_class_name(const std::string& prefix) {
  const std::size_t n = name_counters_[prefix]++;
  if (rng_.chance(0.06)) {
    return ClassName(rng_.pick(kSystemClasses), prefix + "Additions" + std::to_string(n));
  }
  return ClassName(prefix + rng_.pick(kNouns) + std::to_string(n));
}

MethodKey Generator::fresh_method(const std::set<MethodKey>& taken) {
  const auto kind = rng_.chance(0.15) ? MethodKind::class_method : MethodKind::instance;
  for (int attempt = 0; attempt < 16; ++attempt) {
    MethodKey key(kind, selector_text(rng_));
    if (!taken.count(key)) return key;
  }
  for (std::size_t n = 0;; ++n) {
    MethodKey key(kind, rng_.pick(kVerbs) + "Item" + std::to_string(n) + ":");
    if (!taken.count(key)) return key;
  }
}

FeatureVector Generator::make_vector() {
  const double d = spec_.feature_density.lo + rng_.real() * (spec_.feature_density.hi - spec_.feature_density.lo);
  const auto n = static_cast<std::int64_t>(std::llround(d));
  std::vector<FeatureVector::Entry> entries;
  for (std::int64_t i = 0; i < n; ++i) {
    FeatureItem item;
    switch (rng_.uniform(0, 3)) {
      case 0:
        item = {FeatureKind::class_ref, rng_.pick(kSystemClasses)};
        break;
      case 1:
        item = {FeatureKind::selector_ref, selector_text(rng_)};
        break;
      case 2:
        item = {FeatureKind::const_string, "str" + std::to_string(rng_.uniform(0, 4095))};
        break;
      default:
        item = {FeatureKind::external_symbol, rng_.pick(kExternalSymbols)};
        break;
    }
    entries.emplace_back(std::move(item), static_cast<std::uint32_t>(rng_.uniform(1, 3)));
  }
  return FeatureVector(std::move(entries));
}

ClassNodePtr Generator::make_class(const std::string& prefix) {
  ClassName name = fresh_class_name(prefix);
  std::set<MethodKey> keys;
  const auto count = rng_.uniform(spec_.methods_per_class);
  for (std::int64_t i = 0; i < count; ++i) {
    keys.insert(fresh_method(keys));
  }
  std::optional<FeatureMap> features;
  if (spec_.code_level) {
    features.emplace();
    for (const auto& k : keys) (*features)[k] = make_vector();
  }
  return std::make_shared<const ClassNode>(std::move(name), std::vector<MethodKey>(keys.begin(), keys.end()),
                                           std::move(features));
}

ClassNodePtr Generator::add_method(const ClassNode& node) {
  std::set<MethodKey> keys(node.methods().begin(), node.methods().end());
  const MethodKey key = fresh_method(keys);
  keys.insert(key);
  std::optional<FeatureMap> features = node.features();
  if (spec_.code_level) {
    if (!features) features.emplace();
    (*features)[key] = make_vector();
  }
  return std::make_shared<const ClassNode>(node.name(), std::vector<MethodKey>(keys.begin(), keys.end()),
                                           std::move(features));
}

ClassNodePtr Generator::remove_method(const ClassNode& node, std::size_t which) {
  std::vector<MethodKey> keys(node.methods().begin(), node.methods().end());
  const MethodKey gone = keys.at(which);
  keys.erase(keys.begin() + static_cast<std::ptrdiff_t>(which));
  std::optional<FeatureMap> features = node.features();
  if (features) features->erase(gone);
  return std::make_shared<const ClassNode>(node.name(), std::move(keys), std::move(features));
}

ClassNodePtr Generator::tweak_features(const ClassNode& node) {
  const auto methods = node.methods();
  const MethodKey& key = methods[rng_.index(methods.size())];
  FeatureMap features = node.features() ? *node.features() : FeatureMap{};
  std::vector<FeatureVector::Entry> entries;
  if (const auto it = features.find(key); it != features.end()) {
    entries.assign(it->second.entries().begin(), it->second.entries().end());
  }
  if (entries.empty() || rng_.chance(0.5)) {
    entries.emplace_back(FeatureItem{FeatureKind::const_string, "str" + std::to_string(rng_.uniform(4096, 8191))},
                         static_cast<std::uint32_t>(rng_.uniform(1, 3)));
  } else {
    entries[rng_.index(entries.size())].second += 1;
  }
  features[key] = FeatureVector(std::move(entries));
  return std::make_shared<const ClassNode>(node.name(), std::vector<MethodKey>(methods.begin(), methods.end()),
                                           std::move(features));
}

void sort_snapshot(Snapshot& s) {
  std::sort(s.begin(), s.end(), [](const ClassNodePtr& a, const ClassNodePtr& b) { return a->name() < b->name(); });
}

Snapshot Generator::initial(const std::string& prefix, std::int64_t count) {
  Snapshot s;
  for (std::int64_t i = 0; i < count; ++i) {
    s.push_back(make_class(prefix));
  }
  sort_snapshot(s);
  return s;
}

Snapshot Generator::release(const Snapshot& prev, const std::string& prefix, bool class_level,
                            bool force_method_add) {
  Snapshot s = prev;
  auto with_methods = [&s]() {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i]->methods().empty()) idx.push_back(i);
    }
    return idx;
  };
  if (class_level || force_method_add) {
    // Every class-level release grows an existing class or adds one, so it is
    // never indistinguishable from its predecessor.
    if (!s.empty() && (force_method_add || rng_.chance(0.7))) {
      const auto i = rng_.index(s.size());
      s[i] = add_method(*s[i]);
    } else {
      s.push_back(make_class(prefix));
    }
    const auto extra = rng_.uniform(0, 2);
    for (std::int64_t m = 0; m < extra; ++m) {
      const auto op = rng_.uniform(0, 6);
      if (op <= 2 && !s.empty()) {
        const auto i = rng_.index(s.size());
        s[i] = add_method(*s[i]);
      } else if (op <= 4 || s.size() <= 1) {
        s.push_back(make_class(prefix));
      } else if (op == 5) {
        const auto idx = with_methods();
        if (!idx.empty()) {
          const auto i = idx[rng_.index(idx.size())];
          if (s[i]->methods().size() > 1) s[i] = remove_method(*s[i], rng_.index(s[i]->methods().size()));
        }
      } else {
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(rng_.index(s.size())));
      }
    }
    sort_snapshot(s);
  }
  if (spec_.code_level) {
    const auto tweaks = class_level ? rng_.uniform(0, 1) : rng_.uniform(1, 2);
    for (std::int64_t t = 0; t < tweaks; ++t) {
      const auto idx = with_methods();
      if (idx.empty()) break;
      const auto i = idx[rng_.index(idx.size())];
      s[i] = tweak_features(*s[i]);
    }
  }
  return s;
}

std::string Generator::next_version_name(const std::string& prev, bool class_level) {
  int major = 1, minor = 0, patch = 0;
  std::sscanf(prev.c_str(), "%d.%d.%d", &major, &minor, &patch);
  if (!class_level) {
    ++patch;
  } else if (rng_.chance(0.15)) {
    ++major;
    minor = 0;
    patch = 0;
  } else {
    ++minor;
    patch = 0;
  }
  return std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
}

void Generator::plan_libraries() {
  for (const auto& o : spec_.libraries) {
    if (o.prefix) prefixes_.insert(*o.prefix);
  }
  const std::size_t count = std::max(spec_.library_count, spec_.libraries.size());
  std::set<std::string> names;
  for (std::size_t i = 0; i < count; ++i) {
    LibraryModel lib;
    const LibraryOverride* o = i < spec_.libraries.size() ? &spec_.libraries[i] : nullptr;
    lib.prefix = o && o->prefix ? *o->prefix : fresh_prefix();
    lib.name = o && !o->name.empty() ? o->name : lib.prefix + rng_.pick(kSuffixes);
    if (!names.insert(lib.name).second) {
      throw Error(ErrorCode::invalid_argument, "library '" + lib.name + "' is listed twice");
    }
    lib.versions = o && o->versions ? *o->versions : static_cast<std::size_t>(rng_.uniform(spec_.versions_per_library));
    if (lib.versions == 0) {
      throw Error(ErrorCode::invalid_argument, "library '" + lib.name + "' needs at least one version");
    }
    lib.classes = o && o->classes ? *o->classes : spec_.classes_per_version;
    check_range(lib.classes, 0, "classes per version");
    if (o && !o->version_names.empty()) {
      if (o->version_names.size() != lib.versions) {
        throw Error(ErrorCode::invalid_argument, "library '" + lib.name + "' lists the wrong number of versions");
      }
      lib.version_names = o->version_names;
    }
    libs_.push_back(std::move(lib));
  }
}

void Generator::plan_groups() {
  for (const auto& g : spec_.duplication) {
    check_range(g.region_classes, 1, "region classes");
    const bool inclusion = g.pattern != DuplicationPattern::multi_party_sharing;
    if (inclusion && g.participants.size() != 2) {
      throw Error(ErrorCode::invalid_argument, std::string(to_string(g.pattern)) + " takes exactly two participants");
    }
    if (!inclusion && g.participants.size() < 2) {
      throw Error(ErrorCode::invalid_argument, "multi_party_sharing needs at least two participants");
    }
    std::vector<std::size_t> members;
    for (const auto& p : g.participants) {
      const auto i = resolve(p);
      if (std::find(members.begin(), members.end(), i) != members.end()) {
        throw Error(ErrorCode::invalid_argument, "library '" + libs_[i].name + "' participates twice in a group");
      }
      members.push_back(i);
    }
    const std::optional<std::size_t> owner = inclusion ? std::optional<std::size_t>(1) : std::nullopt;
    std::size_t region_versions = g.region_versions.value_or(owner ? libs_[members[*owner]].versions : 2);
    if (region_versions == 0) {
      throw Error(ErrorCode::invalid_argument, "a region needs at least one version");
    }

    RegionModel region;
    region.prefix = owner ? libs_[members[*owner]].prefix : fresh_prefix();
    const std::size_t region_id = regions_.size();

    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      LibraryModel& lib = libs_[members[pos]];
      Carry carry{region_id, std::vector<std::optional<std::size_t>>(lib.versions)};
      if (const auto it = g.presence.find(pos); it != g.presence.end()) {
        for (const auto& [v, r] : it->second) {
          if (v >= lib.versions || r >= region_versions) {
            throw Error(ErrorCode::invalid_argument, "presence of '" + lib.name + "' is out of range");
          }
          carry.at[v] = r;
        }
      } else if (owner && pos == *owner) {
        if (region_versions != lib.versions) {
          throw Error(ErrorCode::invalid_argument,
                      "region of owner '" + lib.name + "' must have one version per release");
        }
        for (std::size_t v = 0; v < lib.versions; ++v) carry.at[v] = v;
      } else {
        const std::size_t n = lib.versions;
        for (std::size_t v = 0; v + 1 < n; ++v) {
          carry.at[v] = std::min(region_versions - 1, v * region_versions / (n - 1));
        }
      }
      if (g.pattern == DuplicationPattern::complete_inclusion && owner && pos == *owner) {
        lib.own_classes = false;
      }
      lib.carries.push_back(std::move(carry));
    }
    region.history.resize(region_versions);
    regions_.push_back(std::move(region));
    group_members_.push_back(std::move(members));
  }
}

void Generator::evolve() {
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    const auto& group = spec_.duplication[r];
    auto& region = regions_[r];
    region.history[0] = initial(region.prefix, rng_.uniform(group.region_classes));
    for (std::size_t v = 1; v < region.history.size(); ++v) {
      region.history[v] = release(region.history[v - 1], region.prefix, !rng_.chance(spec_.code_only_release_rate),
                                  false);
    }
  }
  for (auto& lib : libs_) {
    lib.own.resize(lib.versions);
    lib.empty.assign(lib.versions, false);
    lib.own[0] = lib.own_classes ? initial(lib.prefix, rng_.uniform(lib.classes)) : Snapshot{};
    const bool keep_names = !lib.version_names.empty();
    if (!keep_names) lib.version_names.push_back("1.0.0");
    for (std::size_t v = 1; v < lib.versions; ++v) {
      bool toggles = false;
      for (const auto& c : lib.carries) {
        toggles = toggles || c.at[v].has_value() != c.at[v - 1].has_value();
      }
      bool region_moved = false;
      for (const auto& c : lib.carries) {
        region_moved = region_moved || (c.at[v] && c.at[v - 1] && *c.at[v] != *c.at[v - 1]);
      }
      const bool class_level = toggles || !rng_.chance(spec_.code_only_release_rate);
      lib.own[v] = lib.own_classes ? release(lib.own[v - 1], lib.prefix, class_level, toggles) : lib.own[v - 1];
      if (!keep_names) lib.version_names.push_back(next_version_name(lib.version_names.back(),
                                                                      class_level || region_moved));
    }
    for (std::size_t v = 0; v < lib.versions; ++v) {
      lib.empty[v] = rng_.chance(spec_.empty_version_rate);
    }
  }
}

Profile Generator::version_profile(const LibraryModel& lib, std::size_t v) const {
  if (lib.empty[v]) {
    return Profile(level(), {});
  }
  std::vector<ClassNodePtr> nodes = lib.own[v];
  for (const auto& c : lib.carries) {
    if (c.at[v]) {
      const auto& snap = regions_[c.region].history[*c.at[v]];
      nodes.insert(nodes.end(), snap.begin(), snap.end());
    }
  }
  return Profile(level(), std::move(nodes));
}

std::vector<std::pair<LibraryVersionId, Profile>> Generator::assemble() {
  std::vector<std::pair<LibraryVersionId, Profile>> items;
  names_.resize(libs_.size());
  for (std::size_t l = 0; l < libs_.size(); ++l) {
    const auto& lib = libs_[l];
    for (std::size_t v = 0; v < lib.versions; ++v) {
      Profile p = version_profile(lib, v);
      std::set<std::string> names;
      for (const auto& node : p.classes()) names.insert(node->name().str());
      names_[l].push_back(std::move(names));
      items.emplace_back(LibraryVersionId{lib.name, lib.version_names[v]}, std::move(p));
    }
  }
  return items;
}

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return false;
    }
  }
  return true;
}

void Generator::check_feasible() const {
  for (const auto& members : group_members_) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        const auto& a = libs_[members[x]];
        const auto& b = libs_[members[y]];
        bool found = false;
        for (std::size_t i = 0; i < a.versions && !found; ++i) {
          for (std::size_t j = 0; j < b.versions && !found; ++j) {
            found = !a.empty[i] && !b.empty[j] && disjoint(names_[members[x]][i], names_[members[y]][j]);
          }
        }
        if (!found) {
          throw Error(ErrorCode::infeasible_spec,
                      "no conflict-free version pair exists for " + a.name + " and " + b.name);
        }
      }
    }
  }
}

// Predicted from region bookkeeping alone: own classes never share names
// across libraries, so only co-carried region snapshots contribute.
std::vector<ScheduledOverlap> Generator::schedule() const {
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& members : group_members_) {
    for (auto p : members) {
      for (auto q : members) {
        if (p != q) pairs.emplace(p, q);
      }
    }
  }
  auto region_names = [this](std::size_t region, std::size_t snap) {
    std::set<std::string> out;
    for (const auto& n : regions_[region].history[snap]) out.insert(n->name().str());
    return out;
  };
  std::vector<ScheduledOverlap> out;
  for (const auto& [p, q] : pairs) {
    const auto& a = libs_[p];
    const auto& b = libs_[q];
    for (std::size_t i = 0; i < a.versions; ++i) {
      if (a.empty[i]) continue;
      std::size_t size = a.own[i].size();
      for (const auto& c : a.carries) {
        if (c.at[i]) size += regions_[c.region].history[*c.at[i]].size();
      }
      if (size == 0) continue;
      for (std::size_t j = 0; j < b.versions; ++j) {
        if (b.empty[j]) continue;
        std::size_t shared = 0;
        for (const auto& ca : a.carries) {
          for (const auto& cb : b.carries) {
            if (ca.region != cb.region || !ca.at[i] || !cb.at[j]) continue;
            const auto na = region_names(ca.region, *ca.at[i]);
            const auto nb = region_names(cb.region, *cb.at[j]);
            for (const auto& n : na) shared += nb.count(n);
          }
        }
        out.push_back(ScheduledOverlap{{a.name, a.version_names[i]},
                                       {b.name, b.version_names[j]},
                                       Rational(static_cast<std::int64_t>(shared), static_cast<std::int64_t>(size))});
      }
    }
  }
  return out;
}

bool Generator::assemble_app(Corpus& corpus, std::vector<std::pair<std::size_t, std::size_t>> uses, double rate,
                             std::int64_t own_classes) {
  const std::size_t n = corpus.apps.size();
  char id_buf[32];
  std::snprintf(id_buf, sizeof id_buf, "app_%04zu", n);
  const std::string id = id_buf;

  std::vector<ClassNodePtr> nodes;
  std::vector<IntegratedLibrary> truth;
  for (const auto& [l, v] : uses) {
    const auto& lib = libs_[l];
    const Profile p = version_profile(lib, v);
    IntegratedLibrary used{{lib.name, lib.version_names[v]}, {}};
    for (const auto& node : p.classes()) {
      ClassNodePtr copy = node;
      if (rng_.chance(rate)) {
        // Customised integration: strip one method, or the whole class when
        // there is nothing left to strip.
        if (node->methods().size() >= 2) {
          copy = remove_method(*node, rng_.index(node->methods().size()));
        } else {
          continue;
        }
      }
      used.classes.push_back(copy->name());
      nodes.push_back(std::move(copy));
    }
    if (!used.classes.empty()) truth.push_back(std::move(used));
  }
  const std::string prefix = "App" + std::to_string(n);
  for (std::int64_t i = 0; i < own_classes; ++i) {
    nodes.push_back(make_class(prefix));
  }
  std::sort(truth.begin(), truth.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  corpus.apps.push_back(GeneratedApp{id, Profile(level(), std::move(nodes))});
  corpus.truth[id] = std::move(truth);
  return true;
}

void Generator::make_apps(Corpus& corpus) {
  const auto& plan = spec_.apps;
  auto conflict_free = [this](const std::vector<std::pair<std::size_t, std::size_t>>& chosen, std::size_t l,
                              std::size_t v) {
    for (const auto& [cl, cv] : chosen) {
      if (!disjoint(names_[cl][cv], names_[l][v])) return false;
    }
    return true;
  };

  for (const auto& fixed : plan.fixed) {
    std::vector<std::pair<std::size_t, std::size_t>> uses;
    for (const auto& use : fixed.uses) {
      const auto l = resolve(use.library);
      const auto& lib = libs_[l];
      std::size_t v = 0;
      if (const auto* idx = std::get_if<std::size_t>(&use.version)) {
        v = *idx;
      } else {
        const auto& name = std::get<std::string>(use.version);
        const auto it = std::find(lib.version_names.begin(), lib.version_names.end(), name);
        if (it == lib.version_names.end()) {
          throw Error(ErrorCode::invalid_argument, "unknown version " + lib.name + "@" + name);
        }
        v = static_cast<std::size_t>(it - lib.version_names.begin());
      }
      if (v >= lib.versions) {
        throw Error(ErrorCode::invalid_argument, "version position out of range for " + lib.name);
      }
      if (lib.empty[v]) {
        throw Error(ErrorCode::infeasible_spec, lib.name + "@" + lib.version_names[v] + " has an empty profile");
      }
      if (!conflict_free(uses, l, v)) {
        throw Error(ErrorCode::infeasible_spec,
                    "fixed app integrates conflicting versions (" + lib.name + "@" + lib.version_names[v] + ")");
      }
      uses.emplace_back(l, v);
    }
    const double rate = fixed.customization_rate.value_or(plan.customization_rate);
    const auto own = fixed.app_classes.value_or(rng_.uniform(plan.app_classes));
    assemble_app(corpus, std::move(uses), rate, own);
  }

  std::vector<std::size_t> pool;
  for (const auto& ref : plan.pool) pool.push_back(resolve(ref));
  if (plan.pool.empty()) {
    for (std::size_t i = 0; i < libs_.size(); ++i) pool.push_back(i);
  }
  for (std::size_t a = 0; a < plan.count; ++a) {
    const auto want = static_cast<std::size_t>(rng_.uniform(plan.libraries_per_app));
    std::vector<std::size_t> order = pool;
    rng_.shuffle(order);
    std::vector<std::pair<std::size_t, std::size_t>> uses;
    for (const auto l : order) {
      if (uses.size() >= want) break;
      std::vector<std::size_t> versions;
      for (std::size_t v = 0; v < libs_[l].versions; ++v) {
        if (!libs_[l].empty[v]) versions.push_back(v);
      }
      rng_.shuffle(versions);
      for (const auto v : versions) {
        if (conflict_free(uses, l, v)) {
          uses.emplace_back(l, v);
          break;
        }
      }
    }
    if (uses.size() < static_cast<std::size_t>(std::max<std::int64_t>(plan.libraries_per_app.lo, 1))) {
      throw Error(ErrorCode::infeasible_spec, "cannot assemble a conflict-free app from the library pool");
    }
    std::sort(uses.begin(), uses.end());
    assemble_app(corpus, std::move(uses), plan.customization_rate, rng_.uniform(plan.app_classes));
  }
}

Corpus Generator::run() {
  check_range(spec_.versions_per_library, 1, "versions per library");
  check_range(spec_.classes_per_version, 0, "classes per version");
  check_range(spec_.methods_per_class, 0, "methods per class");
  check_range(spec_.apps.libraries_per_app, 0, "libraries per app");
  check_range(spec_.apps.app_classes, 0, "app classes");
  if (!(spec_.feature_density.lo <= spec_.feature_density.hi) || spec_.feature_density.lo < 0) {
    throw Error(ErrorCode::invalid_argument, "feature density range is degenerate");
  }
  check_rate(spec_.code_only_release_rate, "code_only_release_rate");
  check_rate(spec_.empty_version_rate, "empty_version_rate");
  check_rate(spec_.apps.customization_rate, "customization_rate");

  plan_libraries();
  plan_groups();
  evolve();
  auto items = assemble();
  check_feasible();

  Corpus corpus;
  corpus.database = build_database(std::move(items), DatabaseMetadata{});
  corpus.schedule = schedule();
  make_apps(corpus);
  return corpus;
}

// ---- spec parsing ----

[[noreturn]] void spec_error(const std::string& what) {
  throw Error(ErrorCode::schema_violation, "corpus spec: " + what);
}

IntRange int_range(const json& j, const char* key) {
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    return {v, v};
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
    return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
  }
  spec_error(std::string(key) + " must be an integer or [lo, hi]");
}

RealRange real_range(const json& j, const char* key) {
  if (j.is_number()) {
    const auto v = j.get<double>();
    return {v, v};
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  spec_error(std::string(key) + " must be a number or [lo, hi]");
}

double rate(const json& j, const char* key) {
  if (!j.is_number()) spec_error(std::string(key) + " must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const char* key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    spec_error(std::string(key) + " must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

LibraryRef library_ref(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::size_t>();
  spec_error("a library reference must be a name or a position");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      spec_error(std::string("unknown field '") + key + "' in " + where);
    }
  }
}

}  // namespace

CorpusSpec parse_corpus_spec(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_document, e.what());
  }
  if (!root.is_object()) spec_error("top level must be an object");
  reject_unknown(root,
                 {"seed", "library_count", "libraries", "versions_per_library", "classes_per_version",
                  "methods_per_class", "feature_density", "code_level", "code_only_release_rate",
                  "empty_version_rate", "duplication", "apps"},
                 "spec");
  CorpusSpec spec;
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer()) spec_error("seed must be an integer");
    spec.seed = root["seed"].is_number_unsigned() ? root["seed"].get<std::uint64_t>()
                                                  : static_cast<std::uint64_t>(root["seed"].get<std::int64_t>());
  }
  if (root.contains("library_count")) spec.library_count = count(root["library_count"], "library_count");
  if (root.contains("versions_per_library"))
    spec.versions_per_library = int_range(root["versions_per_library"], "versions_per_library");
  if (root.contains("classes_per_version"))
    spec.classes_per_version = int_range(root["classes_per_version"], "classes_per_version");
  if (root.contains("methods_per_class"))
    spec.methods_per_class = int_range(root["methods_per_class"], "methods_per_class");
  if (root.contains("feature_density")) spec.feature_density = real_range(root["feature_density"], "feature_density");
  if (root.contains("code_level")) {
    if (!root["code_level"].is_boolean()) spec_error("code_level must be a boolean");
    spec.code_level = root["code_level"].get<bool>();
  }
  if (root.contains("code_only_release_rate"))
    spec.code_only_release_rate = rate(root["code_only_release_rate"], "code_only_release_rate");
  if (root.contains("empty_version_rate"))
    spec.empty_version_rate = rate(root["empty_version_rate"], "empty_version_rate");

  if (root.contains("libraries")) {
    if (!root["libraries"].is_array()) spec_error("libraries must be an array");
    for (const auto& j : root["libraries"]) {
      if (!j.is_object()) spec_error("library entries must be objects");
      reject_unknown(j, {"name", "prefix", "versions", "classes", "version_names"}, "library");
      LibraryOverride o;
      if (j.contains("name")) {
        if (!j["name"].is_string()) spec_error("library name must be a string");
        o.name = j["name"].get<std::string>();
      }
      if (j.contains("prefix")) {
        if (!j["prefix"].is_string() || j["prefix"].get<std::string>().empty())
          spec_error("prefix must be a non-empty string");
        o.prefix = j["prefix"].get<std::string>();
      }
      if (j.contains("versions")) o.versions = count(j["versions"], "versions");
      if (j.contains("classes")) o.classes = int_range(j["classes"], "classes");
      if (j.contains("version_names")) {
        if (!j["version_names"].is_array()) spec_error("version_names must be an array");
        for (const auto& v : j["version_names"]) {
          if (!v.is_string()) spec_error("version names must be strings");
          o.version_names.push_back(v.get<std::string>());
        }
        if (!o.versions) o.versions = o.version_names.size();
      }
      spec.libraries.push_back(std::move(o));
    }
  }

  if (root.contains("duplication")) {
    if (!root["duplication"].is_array()) spec_error("duplication must be an array");
    for (const auto& j : root["duplication"]) {
      if (!j.is_object()) spec_error("duplication entries must be objects");
      reject_unknown(j, {"pattern", "participants", "region_classes", "region_versions", "presence"}, "duplication");
      SharingGroup g;
      if (!j.contains("pattern") || !j["pattern"].is_string()) spec_error("duplication needs a pattern");
      g.pattern = parse_duplication_pattern(j["pattern"].get<std::string>());
      if (!j.contains("participants") || !j["participants"].is_array()) spec_error("duplication needs participants");
      for (const auto& p : j["participants"]) g.participants.push_back(library_ref(p));
      if (j.contains("region_classes")) g.region_classes = int_range(j["region_classes"], "region_classes");
      if (j.contains("region_versions")) g.region_versions = count(j["region_versions"], "region_versions");
      if (j.contains("presence")) {
        if (!j["presence"].is_object()) spec_error("presence must be an object");
        for (const auto& [key, value] : j["presence"].items()) {
          std::optional<std::size_t> pos;
          for (std::size_t i = 0; i < g.participants.size(); ++i) {
            if (const auto* s = std::get_if<std::string>(&g.participants[i]); s && *s == key) pos = i;
          }
          if (!pos && !key.empty() && std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            pos = std::stoul(key);
          }
          if (!pos || *pos >= g.participants.size()) spec_error("presence names an unknown participant '" + key + "'");
          if (!value.is_object()) spec_error("presence entries map version positions to region versions");
          auto& map = g.presence[*pos];
          for (const auto& [vkey, rv] : value.items()) {
            if (vkey.empty() || !std::all_of(vkey.begin(), vkey.end(), [](char c) { return c >= '0' && c <= '9'; })) {
              spec_error("presence version keys must be positions");
            }
            map[std::stoul(vkey)] = count(rv, "region version");
          }
        }
      }
      spec.duplication.push_back(std::move(g));
    }
  }

  if (root.contains("apps")) {
    const json& j = root["apps"];
    if (!j.is_object()) spec_error("apps must be an object");
    reject_unknown(j, {"count", "libraries_per_app", "customization_rate", "app_classes", "pool", "fixed"}, "apps");
    auto& plan = spec.apps;
    if (j.contains("count")) plan.count = count(j["count"], "count");
    if (j.contains("libraries_per_app")) plan.libraries_per_app = int_range(j["libraries_per_app"], "libraries_per_app");
    if (j.contains("customization_rate")) plan.customization_rate = rate(j["customization_rate"], "customization_rate");
    if (j.contains("app_classes")) plan.app_classes = int_range(j["app_classes"], "app_classes");
    if (j.contains("pool")) {
      if (!j["pool"].is_array()) spec_error("pool must be an array");
      for (const auto& p : j["pool"]) plan.pool.push_back(library_ref(p));
    }
    if (j.contains("fixed")) {
      if (!j["fixed"].is_array()) spec_error("fixed must be an array");
      for (const auto& f : j["fixed"]) {
        if (!f.is_object() || !f.contains("uses") || !f["uses"].is_array()) spec_error("fixed apps need uses");
        reject_unknown(f, {"uses", "customization_rate", "app_classes"}, "fixed app");
        FixedApp app;
        for (const auto& u : f["uses"]) {
          if (!u.is_object() || !u.contains("library") || !u.contains("version")) {
            spec_error("a use needs library and version");
          }
          AppUse use{library_ref(u["library"]), std::size_t{0}};
          if (u["version"].is_string()) {
            use.version = u["version"].get<std::string>();
          } else {
            use.version = count(u["version"], "version");
          }
          app.uses.push_back(std::move(use));
        }
        if (f.contains("customization_rate")) app.customization_rate = rate(f["customization_rate"], "customization_rate");
        if (f.contains("app_classes")) {
          if (!f["app_classes"].is_number_integer()) spec_error("app_classes must be an integer");
          app.app_classes = f["app_classes"].get<std::int64_t>();
        }
        plan.fixed.push_back(std::move(app));
      }
    }
  }
  return spec;
}

Corpus generate_corpus(const CorpusSpec& spec) {
  Generator gen(spec);
  return gen.run();
}

std::string truth_to_json(const GroundTruth& truth) {
  json root = json::object();
  for (const auto& [app, uses] : truth) {
    json list = json::array();
    for (const auto& use : uses) {
      json classes = json::array();
      for (const auto& c : use.classes) classes.push_back(c.str());
      list.push_back({{"library", use.id.library}, {"version", use.id.version}, {"classes", std::move(classes)}});
    }
    root[app] = std::move(list);
  }
  return root.dump(1) + "\n";
}

GroundTruth parse_truth(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_document, e.what());
  }
  auto fail = [](const std::string& what) -> void { throw Error(ErrorCode::schema_violation, "truth: " + what); };
  if (!root.is_object()) fail("top level must map app ids to lists");
  GroundTruth truth;
  for (const auto& [app, list] : root.items()) {
    if (!list.is_array()) fail("entry for '" + app + "' must be a list");
    auto& uses = truth[app];
    for (const auto& u : list) {
      if (!u.is_object() || !u.contains("library") || !u["library"].is_string() || !u.contains("version") ||
          !u["version"].is_string()) {
        fail("entries need string library and version");
      }
      IntegratedLibrary use{{u["library"].get<std::string>(), u["version"].get<std::string>()}, {}};
      if (u.contains("classes")) {
        if (!u["classes"].is_array()) fail("classes must be a list");
        for (const auto& c : u["classes"]) {
          if (!c.is_string()) fail("class names must be strings");
          use.classes.push_back(ClassName::parse(c.get<std::string>()));
        }
        std::sort(use.classes.begin(), use.classes.end());
      }
      uses.push_back(std::move(use));
    }
  }
  return truth;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  const auto db_dir = dir / "db";
  save_database(corpus.database, db_dir);
  save_index(build_index(corpus.database), db_dir / kIndexFileName);
  for (const auto& app : corpus.apps) {
    write_file(dir / "apps" / (app.id + ".profile"), serialize_profile(app.profile) + "\n");
  }
  write_file(dir / "truth.json", truth_to_json(corpus.truth));
  json list = json::array();
  for (const auto& s : corpus.schedule) {
    list.push_back({{"a", {{"library", s.a.library}, {"version", s.a.version}}},
                    {"b", {{"library", s.b.library}, {"version", s.b.version}}},
                    {"ratio", to_exact_string(s.ratio)},
                    {"decimal", to_decimal_string(s.ratio)}});
  }
  write_file(dir / "schedule.json", list.dump(1) + "\n");
}

}  // namespace libpin
