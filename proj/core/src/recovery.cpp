#include "libpin/recovery.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "libpin/error.hpp"

namespace libpin {

namespace {

// Per-version Sim_s and |M| sums for one library candidate, so V_p can be
// refreshed after every transfer without rescanning the candidate.
class Accumulator {
 public:
  Accumulator(std::uint32_t library, const ClassIndex& index)
      : index_(&index),
        library_(library),
        sim_s_(index.libraries()[library].versions.size()),
        matched_(index.libraries()[library].versions.size(), 0) {}

  void add(const Counterparts& cp) {
    for (const auto& match : cp.matches) {
      if (match.entry->version.library == library_) {
        sim_s_[match.entry->version.version] += match.score;
        ++matched_[match.entry->version.version];
      }
    }
    ++size_;
    best_valid_ = false;
  }

  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::uint32_t library() const { return library_; }

  const std::vector<std::uint32_t>& best_versions() {
    if (best_valid_) {
      return best_;
    }
    best_.clear();
    const auto& counts = index_->libraries()[library_].class_counts;
    const Rational* max = nullptr;
    for (std::uint32_t v = 0; v < sim_s_.size(); ++v) {
      if (counts[v] == 0) {
        continue;
      }
      if (max == nullptr || sim_s_[v] > *max) {
        max = &sim_s_[v];
        best_.assign(1, v);
      } else if (sim_s_[v] == *max) {
        best_.push_back(v);
      }
    }
    best_valid_ = true;
    return best_;
  }

  [[nodiscard]] Indicators indicators_at(std::uint32_t v) const {
    Indicators out;
    out.matched = matched_[v];
    out.sim_s = sim_s_[v];
    const auto count = index_->libraries()[library_].class_counts[v];
    if (out.matched > 0) {
      out.sim_a = out.sim_s / static_cast<std::int64_t>(out.matched);
    }
    if (count > 0) {
      out.prop = Rational(static_cast<std::int64_t>(out.matched), static_cast<std::int64_t>(count));
    }
    if (size_ > 0) {
      out.comp = Rational(static_cast<std::int64_t>(out.matched), static_cast<std::int64_t>(size_));
    }
    return out;
  }

  struct Scored {
    Rational score;
    std::optional<std::uint32_t> version;
  };

  Scored score() {
    Scored best{Rational(0), std::nullopt};
    if (size_ == 0) {
      return best;
    }
    for (const auto v : best_versions()) {
      const Indicators ind = indicators_at(v);
      const Rational s = ind.sim_a * ind.prop * ind.comp;
      if (!best.version || s > best.score) {
        best = {s, v};
      }
    }
    return best;
  }

 private:
  const ClassIndex* index_;
  std::uint32_t library_;
  std::vector<Rational> sim_s_;
  std::vector<std::uint32_t> matched_;
  std::size_t size_ = 0;
  std::vector<std::uint32_t> best_;
  bool best_valid_ = false;
};

// V_p of a one-class candidate within `library`.
std::vector<std::uint32_t> single_class_versions(const Counterparts& cp, std::uint32_t library) {
  std::vector<std::uint32_t> out;
  const Rational* max = nullptr;
  for (const auto& match : cp.matches) {
    if (match.entry->version.library != library) {
      continue;
    }
    if (max == nullptr || match.score > *max) {
      max = &match.score;
      out.assign(1, match.entry->version.version);
    } else if (match.score == *max) {
      out.push_back(match.entry->version.version);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool intersects(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

std::uint32_t require_library(const ClassIndex& index, std::string_view library) {
  const auto id = index.library_id(library);
  if (!id) {
    throw Error(ErrorCode::unknown_version, "library '" + std::string(library) + "' is not indexed");
  }
  return *id;
}

Accumulator accumulate(std::span<const ClassName> candidate, std::uint32_t library, const RegionGraph& graph,
                       const ClassIndex& index) {
  Accumulator acc(library, index);
  for (const auto& name : candidate) {
    const auto it = graph.counterparts.find(name.str());
    if (it != graph.counterparts.end()) {
      acc.add(it->second);
    } else {
      acc.add(Counterparts{name, {}});
    }
  }
  return acc;
}

}  // namespace

Counterparts counterparts(const ClassNode& ac, const ClassIndex& index) {
  Counterparts out{ac.name(), {}};
  for (const auto& entry : index.lookup(ac.name())) {
    Rational score = class_similarity(ac, *entry.node);
    if (score > 0) {
      out.matches.push_back(Match{&entry, std::move(score)});
    }
  }
  return out;
}

std::vector<std::vector<std::string>> RegionGraph::successors(std::string_view library) const {
  std::vector<std::vector<std::string>> out;
  for (const auto& [key, classes] : floating) {
    if (std::find(key.begin(), key.end(), library) != key.end()) {
      out.push_back(key);
    }
  }
  return out;
}

RegionGraph build_region_graph(const Profile& app, const ClassIndex& index) {
  RegionGraph graph;
  for (const auto& node : app.classes()) {
    Counterparts cp = counterparts(*node, index);
    if (cp.matches.empty()) {
      graph.unmatched.push_back(node->name());
      continue;
    }
    std::set<std::string> libs;
    for (const auto& match : cp.matches) {
      libs.insert(index.libraries()[match.entry->version.library].name);
    }
    for (const auto& lib : libs) {
      graph.settled.try_emplace(lib);
    }
    if (libs.size() == 1) {
      graph.settled[*libs.begin()].push_back(node->name());
    } else {
      graph.floating[std::vector<std::string>(libs.begin(), libs.end())].push_back(node->name());
    }
    graph.counterparts.emplace(node->name().str(), std::move(cp));
  }
  return graph;
}

Indicators indicators(std::span<const ClassName> candidate, const LibraryVersionId& version,
                      const RegionGraph& graph, const ClassIndex& index) {
  const auto ref = index.find(version);
  if (!ref) {
    throw Error(ErrorCode::unknown_version, version.str() + " is not indexed");
  }
  return accumulate(candidate, ref->library, graph, index).indicators_at(ref->version);
}

std::vector<std::string> best_version_set(std::span<const ClassName> candidate, std::string_view library,
                                          const RegionGraph& graph, const ClassIndex& index) {
  const auto lib = require_library(index, library);
  auto acc = accumulate(candidate, lib, graph, index);
  std::vector<std::string> out;
  for (const auto v : acc.best_versions()) {
    out.push_back(index.libraries()[lib].versions[v]);
  }
  return out;
}

Rational candidate_score(std::span<const ClassName> candidate, std::string_view library,
                         const RegionGraph& graph, const ClassIndex& index) {
  const auto lib = require_library(index, library);
  return accumulate(candidate, lib, graph, index).score().score;
}

bool compatible(std::span<const ClassName> candidate, const ClassName& floating_class, std::string_view library,
                const RegionGraph& graph, const ClassIndex& index) {
  const auto lib = require_library(index, library);
  auto acc = accumulate(candidate, lib, graph, index);
  const auto it = graph.counterparts.find(floating_class.str());
  if (it == graph.counterparts.end()) {
    return false;
  }
  return intersects(acc.best_versions(), single_class_versions(it->second, lib));
}

RecoveryResult filter_candidates(const RegionGraph& graph, const ClassIndex& index) {
  struct Candidate {
    std::string name;
    std::vector<const Counterparts*> classes;
    Accumulator acc;
    std::vector<std::size_t> successors;  // floating node positions, key order
    Rational extended;
    bool removed = false;
  };
  struct FloatingNode {
    std::vector<std::size_t> predecessors;
    std::vector<const Counterparts*> classes;
  };

  auto cp_of = [&graph](const ClassName& name) { return &graph.counterparts.at(name.str()); };

  std::vector<Candidate> candidates;
  std::map<std::string, std::size_t, std::less<>> position;
  for (const auto& [name, classes] : graph.settled) {
    const auto lib = require_library(index, name);
    Candidate c{name, {}, Accumulator(lib, index), {}, Rational(0)};
    for (const auto& cls : classes) {
      c.classes.push_back(cp_of(cls));
      c.acc.add(*c.classes.back());
    }
    position.emplace(name, candidates.size());
    candidates.push_back(std::move(c));
  }
  std::vector<FloatingNode> floating;
  for (const auto& [key, classes] : graph.floating) {
    FloatingNode node;
    for (const auto& cls : classes) {
      node.classes.push_back(cp_of(cls));
    }
    for (const auto& lib : key) {
      const auto pos = position.at(lib);
      node.predecessors.push_back(pos);
      candidates[pos].successors.push_back(floating.size());
    }
    floating.push_back(std::move(node));
  }

  // Round one: bigger candidates test floating classes first.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidates[i].classes.empty()) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&candidates](std::size_t a, std::size_t b) {
    return candidates[a].classes.size() > candidates[b].classes.size();
  });
  for (const auto ci : order) {
    Candidate& c = candidates[ci];
    for (const auto fi : c.successors) {
      auto& pending = floating[fi].classes;
      std::vector<const Counterparts*> kept;
      for (const Counterparts* cls : pending) {
        if (intersects(c.acc.best_versions(), single_class_versions(*cls, c.acc.library()))) {
          c.classes.push_back(cls);
          c.acc.add(*cls);
        } else {
          kept.push_back(cls);
        }
      }
      pending = std::move(kept);
    }
  }

  // Round two: trial and error on candidates extended by their successors.
  auto extended_score = [&floating](const Candidate& c) {
    Accumulator acc = c.acc;
    for (const auto fi : c.successors) {
      for (const Counterparts* cls : floating[fi].classes) {
        acc.add(*cls);
      }
    }
    return acc.score().score;
  };
  for (auto& c : candidates) {
    c.extended = extended_score(c);
  }

  RecoveryResult result;
  std::vector<std::size_t> accepted;
  for (std::size_t remaining = candidates.size(); remaining > 0; --remaining) {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!candidates[i].removed && (!pick || candidates[i].extended > candidates[*pick].extended)) {
        pick = i;
      }
    }
    Candidate& c = candidates[*pick];
    c.removed = true;
    if (c.extended <= 0) {
      for (const Counterparts* cls : c.classes) {
        result.residual.push_back(cls->app_class);
      }
      continue;
    }
    accepted.push_back(*pick);
    for (const auto fi : c.successors) {
      FloatingNode& node = floating[fi];
      if (node.classes.empty()) {
        continue;
      }
      for (const Counterparts* cls : node.classes) {
        c.classes.push_back(cls);
        c.acc.add(*cls);
      }
      node.classes.clear();
      for (const auto pi : node.predecessors) {
        if (!candidates[pi].removed) {
          candidates[pi].extended = extended_score(candidates[pi]);
        }
      }
    }
  }
  for (const auto& node : floating) {
    for (const Counterparts* cls : node.classes) {
      result.residual.push_back(cls->app_class);
    }
  }

  std::sort(accepted.begin(), accepted.end());
  for (const auto ci : accepted) {
    Candidate& c = candidates[ci];
    const auto scored = c.acc.score();
    const auto lib = c.acc.library();
    const auto& info = index.libraries()[lib];
    LibraryInstance inst;
    inst.library = c.name;
    inst.score = scored.score;
    inst.indicators = c.acc.indicators_at(*scored.version);
    inst.scoring_version = info.versions[*scored.version];
    for (const auto v : c.acc.best_versions()) {
      inst.versions.push_back(info.versions[v]);
    }
    const VersionRef at{lib, *scored.version};
    for (const Counterparts* cls : c.classes) {
      std::optional<Rational> chosen;
      Rational best(0);
      for (const auto& match : cls->matches) {
        if (match.entry->version == at) {
          chosen = match.score;
        }
        if (match.entry->version.library == lib && match.score > best) {
          best = match.score;
        }
      }
      inst.classes.push_back(InstanceClass{cls->app_class, chosen ? *chosen : best});
    }
    std::sort(inst.classes.begin(), inst.classes.end(),
              [](const InstanceClass& a, const InstanceClass& b) { return a.name < b.name; });
    result.instances.push_back(std::move(inst));
  }
  std::sort(result.residual.begin(), result.residual.end());
  result.unmatched = graph.unmatched;
  return result;
}

RecoveryResult recover(const Profile& app, const ClassIndex& index) {
  return filter_candidates(build_region_graph(app, index), index);
}

}  // namespace libpin
