#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "libpin/corpus.hpp"
#include "libpin/scan.hpp"

namespace libpin {

struct VerdictTally {
  std::size_t correct = 0;
  std::size_t sound = 0;
  std::size_t incorrect = 0;

  [[nodiscard]] std::size_t total() const noexcept { return correct + sound + incorrect; }
  void add(VerdictQuality q);
};

struct BenchSummary {
  std::size_t apps = 0;
  std::size_t uses = 0;  // ground-truth library uses
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  Rational precision;  // TP / (TP + FP), 1 when nothing was reported
  Rational recall;     // TP / (TP + FN), 1 when there was nothing to find
  VerdictTally class_level;  // over true positives
  VerdictTally code_level;   // populated when the scan refines
  bool refined = false;
};

/// Scans every app and scores it against the truth. Every app needs a truth
/// entry and vice versa (InvalidArgument otherwise).
BenchSummary run_bench(const std::vector<std::pair<std::string, Profile>>& apps, const GroundTruth& truth,
                       const ClassIndex& index, const LibraryDatabase& db, const ScanOptions& options);

std::string bench_to_json(const BenchSummary& summary);
std::string bench_to_text(const BenchSummary& summary);

}  // namespace libpin
