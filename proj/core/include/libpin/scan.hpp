#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "libpin/analytics.hpp"
#include "libpin/database.hpp"
#include "libpin/index.hpp"
#include "libpin/recovery.hpp"
#include "libpin/version_detect.hpp"

namespace libpin {

struct ScanOptions {
  bool code_level = false;          // refine V_p with code features
  std::size_t max_candidates = 1;   // refine only when |V_p| exceeds this
  std::vector<Advisory> advisories;
  bool timings = false;             // wall-clock timings make reports non-reproducible
};

struct AdvisoryHit {
  std::string reference;
  Triage triage = Triage::safe;
};

struct InstanceReport {
  LibraryInstance instance;
  VersionVerdict verdict;
  std::vector<AdvisoryHit> advisories;  // not_applicable omitted
};

struct ScanReport {
  std::string app_id;
  std::vector<InstanceReport> instances;  // by library name
  std::vector<ClassName> residual;
  std::size_t unmatched = 0;
  std::string database_digest;
  std::vector<std::pair<std::string, double>> timings_ms;  // phase order
};

/// Recovery, class-level version detection and, when requested, code-level
/// refinement plus advisory triage. Throws CodeLevelUnavailable when
/// refinement is requested for a class-level app.
ScanReport scan_app(std::string app_id, const Profile& app, const ClassIndex& index, const LibraryDatabase& db,
                    const ScanOptions& options);

/// Deterministic: members are emitted in a fixed order and ratios as exact
/// fractions next to 6-place decimals.
std::string report_to_json(const ScanReport& report);
std::string report_to_text(const ScanReport& report);

struct ReportedInstance {
  std::string library;
  std::vector<std::string> versions;  // detected versions
};

struct ReportSummary {
  std::string app_id;
  std::vector<ReportedInstance> instances;
};

/// Reads back the parts of a JSON scan report that triage needs.
ReportSummary parse_report(std::string_view document);

}  // namespace libpin
