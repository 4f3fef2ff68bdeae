#include "libpin/scan.hpp"

#include <chrono>
#include <sstream>

#include <json.hpp>

#include "libpin/error.hpp"

namespace libpin {

using nlohmann::ordered_json;

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

ordered_json ratio(const Rational& r) { return to_exact_string(r); }

}  // namespace

ScanReport scan_app(std::string app_id, const Profile& app, const ClassIndex& index, const LibraryDatabase& db,
                    const ScanOptions& options) {
  if (options.code_level && app.level() != Level::code_level) {
    throw Error(ErrorCode::code_level_unavailable, "app '" + app_id + "' has no code-level profile");
  }
  ScanReport report;
  report.app_id = std::move(app_id);
  report.database_digest = to_hex(index.manifest_digest());

  auto t0 = std::chrono::steady_clock::now();
  RecoveryResult result = recover(app, index);
  if (options.timings) report.timings_ms.emplace_back("recovery", elapsed_ms(t0));

  t0 = std::chrono::steady_clock::now();
  for (auto& inst : result.instances) {
    InstanceReport r;
    r.verdict = class_level_verdict(inst);
    if (options.code_level && inst.versions.size() > options.max_candidates) {
      r.verdict = refine_versions(inst, app, inst.versions, db);
    }
    for (const auto& adv : options.advisories) {
      const Triage t = classify(r.verdict, adv, db);
      if (t != Triage::not_applicable) {
        r.advisories.push_back(AdvisoryHit{adv.reference.empty() ? adv.library : adv.reference, t});
      }
    }
    r.instance = std::move(inst);
    report.instances.push_back(std::move(r));
  }
  if (options.timings) report.timings_ms.emplace_back("version_detection", elapsed_ms(t0));

  report.residual = std::move(result.residual);
  report.unmatched = result.unmatched.size();
  return report;
}

std::string report_to_json(const ScanReport& report) {
  ordered_json root;
  root["app"] = report.app_id;
  root["database_digest"] = report.database_digest;
  ordered_json instances = ordered_json::array();
  for (const auto& r : report.instances) {
    const auto& inst = r.instance;
    ordered_json j;
    j["library"] = inst.library;
    j["class_count"] = inst.classes.size();
    j["score"] = ratio(inst.score);
    j["score_decimal"] = to_decimal_string(inst.score);
    j["versions"] = inst.versions;
    j["scoring_version"] = inst.scoring_version;
    j["indicators"] = {{"matched", inst.indicators.matched},
                       {"sim_s", ratio(inst.indicators.sim_s)},
                       {"sim_a", ratio(inst.indicators.sim_a)},
                       {"prop", ratio(inst.indicators.prop)},
                       {"comp", ratio(inst.indicators.comp)}};
    ordered_json detection;
    detection["phase"] = to_string(r.verdict.phase);
    detection["candidates"] = r.verdict.candidates_out;
    if (!r.verdict.similarity.empty()) {
      ordered_json sim;
      for (const auto& v : r.verdict.candidates_in) {
        if (const auto it = r.verdict.similarity.find(v); it != r.verdict.similarity.end()) {
          sim[v] = ratio(it->second);
        }
      }
      detection["similarity"] = std::move(sim);
    }
    j["version_detection"] = std::move(detection);
    if (!r.advisories.empty()) {
      ordered_json adv = ordered_json::array();
      for (const auto& a : r.advisories) {
        adv.push_back({{"advisory", a.reference}, {"classification", to_string(a.triage)}});
      }
      j["advisories"] = std::move(adv);
    }
    ordered_json classes = ordered_json::array();
    for (const auto& c : inst.classes) classes.push_back(c.name.str());
    j["classes"] = std::move(classes);
    instances.push_back(std::move(j));
  }
  root["instances"] = std::move(instances);
  ordered_json residual = ordered_json::array();
  for (const auto& c : report.residual) residual.push_back(c.str());
  root["residual"] = std::move(residual);
  root["unmatched"] = report.unmatched;
  if (!report.timings_ms.empty()) {
    ordered_json t;
    for (const auto& [phase, ms] : report.timings_ms) t[phase] = ms;
    root["timings_ms"] = std::move(t);
  }
  return root.dump(2) + "\n";
}

std::string report_to_text(const ScanReport& report) {
  std::ostringstream out;
  out << "app " << report.app_id << "\n";
  out << "database " << report.database_digest << "\n";
  out << report.instances.size() << " instance(s)\n";
  for (const auto& r : report.instances) {
    const auto& inst = r.instance;
    out << "  " << inst.library << "  classes=" << inst.classes.size() << "  score=" << to_decimal_string(inst.score)
        << "  versions=";
    for (std::size_t i = 0; i < r.verdict.candidates_out.size(); ++i) {
      out << (i ? "," : "") << r.verdict.candidates_out[i];
    }
    out << " (" << to_string(r.verdict.phase) << ")\n";
    for (const auto& a : r.advisories) {
      out << "    " << a.reference << ": " << to_string(a.triage) << "\n";
    }
  }
  out << "residual " << report.residual.size() << "\n";
  out << "unmatched " << report.unmatched << "\n";
  for (const auto& [phase, ms] : report.timings_ms) {
    out << "time " << phase << " " << ms << " ms\n";
  }
  return out.str();
}

ReportSummary parse_report(std::string_view document) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(document.begin(), document.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::malformed_document, e.what());
  }
  auto fail = [](const std::string& what) -> void { throw Error(ErrorCode::schema_violation, "report: " + what); };
  if (!root.is_object() || !root.contains("app") || !root["app"].is_string() || !root.contains("instances") ||
      !root["instances"].is_array()) {
    fail("expected app and instances");
  }
  ReportSummary summary;
  summary.app_id = root["app"].get<std::string>();
  for (const auto& j : root["instances"]) {
    if (!j.is_object() || !j.contains("library") || !j["library"].is_string()) fail("instance without library");
    ReportedInstance inst;
    inst.library = j["library"].get<std::string>();
    const nlohmann::json* versions = nullptr;
    if (j.contains("version_detection") && j["version_detection"].contains("candidates")) {
      versions = &j["version_detection"]["candidates"];
    } else if (j.contains("versions")) {
      versions = &j["versions"];
    }
    if (!versions || !versions->is_array()) fail("instance without detected versions");
    for (const auto& v : *versions) {
      if (!v.is_string()) fail("versions must be strings");
      inst.versions.push_back(v.get<std::string>());
    }
    summary.instances.push_back(std::move(inst));
  }
  return summary;
}

}  // namespace libpin
