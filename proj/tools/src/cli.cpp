#include "libpin_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "libpin/analytics.hpp"
#include "libpin/bench.hpp"
#include "libpin/corpus.hpp"
#include "libpin/database.hpp"
#include "libpin/error.hpp"
#include "libpin/index.hpp"
#include "libpin/profile_io.hpp"
#include "libpin/scan.hpp"

namespace libpin::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Loaded {
  LibraryDatabase db;
  ClassIndex index;
};

Loaded load(const std::string& db_dir) {
  if (db_dir.empty()) {
    throw Error(ErrorCode::invalid_argument, "no database given (use --db or LIBPIN_DB)");
  }
  Loaded l;
  l.db = load_database(db_dir);
  l.index = load_index(fs::path(db_dir) / kIndexFileName, l.db.manifest_digest());
  return l;
}

// `<dir>/*.profile` sorted by file name, or the single file itself.
std::vector<fs::path> profile_inputs(const fs::path& input, const char* extension) {
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input)) {
      if (e.is_regular_file() && e.path().extension() == extension) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    if (!fs::exists(input)) throw Error(ErrorCode::io_failure, input.string() + " does not exist");
    files.push_back(input);
  }
  return files;
}

std::string app_id_of(const fs::path& file) { return file.stem().string(); }

ordered_json id_json(const LibraryVersionId& id) { return {{"library", id.library}, {"version", id.version}}; }

// ---- db ----

int cmd_db_build(const std::string& profiles_dir, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  ProfileTree tree = read_profile_tree(profiles_dir);
  if (!tree.errors.empty()) {
    for (const auto& e : tree.errors) err << e.file.string() << ": " << e.message << "\n";
    return kExitInput;
  }
  DatabaseMetadata meta;
  meta.created = utc_timestamp_now();
  const LibraryDatabase db = build_database(std::move(tree.items), meta);
  save_database(db, out_dir);
  save_index(build_index(db), fs::path(out_dir) / kIndexFileName);
  out << db.size() << " entries, " << db.empty_count() << " empty\n";
  return kExitOk;
}

int cmd_db_index(const std::string& db_dir, std::ostream& out) {
  const LibraryDatabase db = load_database(db_dir);
  const ClassIndex index = build_index(db);
  save_index(index, fs::path(db_dir) / kIndexFileName);
  out << index.name_count() << " class names, " << index.entry_count() << " postings\n";
  return kExitOk;
}

// ---- scan ----

struct ScanArgs {
  std::string db;
  std::string input;
  bool code_level = false;
  std::size_t max_candidates = 1;
  std::string advisories;
  std::string format = "json";
  std::string out_dir;
  bool timings = false;
  unsigned jobs = 0;
};

int cmd_scan(const ScanArgs& a, std::ostream& out, std::ostream& err) {
  const Loaded l = load(a.db);
  ScanOptions options;
  options.code_level = a.code_level;
  options.max_candidates = a.max_candidates;
  options.timings = a.timings;
  if (!a.advisories.empty()) options.advisories = parse_advisories(read_file(a.advisories));

  const auto files = profile_inputs(a.input, ".profile");
  struct Slot {
    std::string text;
    std::string error;
    bool stale = false;
  };
  std::vector<Slot> slots(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        const Profile app = parse_profile(read_file(files[i]));
        const ScanReport r = scan_app(app_id_of(files[i]), app, l.index, l.db, options);
        slots[i].text = a.format == "text" ? report_to_text(r) : report_to_json(r);
      } catch (const Error& e) {
        slots[i].error = files[i].string() + ": " + e.what();
        slots[i].stale = e.code() == ErrorCode::stale_index;
      } catch (const std::exception& e) {
        slots[i].error = files[i].string() + ": " + e.what();
      }
    }
  };
  unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(files.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int status = kExitOk;
  const char* ext = a.format == "text" ? ".txt" : ".json";
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!slots[i].error.empty()) {
      err << slots[i].error << "\n";
      status = std::max(status, slots[i].stale ? kExitState : kExitInput);
      continue;
    }
    if (a.out_dir.empty()) {
      out << slots[i].text;
    } else {
      write_file(fs::path(a.out_dir) / (app_id_of(files[i]) + ext), slots[i].text);
    }
  }
  return status;
}

// ---- bench ----

int cmd_bench(const std::string& db_dir, const std::string& apps_dir, const std::string& truth_file, bool code_level,
              std::size_t max_candidates, const std::string& format, std::ostream& out) {
  const Loaded l = load(db_dir);
  const GroundTruth truth = parse_truth(read_file(truth_file));
  std::vector<std::pair<std::string, Profile>> apps;
  for (const auto& f : profile_inputs(apps_dir, ".profile")) {
    apps.emplace_back(app_id_of(f), parse_profile(read_file(f)));
  }
  ScanOptions options;
  options.code_level = code_level;
  options.max_candidates = max_candidates;
  const BenchSummary s = run_bench(apps, truth, l.index, l.db, options);
  out << (format == "text" ? bench_to_text(s) : bench_to_json(s));
  return kExitOk;
}

// ---- analytics ----

int cmd_overlap(const std::string& db_dir, const std::vector<std::string>& libs, std::ostream& out) {
  const LibraryDatabase db = load_database(db_dir);
  ordered_json root;
  if (libs.size() == 2) {
    const OverlapMatrix m = overlap_matrix(libs[0], libs[1], db);
    root["a"] = m.a;
    root["b"] = m.b;
    root["rows"] = m.rows;
    root["columns"] = m.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& r : m.ratio) {
      ordered_json row = ordered_json::array();
      for (const auto& v : r) row.push_back(to_exact_string(v));
      rows.push_back(std::move(row));
    }
    root["ratio"] = std::move(rows);
  } else if (libs.empty()) {
    ordered_json pairs = ordered_json::array();
    for (const auto& p : overlap_report(db).pairs) {
      pairs.push_back({{"a", p.a},
                       {"b", p.b},
                       {"ratio", to_exact_string(p.ratio)},
                       {"decimal", to_decimal_string(p.ratio)},
                       {"a_version", p.a_version},
                       {"b_version", p.b_version}});
    }
    root["pairs"] = std::move(pairs);
  } else {
    throw Error(ErrorCode::invalid_argument, "overlap takes either no library or two");
  }
  out << root.dump(2) << "\n";
  return kExitOk;
}

int cmd_uniq(const std::string& db_dir, const std::string& level, std::ostream& out) {
  const LibraryDatabase db = load_database(db_dir);
  const UniquenessReport r = uniqueness_groups(db, parse_level(level));
  ordered_json root;
  root["level"] = to_string(r.level);
  root["profiles"] = r.profiles;
  root["unique_signatures"] = r.groups.size();
  ordered_json hist = ordered_json::object();
  for (const auto& [size, n] : r.histogram) hist[std::to_string(size)] = n;
  root["histogram"] = std::move(hist);
  ordered_json groups = ordered_json::array();
  for (const auto& g : r.groups) {
    if (g.members.size() < 2) continue;
    ordered_json members = ordered_json::array();
    for (const auto& m : g.members) members.push_back(id_json(m));
    groups.push_back({{"signature", g.signature}, {"members", std::move(members)}});
  }
  root["shared"] = std::move(groups);
  out << root.dump(2) << "\n";
  return kExitOk;
}

int cmd_vuln(const std::string& db_dir, const std::string& advisories_file, const std::vector<std::string>& reports,
             std::ostream& out) {
  const LibraryDatabase db = load_database(db_dir);
  const auto advisories = parse_advisories(read_file(advisories_file));
  ordered_json root = ordered_json::array();
  for (const auto& input : reports) {
    for (const auto& f : profile_inputs(input, ".json")) {
      const ReportSummary s = parse_report(read_file(f));
      ordered_json findings = ordered_json::array();
      for (const auto& inst : s.instances) {
        for (const auto& adv : advisories) {
          const Triage t = classify(inst.library, inst.versions, adv, db.versions_of(inst.library));
          if (t == Triage::not_applicable) continue;
          findings.push_back({{"library", inst.library},
                              {"versions", inst.versions},
                              {"advisory", adv.reference.empty() ? adv.library : adv.reference},
                              {"classification", to_string(t)}});
        }
      }
      root.push_back({{"app", s.app_id}, {"findings", std::move(findings)}});
    }
  }
  out << root.dump(2) << "\n";
  return kExitOk;
}

int cmd_gen(const std::string& spec_file, const std::string& out_dir, std::ostream& out) {
  const Corpus c = generate_corpus(parse_corpus_spec(read_file(spec_file)));
  write_corpus(c, out_dir);
  out << c.database.size() << " library versions, " << c.apps.size() << " apps\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"libpin: third-party library and version detection for iOS app profiles", "libpin"};
  app.require_subcommand(1);
  std::string db_dir;
  auto add_db = [&db_dir](CLI::App* sub) {
    sub->add_option("--db", db_dir, "database directory")->envname("LIBPIN_DB");
  };

  std::function<int()> action;

  auto* db = app.add_subcommand("db", "build or re-index a library database");
  db->require_subcommand(1);
  std::string profiles_dir, out_dir;
  auto* build = db->add_subcommand("build", "ingest <library>/<version>.profile files");
  build->add_option("profiles", profiles_dir, "profile tree")->required();
  build->add_option("out", out_dir, "database directory to write")->required();
  build->callback([&] { action = [&] { return cmd_db_build(profiles_dir, out_dir, out, err); }; });
  auto* index = db->add_subcommand("index", "rebuild the class index of a database");
  index->add_option("db", db_dir, "database directory")->envname("LIBPIN_DB")->required();
  index->callback([&] { action = [&] { return cmd_db_index(db_dir, out); }; });

  ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "recover library instances and versions from app profiles");
  add_db(scan);
  scan->add_option("app", scan_args.input, "app profile or directory of profiles")->required();
  scan->add_flag("--code-level", scan_args.code_level, "refine versions with code features");
  scan->add_option("--max-candidates", scan_args.max_candidates, "refine only when more versions remain");
  scan->add_option("--advisories", scan_args.advisories, "advisory file");
  scan->add_option("--format", scan_args.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  scan->add_option("--out", scan_args.out_dir, "write one report per app into this directory");
  scan->add_flag("--timings", scan_args.timings, "include per-phase timings");
  scan->add_option("--jobs", scan_args.jobs, "worker threads (default: hardware concurrency)");
  scan->callback([&] {
    scan_args.db = db_dir;
    action = [&] { return cmd_scan(scan_args, out, err); };
  });

  std::string apps_dir, truth_file, format = "json";
  bool code_level = false;
  std::size_t max_candidates = 1;
  auto* bench = app.add_subcommand("bench", "score scans against ground truth");
  add_db(bench);
  bench->add_option("apps", apps_dir, "directory of app profiles")->required();
  bench->add_option("truth", truth_file, "ground-truth file")->required();
  bench->add_flag("--code-level", code_level, "refine versions with code features");
  bench->add_option("--max-candidates", max_candidates, "refine only when more versions remain");
  bench->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  bench->callback([&] {
    action = [&] { return cmd_bench(db_dir, apps_dir, truth_file, code_level, max_candidates, format, out); };
  });

  std::vector<std::string> libs;
  auto* overlap = app.add_subcommand("overlap", "class-name overlap between libraries");
  add_db(overlap);
  overlap->add_option("libraries", libs, "two libraries for a version matrix");
  overlap->callback([&] { action = [&] { return cmd_overlap(db_dir, libs, out); }; });

  std::string level = "class_level";
  auto* uniq = app.add_subcommand("uniq", "group library versions by profile signature");
  add_db(uniq);
  uniq->add_option("--level", level, "class_level or code_level")
      ->check(CLI::IsMember({"class_level", "code_level"}));
  uniq->callback([&] { action = [&] { return cmd_uniq(db_dir, level, out); }; });

  std::string advisories;
  std::vector<std::string> reports;
  auto* vuln = app.add_subcommand("vuln", "triage scan reports against advisories");
  add_db(vuln);
  vuln->add_option("--advisories", advisories, "advisory file")->required();
  vuln->add_option("reports", reports, "scan reports or directories of them")->required();
  vuln->callback([&] { action = [&] { return cmd_vuln(db_dir, advisories, reports, out); }; });

  std::string spec_file, gen_out;
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus with ground truth");
  gen->add_option("spec", spec_file, "corpus spec")->required();
  gen->add_option("out", gen_out, "output directory")->required();
  gen->callback([&] { action = [&] { return cmd_gen(spec_file, gen_out, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    return action ? action() : kExitInput;
  } catch (const Error& e) {
    err << "libpin: " << e.what() << "\n";
    return e.code() == ErrorCode::stale_index ? kExitState : kExitInput;
  } catch (const std::exception& e) {
    err << "libpin: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace libpin::cli
