#include "libpin/database.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "libpin/error.hpp"
#include "libpin/profile_io.hpp"

namespace libpin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_path_component(const std::string& value, const char* what) {
  if (value.empty()) {
    throw Error(ErrorCode::schema_violation, std::string(what) + " must be non-empty");
  }
  if (value == "." || value == ".." || value.find('/') != std::string::npos ||
      value.find('\\') != std::string::npos || value.find('\0') != std::string::npos) {
    throw Error(ErrorCode::schema_violation,
                std::string(what) + " '" + value + "' is not a valid path component");
  }
}

fs::path profile_relpath(const LibraryVersionId& id) {
  return fs::path("profiles") / id.library / (id.version + ".profile");
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::io_failure, "read failed for " + path.string());
  }
  return std::move(buffer).str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorCode::io_failure, "cannot create " + path.parent_path().string());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw Error(ErrorCode::io_failure, "write failed for " + path.string());
  }
}

std::string utc_timestamp_now() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0;
  std::size_t j = 0;
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      const std::size_t si = i;
      const std::size_t sj = j;
      while (i < a.size() && is_digit(a[i])) ++i;
      while (j < b.size() && is_digit(b[j])) ++j;
      auto ra = a.substr(si, i - si);
      auto rb = b.substr(sj, j - sj);
      while (ra.size() > 1 && ra.front() == '0') ra.remove_prefix(1);
      while (rb.size() > 1 && rb.front() == '0') rb.remove_prefix(1);
      if (ra.size() != rb.size()) return ra.size() < rb.size();
      if (ra != rb) return ra < rb;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  return a < b;
}

std::size_t LibraryDatabase::empty_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const DatabaseEntry& e) { return e.empty(); }));
}

const DatabaseEntry* LibraryDatabase::find(const LibraryVersionId& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const LibraryDatabase::Library* LibraryDatabase::library(std::string_view name) const {
  const auto it = std::lower_bound(libraries_.begin(), libraries_.end(), name,
                                   [](const Library& lib, std::string_view key) { return lib.name < key; });
  return it != libraries_.end() && it->name == name ? &*it : nullptr;
}

std::vector<std::string> LibraryDatabase::versions_of(std::string_view name) const {
  std::vector<std::string> out;
  if (const Library* lib = library(name)) {
    out.reserve(lib->entries.size());
    for (const auto index : lib->entries) {
      out.push_back(entries_[index].id.version);
    }
  }
  return out;
}

std::optional<std::size_t> LibraryDatabase::release_index(std::string_view name, std::string_view version) const {
  if (const Library* lib = library(name)) {
    for (std::size_t i = 0; i < lib->entries.size(); ++i) {
      if (entries_[lib->entries[i]].id.version == version) {
        return i;
      }
    }
  }
  return std::nullopt;
}

Digest LibraryDatabase::manifest_digest() const {
  std::string canonical = "libpin-manifest/" + std::to_string(metadata_.format_version) + "\n";
  for (const auto& entry : entries_) {
    canonical += std::to_string(entry.id.library.size()) + ":" + entry.id.library + " ";
    canonical += std::to_string(entry.id.version.size()) + ":" + entry.id.version + " ";
    canonical += entry.class_signature.hex();
    canonical += ' ';
    canonical += entry.code_signature ? entry.code_signature->hex() : "-";
    canonical += '\n';
  }
  return sha256(canonical);
}

LibraryDatabase build_database(std::vector<std::pair<LibraryVersionId, Profile>> items,
                               DatabaseMetadata metadata) {
  LibraryDatabase db;
  db.metadata_ = std::move(metadata);

  std::set<LibraryVersionId> seen;
  std::map<std::string, std::vector<std::size_t>> order;  // library -> item positions
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& id = items[i].first;
    check_path_component(id.library, "library name");
    check_path_component(id.version, "version string");
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::duplicate_id, "duplicate library version " + id.str());
    }
    order[id.library].push_back(i);
  }

  db.entries_.reserve(items.size());
  for (auto& [name, positions] : order) {
    LibraryDatabase::Library lib{name, {}};
    for (const auto pos : positions) {
      auto& [id, profile] = items[pos];
      DatabaseEntry entry;
      entry.id = std::move(id);
      entry.profile = std::make_shared<const Profile>(std::move(profile));
      entry.class_signature = signature(*entry.profile, Level::class_level);
      if (entry.profile->level() == Level::code_level) {
        entry.code_signature = signature(*entry.profile, Level::code_level);
      }
      lib.entries.push_back(db.entries_.size());
      db.by_id_.emplace(entry.id, db.entries_.size());
      db.entries_.push_back(std::move(entry));
    }
    db.libraries_.push_back(std::move(lib));
  }
  return db;
}

void save_database(const LibraryDatabase& db, const fs::path& dir) {
  json entries = json::array();
  for (const auto& entry : db.entries()) {
    const fs::path rel = profile_relpath(entry.id);
    write_file(dir / rel, serialize_profile(*entry.profile));
    json e = json::object();
    e["library"] = entry.id.library;
    e["version"] = entry.id.version;
    e["path"] = rel.generic_string();
    e["class_signature"] = entry.class_signature.hex();
    if (entry.code_signature) {
      e["code_signature"] = entry.code_signature->hex();
    }
    e["classes"] = entry.profile->size();
    e["empty"] = entry.empty();
    entries.push_back(std::move(e));
  }
  json manifest = json::object();
  manifest["format_version"] = db.metadata().format_version;
  manifest["created"] = db.metadata().created;
  manifest["digest_algorithm"] = db.metadata().digest_algorithm;
  manifest["manifest_digest"] = to_hex(db.manifest_digest());
  manifest["entries"] = std::move(entries);
  write_file(dir / "manifest", manifest.dump(1) + "\n");
}

namespace {

json read_manifest(const fs::path& dir) {
  const std::string text = read_file(dir / "manifest");
  try {
    json manifest = json::parse(text);
    if (!manifest.is_object() || !manifest.contains("entries") || !manifest["entries"].is_array()) {
      throw Error(ErrorCode::schema_violation, "manifest lacks an entry list");
    }
    return manifest;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::malformed_document, "manifest: " + std::string(e.what()));
  }
}

}  // namespace

Digest read_manifest_digest(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  if (!manifest.contains("manifest_digest") || !manifest["manifest_digest"].is_string()) {
    throw Error(ErrorCode::schema_violation, "manifest lacks manifest_digest");
  }
  return digest_from_hex(manifest["manifest_digest"].get<std::string>());
}

LibraryDatabase load_database(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  DatabaseMetadata metadata;
  try {
    metadata.created = manifest.value("created", metadata.created);
    metadata.digest_algorithm = manifest.value("digest_algorithm", metadata.digest_algorithm);
    metadata.format_version = manifest.value("format_version", metadata.format_version);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_violation, "manifest metadata: " + std::string(e.what()));
  }
  if (metadata.digest_algorithm != kDigestAlgorithm) {
    throw Error(ErrorCode::schema_violation, "unsupported digest algorithm " + metadata.digest_algorithm);
  }
  if (metadata.format_version != kDatabaseFormatVersion) {
    throw Error(ErrorCode::schema_violation, "unsupported database format version");
  }

  std::vector<std::pair<LibraryVersionId, Profile>> items;
  std::vector<std::string> expected_class_sigs;
  for (const auto& e : manifest["entries"]) {
    if (!e.is_object() || !e.contains("library") || !e.contains("version") || !e["library"].is_string() ||
        !e["version"].is_string()) {
      throw Error(ErrorCode::schema_violation, "manifest entry lacks library/version");
    }
    LibraryVersionId id{e["library"].get<std::string>(), e["version"].get<std::string>()};
    check_path_component(id.library, "library name");
    check_path_component(id.version, "version string");
    const fs::path file = dir / profile_relpath(id);
    try {
      items.emplace_back(std::move(id), parse_profile(read_file(file)));
    } catch (const Error& err) {
      throw Error(err.code(), file.string() + ": " + err.what());
    }
    expected_class_sigs.push_back(e.value("class_signature", std::string()));
  }

  LibraryDatabase db = build_database(std::move(items), std::move(metadata));
  // Profiles that changed on disk after the manifest was written are rejected.
  std::map<LibraryVersionId, std::string> recorded;
  std::size_t k = 0;
  for (const auto& e : manifest["entries"]) {
    recorded[{e["library"].get<std::string>(), e["version"].get<std::string>()}] = expected_class_sigs[k++];
  }
  for (const auto& entry : db.entries()) {
    const std::string& sig = recorded[entry.id];
    if (!sig.empty() && sig != entry.class_signature.hex()) {
      throw Error(ErrorCode::stale_index, "profile of " + entry.id.str() + " does not match its manifest signature");
    }
  }
  return db;
}

ProfileTree read_profile_tree(const fs::path& root) {
  ProfileTree tree;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    tree.errors.push_back({root, "not a directory"});
    return tree;
  }
  std::vector<fs::path> libraries;
  for (const auto& dirent : fs::directory_iterator(root)) {
    if (dirent.is_directory()) {
      libraries.push_back(dirent.path());
    }
  }
  std::sort(libraries.begin(), libraries.end());

  for (const auto& lib_dir : libraries) {
    const std::string library = lib_dir.filename().string();
    std::vector<std::string> versions;
    for (const auto& dirent : fs::directory_iterator(lib_dir)) {
      if (dirent.is_regular_file() && dirent.path().extension() == ".profile") {
        versions.push_back(dirent.path().stem().string());
      }
    }
    const fs::path order_file = lib_dir / "ORDER";
    if (fs::exists(order_file)) {
      std::vector<std::string> ordered;
      std::istringstream lines(read_file(order_file));
      for (std::string line; std::getline(lines, line);) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (!line.empty()) ordered.push_back(line);
      }
      // Repeated lines are passed through so build_database reports DuplicateId.
      const std::set<std::string> listed(ordered.begin(), ordered.end());
      const std::set<std::string> found(versions.begin(), versions.end());
      if (listed != found) {
        tree.errors.push_back({order_file, "ORDER does not list exactly the .profile files present"});
        continue;
      }
      versions = std::move(ordered);
    } else {
      std::sort(versions.begin(), versions.end(),
                [](const std::string& a, const std::string& b) { return natural_less(a, b); });
    }
    for (const auto& version : versions) {
      const fs::path file = lib_dir / (version + ".profile");
      try {
        tree.items.emplace_back(LibraryVersionId{library, version}, parse_profile(read_file(file)));
      } catch (const Error& err) {
        tree.errors.push_back({file, err.what()});
      }
    }
  }
  return tree;
}

}  // namespace libpin
