#include "libpin/index.hpp"

#include <algorithm>
#include <cstring>
#include <map>

#include "libpin/error.hpp"

namespace libpin {

namespace {

constexpr char kMagic[4] = {'L', 'P', 'I', 'X'};
constexpr char kTrailer[4] = {'X', 'I', 'P', 'L'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    out_.append(p, n);
  }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  [[nodiscard]] const std::string& data() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  void bytes(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  [[nodiscard]] bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorCode::io_failure, "index file is truncated");
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::span<const ClassEntry> ClassIndex::lookup(std::string_view canonical) const {
  const auto it = table_.find(std::string(canonical));
  if (it == table_.end()) {
    return {};
  }
  return it->second;
}

std::optional<std::uint32_t> ClassIndex::library_id(std::string_view name) const {
  const auto it = std::lower_bound(libraries_.begin(), libraries_.end(), name,
                                   [](const LibraryVersions& lib, std::string_view key) { return lib.name < key; });
  if (it == libraries_.end() || it->name != name) {
    return std::nullopt;
  }
  return static_cast<std::uint32_t>(it - libraries_.begin());
}

std::optional<VersionRef> ClassIndex::find(const LibraryVersionId& id) const {
  const auto lib = library_id(id.library);
  if (!lib) {
    return std::nullopt;
  }
  const auto& versions = libraries_[*lib].versions;
  const auto it = std::find(versions.begin(), versions.end(), id.version);
  if (it == versions.end()) {
    return std::nullopt;
  }
  return VersionRef{*lib, static_cast<std::uint32_t>(it - versions.begin())};
}

LibraryVersionId ClassIndex::id_of(VersionRef ref) const {
  const auto& lib = libraries_.at(ref.library);
  return {lib.name, lib.versions.at(ref.version)};
}

std::uint32_t ClassIndex::class_count(VersionRef ref) const {
  return libraries_.at(ref.library).class_counts.at(ref.version);
}

std::uint32_t ClassIndex::class_count(const LibraryVersionId& id) const {
  const auto ref = find(id);
  if (!ref) {
    throw Error(ErrorCode::unknown_version, id.str() + " is not in the index");
  }
  return class_count(*ref);
}

std::vector<std::string> ClassIndex::names() const {
  std::vector<std::string> out;
  out.reserve(table_.size());
  for (const auto& [name, entries] : table_) {
    out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t ClassIndex::entry_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [name, entries] : table_) {
    n += entries.size();
  }
  return n;
}

ClassIndex build_index(const LibraryDatabase& db) {
  ClassIndex index;
  index.manifest_digest_ = db.manifest_digest();
  const auto libraries = db.libraries();
  index.libraries_.reserve(libraries.size());
  // Libraries are visited in name order and versions in release order, so
  // each posting list comes out already sorted.
  for (std::uint32_t li = 0; li < libraries.size(); ++li) {
    const auto& lib = libraries[li];
    ClassIndex::LibraryVersions info{lib.name, {}, {}};
    for (std::uint32_t vi = 0; vi < lib.entries.size(); ++vi) {
      const DatabaseEntry& entry = db.entries()[lib.entries[vi]];
      info.versions.push_back(entry.id.version);
      info.class_counts.push_back(static_cast<std::uint32_t>(entry.profile->size()));
      for (const auto& node : entry.profile->classes()) {
        index.table_[node->name().str()].push_back(ClassEntry{{li, vi}, node});
      }
    }
    index.libraries_.push_back(std::move(info));
  }
  return index;
}

void save_index(const ClassIndex& index, const std::filesystem::path& path) {
  // String table: every library name, version string, class name and
  // selector, sorted and deduplicated; everything else refers to it by id.
  std::vector<std::string> strings;
  for (const auto& lib : index.libraries()) {
    strings.push_back(lib.name);
    strings.insert(strings.end(), lib.versions.begin(), lib.versions.end());
  }
  const auto names = index.names();
  for (const auto& name : names) {
    strings.push_back(name);
    for (const auto& entry : index.lookup(name)) {
      for (const auto& method : entry.node->methods()) {
        strings.push_back(method.selector);
      }
    }
  }
  std::sort(strings.begin(), strings.end());
  strings.erase(std::unique(strings.begin(), strings.end()), strings.end());
  auto sid = [&strings](std::string_view s) {
    return static_cast<std::uint32_t>(std::lower_bound(strings.begin(), strings.end(), s) - strings.begin());
  };

  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kIndexFormatVersion);
  w.bytes(index.manifest_digest().data(), index.manifest_digest().size());

  w.u32(static_cast<std::uint32_t>(strings.size()));
  for (const auto& s : strings) {
    w.str(s);
  }

  w.u32(static_cast<std::uint32_t>(index.libraries().size()));
  for (const auto& lib : index.libraries()) {
    w.u32(sid(lib.name));
    w.u32(static_cast<std::uint32_t>(lib.versions.size()));
    for (std::size_t i = 0; i < lib.versions.size(); ++i) {
      w.u32(sid(lib.versions[i]));
      w.u32(lib.class_counts[i]);
    }
  }

  w.u32(static_cast<std::uint32_t>(names.size()));
  for (const auto& name : names) {
    const auto entries = index.lookup(name);
    w.u32(sid(name));
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& entry : entries) {
      w.u32(entry.version.library);
      w.u32(entry.version.version);
      const auto methods = entry.node->methods();
      w.u32(static_cast<std::uint32_t>(methods.size()));
      for (const auto& method : methods) {
        w.u8(method.kind == MethodKind::class_method ? 1 : 0);
        w.u32(sid(method.selector));
      }
    }
  }
  w.bytes(kTrailer, sizeof kTrailer);
  write_file(path, w.data());
}

ClassIndex load_index(const std::filesystem::path& path, const std::optional<Digest>& expected) {
  const std::string data = read_file(path);
  Reader r(data);
  char magic[4];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::io_failure, path.string() + " is not a libpin index");
  }
  if (r.u32() != kIndexFormatVersion) {
    throw Error(ErrorCode::io_failure, "unsupported index format version in " + path.string());
  }
  ClassIndex index;
  r.bytes(index.manifest_digest_.data(), index.manifest_digest_.size());
  if (expected && *expected != index.manifest_digest_) {
    throw Error(ErrorCode::stale_index, path.string() + " was built from a different database manifest");
  }

  std::vector<std::string> strings(r.u32());
  for (auto& s : strings) {
    s = r.str();
  }
  auto string_at = [&strings](std::uint32_t id) -> const std::string& {
    if (id >= strings.size()) {
      throw Error(ErrorCode::io_failure, "index string id out of range");
    }
    return strings[id];
  };

  index.libraries_.resize(r.u32());
  for (auto& lib : index.libraries_) {
    lib.name = string_at(r.u32());
    const auto count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      lib.versions.push_back(string_at(r.u32()));
      lib.class_counts.push_back(r.u32());
    }
  }

  const auto name_count = r.u32();
  for (std::uint32_t n = 0; n < name_count; ++n) {
    const std::string& canonical = string_at(r.u32());
    const ClassName name = ClassName::parse(canonical);
    auto& entries = index.table_[canonical];
    const auto entry_count = r.u32();
    entries.reserve(entry_count);
    for (std::uint32_t e = 0; e < entry_count; ++e) {
      VersionRef ref{r.u32(), r.u32()};
      if (ref.library >= index.libraries_.size() ||
          ref.version >= index.libraries_[ref.library].versions.size()) {
        throw Error(ErrorCode::io_failure, "index entry refers to an unknown version");
      }
      std::vector<MethodKey> methods(r.u32());
      for (auto& m : methods) {
        const auto kind = r.u8() == 1 ? MethodKind::class_method : MethodKind::instance;
        m = MethodKey(kind, string_at(r.u32()));
      }
      entries.push_back(ClassEntry{ref, std::make_shared<const ClassNode>(name, std::move(methods))});
    }
  }
  char trailer[4];
  r.bytes(trailer, sizeof trailer);
  if (std::memcmp(trailer, kTrailer, sizeof trailer) != 0 || !r.done()) {
    throw Error(ErrorCode::io_failure, path.string() + " has a corrupt trailer");
  }
  return index;
}

}  // namespace libpin
