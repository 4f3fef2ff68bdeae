#include <benchmark/benchmark.h>

#include <random>

#include "libpin/corpus.hpp"
#include "libpin/index.hpp"
#include "libpin/profile.hpp"
#include "libpin/recovery.hpp"
#include "libpin/scan.hpp"

namespace {

using namespace libpin;

std::vector<MethodKey> random_methods(std::mt19937_64& rng, std::size_t n) {
  std::vector<MethodKey> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(MethodKind::instance, "selector" + std::to_string(rng() % (n * 2)) + ":");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void BM_ClassSimilarity(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const ClassNode a(ClassName("K"), random_methods(rng, n));
  const ClassNode b(ClassName("K"), random_methods(rng, n));
  for (auto _ : state) benchmark::DoNotOptimize(class_similarity(a, b));
}
BENCHMARK(BM_ClassSimilarity)->Arg(8)->Arg(64)->Arg(512);

void BM_FeatureSimilarity(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  auto make = [&] {
    std::vector<FeatureVector::Entry> entries;
    for (std::size_t i = 0; i < n; ++i) {
      entries.emplace_back(FeatureItem{FeatureKind::const_string, "s" + std::to_string(rng() % (n * 2))},
                           static_cast<std::uint32_t>(1 + rng() % 4));
    }
    return FeatureVector(std::move(entries));
  };
  const FeatureVector a = make();
  const FeatureVector b = make();
  for (auto _ : state) benchmark::DoNotOptimize(feature_similarity(a, b));
}
BENCHMARK(BM_FeatureSimilarity)->Arg(4)->Arg(32)->Arg(256);

struct ScanFixture {
  Corpus corpus;
  ClassIndex index;
};

const ScanFixture& fixture(std::size_t libraries) {
  static std::map<std::size_t, std::unique_ptr<ScanFixture>> cache;
  auto& slot = cache[libraries];
  if (!slot) {
    CorpusSpec spec;
    spec.seed = 42;
    spec.library_count = libraries;
    spec.versions_per_library = {10, 10};
    spec.classes_per_version = {10, 12};
    spec.code_level = false;
    spec.duplication.push_back({DuplicationPattern::partial_inclusion, {std::size_t{0}, std::size_t{1}}, {4, 8}});
    spec.apps.count = 1;
    spec.apps.libraries_per_app = {static_cast<std::int64_t>(libraries / 2), static_cast<std::int64_t>(libraries / 2)};
    slot = std::make_unique<ScanFixture>();
    slot->corpus = generate_corpus(spec);
    slot->index = build_index(slot->corpus.database);
  }
  return *slot;
}

void BM_ScanApp(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto& app = f.corpus.apps.at(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scan_app(app.id, app.profile, f.index, f.corpus.database, {}));
  }
  state.counters["app_classes"] = static_cast<double>(app.profile.size());
  state.counters["db_versions"] = static_cast<double>(f.corpus.database.size());
}
BENCHMARK(BM_ScanApp)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_BuildIndex(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_index(f.corpus.database));
}
BENCHMARK(BM_BuildIndex)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
