#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "cpaft/front_forest.hpp"
#include "cpaft/mis.hpp"
#include "cpaft/pipeline.hpp"
#include "cpaft/quality.hpp"
#include "cpaft/shapes.hpp"

using namespace cpaft;

namespace {

void BM_HilbertRoundTrip(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const std::uint32_t side = 1u << level;
  std::uint32_t x = 0, y = 0;
  for (auto _ : state) {
    const auto box = sfc::hilbert_index({x, y}, level);
    benchmark::DoNotOptimize(sfc::hilbert_cell(box, level));
    x = (x + 7) % side;
    y = (y + 13) % side;
  }
}
BENCHMARK(BM_HilbertRoundTrip)->Arg(4)->Arg(10)->Arg(16);

std::vector<forest::IndexedFront> random_fronts(std::size_t n, double len) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<forest::IndexedFront> out;
  for (std::uint64_t k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * u(rng);
    const Point m{u(rng), u(rng)};
    const Vec2 d{0.5 * len * std::cos(a), 0.5 * len * std::sin(a)};
    out.push_back({sfc::GlobalIndex{k}, make_front(2 * k, m - d, 2 * k + 1, m + d, len, k), 0});
  }
  return out;
}

void BM_TreeQuery(benchmark::State& state) {
  const auto fronts = random_fronts(static_cast<std::size_t>(state.range(0)), 0.01);
  forest::FrontTree tree({{0, 0}, {1, 1}});
  for (const auto& f : fronts) tree.insert(f);
  std::size_t k = 0;
  for (auto _ : state) {
    const auto& probe = fronts[k++ % fronts.size()];
    benchmark::DoNotOptimize(tree.query(probe.front, 0.03, probe.gi));
  }
}
BENCHMARK(BM_TreeQuery)->Arg(1000)->Arg(100000);

void BM_LinearScanQuery(benchmark::State& state) {
  const auto fronts = random_fronts(static_cast<std::size_t>(state.range(0)), 0.01);
  std::size_t k = 0;
  for (auto _ : state) {
    const auto& probe = fronts[k++ % fronts.size()];
    benchmark::DoNotOptimize(forest::neighbor_scan(fronts, probe.front, 0.03, probe.gi));
  }
}
BENCHMARK(BM_LinearScanQuery)->Arg(1000)->Arg(100000);

void BM_Cpmis(benchmark::State& state) {
  const int n = 4000, ranks = static_cast<int>(state.range(0));
  std::mt19937_64 rng(5);
  std::vector<std::uint64_t> ids(n);
  for (int k = 0; k < n; ++k) ids[k] = std::uint64_t(k);
  // Geometric-like graph: each vertex conflicts with a few near-ID vertices.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  for (int k = 0; k < n; ++k)
    for (int j = 1; j <= 4; ++j)
      if (k + j < n && rng() % 2) edges.emplace_back(k, k + j);
  const mis::ConflictGraph g(ids, edges);
  std::vector<int> owner(n);
  for (int k = 0; k < n; ++k) owner[k] = k * ranks / n;
  for (auto _ : state) benchmark::DoNotOptimize(mis::cpmis_run(g, owner, ranks, mis::kUncapped));
}
BENCHMARK(BM_Cpmis)->Arg(1)->Arg(4);

void BM_Generate(benchmark::State& state, Boundary b) {
  pipeline::GenerateParams p;
  p.advance.h_min = b.min_h();
  p.advance.h_max = b.max_h();
  p.n_ranks = static_cast<int>(state.range(0));
  p.check_invariants = false;
  std::size_t elements = 0;
  for (auto _ : state) elements = pipeline::generate(b, p).state.mesh.elements.size();
  state.counters["elements"] = double(elements);
  state.counters["elements/s"] = benchmark::Counter(double(elements), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK_CAPTURE(BM_Generate, square, shapes::unit_square(0.05))->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Generate, gear, shapes::gear())->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Smooth(benchmark::State& state) {
  const Boundary b = shapes::gear();
  pipeline::GenerateParams p;
  p.advance.h_min = b.min_h();
  p.advance.h_max = b.max_h();
  const Mesh base = pipeline::generate(b, p).state.mesh;
  for (auto _ : state) {
    state.PauseTiming();
    Mesh m = base;
    state.ResumeTiming();
    benchmark::DoNotOptimize(quality::laplacian_smooth(m, {3, static_cast<int>(state.range(0)), 1}));
  }
}
BENCHMARK(BM_Smooth)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
