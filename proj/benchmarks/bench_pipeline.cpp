#include <benchmark/benchmark.h>

#include <random>

#include "amg/gpr.hpp"
#include "amg/layers.hpp"
#include "amg/planner.hpp"

namespace {

using namespace amg;

struct Data {
  std::vector<WorldPoint> points;
  std::vector<double> targets;
};

Data random_data(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    d.points.push_back({u(rng), u(rng)});
    d.targets.push_back(i % 3 == 0 ? 1.0 : 0.0);
  }
  return d;
}

GridMap random_costs(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> c(0, 200);
  std::vector<double> v(static_cast<std::size_t>(side * side));
  for (auto& x : v) x = c(rng);
  return GridMap({side, side, 0.25, {}}, GridKind::cost, std::move(v));
}

void BM_GprFit(benchmark::State& state) {
  const auto d = random_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(GprModel::fit(d.points, d.targets, {}));
}
BENCHMARK(BM_GprFit)->Arg(20)->Arg(100)->Arg(400);

void BM_GprPredictGrid(benchmark::State& state) {
  const auto d = random_data(static_cast<std::size_t>(state.range(0)));
  const auto model = GprModel::fit(d.points, d.targets, {});
  const GridGeometry g{200, 200, 0.25, {}};
  for (auto _ : state) benchmark::DoNotOptimize(predict_grid(model, g));
}
BENCHMARK(BM_GprPredictGrid)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Fuse(benchmark::State& state) {
  LayerStack s;
  for (int k = 0; k < state.range(0); ++k) {
    s.layers.push_back({CostLayer{random_costs(200, static_cast<std::uint64_t>(k)), "l",
                                  k == 0 ? LayerRole::geometric : LayerRole::abstraction},
                        1.0 + k});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fuse(s));
}
BENCHMARK(BM_Fuse)->Arg(2)->Arg(4);

void BM_Plan(benchmark::State& state) {
  const auto m = random_costs(static_cast<int>(state.range(0)), 9);
  const int last = static_cast<int>(state.range(0)) - 1;
  for (auto _ : state) benchmark::DoNotOptimize(plan(m, {0, 0}, {last, last}));
}
BENCHMARK(BM_Plan)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
