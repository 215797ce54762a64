#include <benchmark/benchmark.h>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "divcore/engine.hpp"
#include "divcore/trimatrix.hpp"
#include "divcore/vector.hpp"

namespace {

constexpr std::size_t kDim = 16;

divcore::Vector random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> c(kDim);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (double& x : c) {
      x = gauss(rng);
      norm_sq += x * x;
    }
  } while (norm_sq == 0.0);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : c) x *= inv;
  return divcore::Vector(std::move(c));
}

std::vector<divcore::LabeledPoint> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<divcore::LabeledPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back(divcore::LabeledPoint{i, 0, i, random_unit_vector(rng)});
  }
  return points;
}

void BM_CosineDistance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const divcore::Vector u = random_unit_vector(rng);
  const divcore::Vector v = random_unit_vector(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(divcore::cosine_distance(u, v));
  }
}
BENCHMARK(BM_CosineDistance);

void BM_MatrixBuild(benchmark::State& state) {
  const auto points = random_points(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    auto m = divcore::TriangularDistanceMatrix::build(points);
    benchmark::DoNotOptimize(m);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatrixBuild)->RangeMultiplier(2)->Range(8, 512)->Complexity();

void BM_MinEntry(benchmark::State& state) {
  const auto points = random_points(static_cast<std::size_t>(state.range(0)), 3);
  const auto m = divcore::TriangularDistanceMatrix::build(points);
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.min_entry());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MinEntry)->RangeMultiplier(2)->Range(8, 1024)->Complexity();

void BM_ReplaceSlot(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const auto points = random_points(k, 4);
  auto m = divcore::TriangularDistanceMatrix::build(points);
  std::mt19937_64 rng(5);
  const divcore::LabeledPoint incoming{k + 1, 0, k + 1, random_unit_vector(rng)};
  const auto column = m.column_distances(incoming, points);
  std::uint64_t next_id = k + 2;
  for (auto _ : state) {
    m.replace_slot(0, next_id++, column);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ReplaceSlot)->RangeMultiplier(2)->Range(8, 1024)->Complexity();

void BM_SteadyStateElement(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const bool adjacency = state.range(1) != 0;
  auto points = random_points(k, 6);
  divcore::CoreSet core{0, k, std::move(points)};
  std::optional<divcore::TriangularDistanceMatrix> matrix;
  if (adjacency) {
    matrix = divcore::TriangularDistanceMatrix::build(core.members);
  }
  std::mt19937_64 tie_rng = divcore::stream_rng(0, 0);
  std::mt19937_64 data_rng(7);
  std::uint64_t next_id = k + 1;
  for (auto _ : state) {
    divcore::LabeledPoint incoming{next_id, 0, next_id, random_unit_vector(data_rng)};
    ++next_id;
    auto d = divcore::process_point(core, std::move(incoming),
                                    matrix ? &*matrix : nullptr, tie_rng);
    benchmark::DoNotOptimize(d);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SteadyStateElement)
    ->ArgsProduct({{16, 64, 256}, {0, 1}})
    ->ArgNames({"k", "adjacency"});

}  // namespace

BENCHMARK_MAIN();
