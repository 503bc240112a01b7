#include <benchmark/benchmark.h>

#include <cmath>
#include <thread>

#include "szlab/global.hpp"
#include "szlab/kernel.hpp"
#include "szlab/measures.hpp"
#include "szlab/section_basis.hpp"

using namespace szlab;

namespace {

int max_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

void workers_arg(benchmark::internal::Benchmark* b) {
  for (int w = 1; w <= max_workers(); w *= 2) b->Arg(w);
}

const char* kEps = "0.1*r2/(1+r2)";

void BM_GramReference(benchmark::State& s) {
  auto model = ProjectiveModel::make(1, 64, kEps);
  auto grid = build_quadrature(model, 2 * 64 + 4);
  for (auto _ : s) benchmark::DoNotOptimize(monomial_gram_reference(model, grid));
}
BENCHMARK(BM_GramReference)->Unit(benchmark::kMillisecond);

void BM_GramBlocked(benchmark::State& s) {
  auto model = ProjectiveModel::make(1, 64, kEps);
  auto grid = build_quadrature(model, 2 * 64 + 4);
  Parallelism par{static_cast<int>(s.range(0))};
  for (auto _ : s) benchmark::DoNotOptimize(monomial_gram(model, grid, par));
}
BENCHMARK(BM_GramBlocked)->Apply(workers_arg)->Unit(benchmark::kMillisecond);

void BM_ScalingGridReference(benchmark::State& s) {
  auto model = ProjectiveModel::make(1, 64);
  auto basis = build_basis(model);
  auto chart = HeisenbergChart::at_origin(model);
  KernelEvaluator K(basis, chart);
  ScalingGrid grid{2.0, 0.5, {0.0, 0.7853981633974483}};
  for (auto _ : s) benchmark::DoNotOptimize(scaling_sup_error_reference(K, grid));
}
BENCHMARK(BM_ScalingGridReference)->Unit(benchmark::kMillisecond);

void BM_ScalingGridBlocked(benchmark::State& s) {
  auto model = ProjectiveModel::make(1, 64);
  auto basis = build_basis(model);
  auto chart = HeisenbergChart::at_origin(model);
  KernelEvaluator K(basis, chart);
  ScalingGrid grid{2.0, 0.5, {0.0, 0.7853981633974483}};
  Parallelism par{static_cast<int>(s.range(0))};
  for (auto _ : s) benchmark::DoNotOptimize(scaling_sup_error(K, grid, par));
}
BENCHMARK(BM_ScalingGridBlocked)->Apply(workers_arg)->Unit(benchmark::kMillisecond);

void BM_SphereSampling(benchmark::State& s) {
  EnsembleSampler sampler(Ensemble::sphere, 257, 1);
  Parallelism par{static_cast<int>(s.range(0))};
  for (auto _ : s) benchmark::DoNotOptimize(sampler.sample(20000, par));
}
BENCHMARK(BM_SphereSampling)->Apply(workers_arg)->Unit(benchmark::kMillisecond);

void BM_GridSupReference(benchmark::State& s) {
  const int N = 128;
  auto basis = build_basis(ProjectiveModel::make(1, N));
  auto grid = fs_sphere_grid(0.15 / std::sqrt(double(N)));
  Eigen::MatrixXcd c = EnsembleSampler(Ensemble::sphere, N + 1, 3).sample(8, Parallelism{1}).transpose();
  for (auto _ : s) benchmark::DoNotOptimize(fs_grid_sup_reference(basis, grid, c, 1));
}
BENCHMARK(BM_GridSupReference)->Unit(benchmark::kMillisecond);

void BM_GridSupBlocked(benchmark::State& s) {
  const int N = 128;
  auto basis = build_basis(ProjectiveModel::make(1, N));
  auto grid = fs_sphere_grid(0.15 / std::sqrt(double(N)));
  Eigen::MatrixXcd c = EnsembleSampler(Ensemble::sphere, N + 1, 3).sample(8, Parallelism{1}).transpose();
  Parallelism par{static_cast<int>(s.range(0))};
  for (auto _ : s) benchmark::DoNotOptimize(fs_grid_sup(basis, grid, c, 1, par));
}
BENCHMARK(BM_GridSupBlocked)->Apply(workers_arg)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
