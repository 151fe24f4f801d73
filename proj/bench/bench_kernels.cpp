// Serial reference kernels vs their OpenMP counterparts.

#include "vigil/eeg.hpp"
#include "vigil/events.hpp"
#include "vigil/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace vigil;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

template <Matrix (*Fn)(const Matrix&, const Matrix&)>
void BM_SquaredDistances(benchmark::State& state) {
  const Matrix a = random_matrix(state.range(0), 136, 1);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, a));
}
BENCHMARK(BM_SquaredDistances<kernels::serial::squared_distances>)->Name("squared_distances/serial")->Arg(256)->Arg(708);
BENCHMARK(BM_SquaredDistances<kernels::omp::squared_distances>)->Name("squared_distances/omp")->Arg(256)->Arg(708);

template <Matrix (*Fn)(const Matrix&, double)>
void BM_Rbf(benchmark::State& state) {
  const Matrix d = random_matrix(state.range(0), state.range(0), 2).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(d, 0.25));
}
BENCHMARK(BM_Rbf<kernels::serial::rbf_from_squared>)->Name("rbf/serial")->Arg(708);
BENCHMARK(BM_Rbf<kernels::omp::rbf_from_squared>)->Name("rbf/omp")->Arg(708);

template <Signal (*Fn)(const Signal&, const Signal&)>
void BM_Correlate(benchmark::State& state) {
  const Signal x = random_matrix(state.range(0), 1, 3).col(0);
  const Signal k = mexican_hat_kernel(8.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, k));
}
BENCHMARK(BM_Correlate<kernels::serial::correlate_same>)->Name("correlate_same/serial")->Arg(60000);
BENCHMARK(BM_Correlate<kernels::omp::correlate_same>)->Name("correlate_same/omp")->Arg(60000);

template <Matrix (*Fn)(const kernels::BandPowerRequest&)>
void BM_BandPowers(benchmark::State& state) {
  const Matrix samples = random_matrix(12, 200 * 8 * state.range(0), 4);
  std::vector<Eigen::Index> starts;
  for (Eigen::Index w = 0; w < state.range(0); ++w) starts.push_back(w * 1600);
  const auto& bands = two_hz_bins();
  const kernels::BandPowerRequest req{&samples, starts, 1600, 200.0, bands};
  for (auto _ : state) benchmark::DoNotOptimize(Fn(req));
}
BENCHMARK(BM_BandPowers<kernels::serial::band_powers>)->Name("band_powers/serial")->Arg(32);
BENCHMARK(BM_BandPowers<kernels::omp::band_powers>)->Name("band_powers/omp")->Arg(32);

}  // namespace

BENCHMARK_MAIN();
