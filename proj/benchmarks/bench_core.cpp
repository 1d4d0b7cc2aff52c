#include <benchmark/benchmark.h>

#include "ascsense/param_estimation.hpp"
#include "ascsense/rng.hpp"

using namespace ascsense;

namespace {

CMat random_matrix(std::uint64_t key, int rows, int cols) {
  CounterRng rng(key);
  CMat X(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) X(i, j) = rng.complex_normal();
  return X;
}

struct Fixture {
  SystemConfig cfg;
  SearchGrid grid;
  CMat window;
  CVec snapshot;
  SubspaceEstimate est;

  explicit Fixture(int K) {
    cfg.K = K;
    grid = SearchGrid::for_system(cfg, 4096);
    window = random_matrix(2, K, 4) * random_matrix(3, 4, 48) + 0.05 * random_matrix(4, K, 48);
    snapshot = window.col(0);
    est = subspace_projector(window);
  }
};

void BM_FftSpectrum(benchmark::State& s) {
  Fixture f(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(fft_spectrum(f.snapshot, f.est.noise_basis, f.grid));
}

void BM_KernelSpectrum(benchmark::State& s) {
  Fixture f(static_cast<int>(s.range(0)));
  const CMat P = f.est.noise_projector();
  for (auto _ : s) benchmark::DoNotOptimize(kernel_spectrum(f.snapshot, P, f.grid));
}

void BM_DirectSpectrum(benchmark::State& s) {
  Fixture f(static_cast<int>(s.range(0)));
  const CMat P = f.est.noise_projector();
  for (auto _ : s) {
    RVec out(f.grid.size);
    for (int n = 0; n < f.grid.size; ++n) {
      const CVec g = compensate_to(f.snapshot, f.grid.at(n), f.cfg);
      out(n) = (g.adjoint() * P * g)(0).real();
    }
    benchmark::DoNotOptimize(out);
  }
}

void BM_WindowEvd(benchmark::State& s) {
  Fixture f(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(subspace_projector(f.window));
}

void BM_AlignSnapshot(benchmark::State& s) {
  Fixture f(32);
  AlignmentState st(f.cfg, {});
  for (int c = 0; c < 48; ++c) st.align_snapshot(f.window.col(c));
  int c = 0;
  for (auto _ : s) benchmark::DoNotOptimize(st.align_snapshot(f.window.col(c++ % 48)));
}

void BM_MusicSpectrum2D(benchmark::State& s) {
  SystemConfig cfg;
  cfg.M = 3;
  const auto geom = ArrayGeometry::half_wavelength_ula(3, cfg.carrier_freq);
  const CMat H = random_matrix(5, cfg.rows(), 6) * random_matrix(6, 6, 100) +
                 0.05 * random_matrix(7, cfg.rows(), 100);
  const auto est = subspace_projector(H);
  ReferenceStaticResponse ref;
  ref.h = H.col(0).normalized();
  const auto grid = SearchGrid::for_system(cfg, 4096);
  const RVec angles = angle_grid(-90, 90, 1);
  for (auto _ : s) benchmark::DoNotOptimize(modified_music_spectrum(est, ref, cfg, geom, grid, angles));
}

}  // namespace

BENCHMARK(BM_FftSpectrum)->Arg(32)->Arg(64);
BENCHMARK(BM_KernelSpectrum)->Arg(32)->Arg(64);
BENCHMARK(BM_DirectSpectrum)->Arg(32);
BENCHMARK(BM_WindowEvd)->Arg(32)->Arg(96);
BENCHMARK(BM_AlignSnapshot);
BENCHMARK(BM_MusicSpectrum2D)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
