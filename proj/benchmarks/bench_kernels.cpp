#include <benchmark/benchmark.h>

#include "ptycho/bench.hpp"
#include "ptycho/engine.hpp"
#include "ptycho/field.hpp"
#include "ptycho/registration.hpp"
#include "ptycho/simulator.hpp"

using namespace ptycho;

namespace {

ComplexField2D shifted_pair_xps(std::size_t side) {
  const ComplexField2D ref = smooth_test_image(side, 4.0, 7);
  ComplexField2D mov(side, side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) mov(r, c) = ref((r + side - 3) % side, (c + 5) % side);
  }
  return cross_power_spectrum(ref, mov, Weighting::Phase);
}

void BM_Propagate(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  ComplexField2D field = smooth_test_image(side, 4.0, 3);
  for (auto _ : state) {
    propagate_inplace(field, Direction::Forward);
    benchmark::DoNotOptimize(field.data());
  }
}
BENCHMARK(BM_Propagate)->Arg(64)->Arg(128)->Arg(256);

// Upsampled matrix-DFT refinement around the coarse peak.
void BM_RefineMatrixDft(benchmark::State& state) {
  const ComplexField2D xps = shifted_pair_xps(static_cast<std::size_t>(state.range(0)));
  const ShiftEstimate coarse = coarse_shift(xps);
  const int kappa = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(refine_shift(xps, coarse, kappa));
}
BENCHMARK(BM_RefineMatrixDft)->Args({64, 10})->Args({128, 10})->Args({256, 10})->Args({256, 100})
    ->Unit(benchmark::kMillisecond);

// Whole-grid zero-padded inverse FFT at the same resolution.
void BM_RefineZeroPad(benchmark::State& state) {
  const ComplexField2D xps = shifted_pair_xps(static_cast<std::size_t>(state.range(0)));
  const int kappa = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(zero_padded_peak(xps, kappa));
}
BENCHMARK(BM_RefineZeroPad)->Args({64, 10})->Args({128, 10})->Args({256, 10})->Args({256, 100})
    ->Unit(benchmark::kMillisecond)->Iterations(1);

// One full solver sweep over a 5x5 scan.
void BM_Sweep(benchmark::State& state) {
  const std::size_t modes = static_cast<std::size_t>(state.range(0));
  const Geometry g = make_geometry(8.3187e-10, 0.75, 20e-6, 64);
  const ScanPlan plan = make_scan(ScanSpec{5, 5, 19.0, 0.0, 1, 64, -1.0});
  ObjectSpec ospec;
  ospec.rows = plan.canvas_rows;
  ospec.cols = plan.canvas_cols;
  ProbeSpec pspec;
  pspec.mode_count = modes;
  pspec.mode_powers = modes == 1 ? std::vector<double>{1.0} : std::vector<double>{0.85, 0.15};
  pspec.radius = 18.0;
  const PtychoDataset ds = synthesize(make_object(ospec), make_probe(pspec, g), plan, g);
  SolverConfig cfg;
  cfg.mode_count = modes;
  ReconState recon = initialize(ds, cfg);
  for (auto _ : state) sweep(recon, ds, cfg);
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
