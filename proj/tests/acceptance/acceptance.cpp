// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//   acceptance [--csv path] [--only N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ptycho/bench.hpp"
#include "ptycho/engine.hpp"
#include "ptycho/io.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/registration.hpp"
#include "ptycho/simulator.hpp"
#include "support/epie_oracle.hpp"

using namespace ptycho;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kEpieRelTol = 1e-12;
constexpr double kEpieSeconds = 60.0;
constexpr double kModulusRelTol = 1e-9;
constexpr double kSingleModeObjectError = 1e-3;
constexpr double kTwoModeRatio = 0.5;
constexpr int kRegKappa = 50;
constexpr double kRegMaxError = 2.0 / kRegKappa;
constexpr double kPosrefRmseFraction = 0.30;
constexpr double kPosrefObjectRatio = 0.5;
constexpr double kBenchSpeedup = 5.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

Geometry geometry64() { return make_geometry(8.3187e-10, 0.75, 20e-6, 64); }

struct Scene {
  ScanPlan plan;
  ComplexField2D object;
  std::vector<ComplexField2D> probes;
  PtychoDataset dataset;
};

// `jitter` is a whole number of pixels: true positions stay on the pixel
// grid and the solver is handed them exactly.
Scene build_scene(std::size_t grid, double step, int jitter, std::vector<double> powers,
                  std::uint64_t seed, double radius = 18.0) {
  Scene s;
  ScanSpec scan;
  scan.grid_rows = grid;
  scan.grid_cols = grid;
  scan.step = step;
  scan.seed = seed;
  scan.window = 64;
  scan.margin = jitter + 1.0;
  s.plan = make_scan(scan);
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::uniform_int_distribution<int> offset(-jitter, jitter);
  for (std::size_t j = 0; j < s.plan.nominal.size(); ++j) {
    s.plan.nominal[j].x += offset(rng);
    s.plan.nominal[j].y += offset(rng);
  }
  s.plan.true_positions = s.plan.nominal;
  ObjectSpec ospec;
  ospec.rows = s.plan.canvas_rows;
  ospec.cols = s.plan.canvas_cols;
  ospec.seed = seed + 100;
  s.object = make_object(ospec);
  ProbeSpec pspec;
  pspec.mode_count = powers.size();
  pspec.mode_powers = powers;
  pspec.radius = radius;
  s.probes = make_probe(pspec, geometry64());
  s.dataset = synthesize(s.object, s.probes, s.plan, geometry64());
  return s;
}

// --- 1 ---------------------------------------------------------------------
Outcome epie_reduction() {
  const auto start = std::chrono::steady_clock::now();
  const Scene scene = build_scene(7, 19.0, 0, {0.85, 0.15}, 21);
  SolverConfig cfg;
  cfg.beta = 1.0;
  cfg.gamma = 1.0;
  cfg.mode_count = 2;
  cfg.order = PositionOrder::Shuffled;
  cfg.order_seed = 5;
  ReconState state = initialize(scene.dataset, cfg);
  testing::EpieState oracle{state.object, state.probes, state.origin_row, state.origin_col};
  double worst = 0.0;
  for (std::size_t it = 0; it < 50; ++it) {
    const auto order = visit_order(scene.dataset.size(), cfg, it);
    sweep(state, scene.dataset, cfg);
    for (const std::size_t j : order)
      testing::epie_visit(oracle, scene.dataset.positions[j], scene.dataset.patterns[j], true);
    worst = std::max(worst, testing::max_relative(state.object, oracle.object));
    for (std::size_t p = 0; p < 2; ++p)
      worst = std::max(worst, testing::max_relative(state.probes[p], oracle.probes[p]));
  }
  const double seconds = elapsed(start);
  return {worst <= kEpieRelTol && seconds < kEpieSeconds,
          fmt("max relative deviation %.3g over 50 iterations, %.1f s", worst, seconds)};
}

// --- 2 ---------------------------------------------------------------------
Outcome modulus_exactness() {
  const Scene scene = build_scene(7, 19.0, 0, {0.85, 0.15}, 22);
  SolverConfig cfg;
  cfg.mode_count = 2;
  ReconState state = initialize(scene.dataset, cfg);
  double worst = 0.0;
  std::size_t checked = 0;
  SweepHooks hooks;
  hooks.observer = [&](const PositionVisit& visit) {
    std::vector<double> total(visit.measured.values.size(), 0.0);
    for (const auto& psi : visit.correction.exit_waves) {
      const ComplexField2D d = propagate(psi, Direction::Forward);
      for (std::size_t i = 0; i < d.size(); ++i) total[i] += std::norm(d[i]);
    }
    for (std::size_t i = 0; i < total.size(); ++i) {
      if (visit.correction.model_intensity.values[i] <= visit.correction.guard) continue;
      const double want = visit.measured.values[i];
      const double rel = std::abs(total[i] - want) / std::max(want, 1e-300);
      worst = std::max(worst, want > 0.0 ? rel : total[i]);
      ++checked;
    }
  };
  run(state, scene.dataset, cfg, 100, hooks);
  return {worst <= kModulusRelTol && checked > 0,
          fmt("max relative deviation %.3g over %.0f guarded pixels", worst, double(checked))};
}

// --- 3 ---------------------------------------------------------------------
Outcome single_mode_recovery() {
  const Scene scene = build_scene(9, 19.0, 0, {1.0}, 23);
  SolverConfig cfg;
  cfg.mode_count = 1;
  cfg.alpha_probe = 0.0;
  ReconState state = initialize(scene.dataset, cfg);
  state.probes = scene.probes;
  double error = 1.0;
  std::size_t reached = 0;
  for (std::size_t it = 1; it <= 200; ++it) {
    sweep(state, scene.dataset, cfg);
    if (it % 10 != 0) continue;
    error = object_error_vs_truth(state, *scene.dataset.truth);
    if (error < kSingleModeObjectError && reached == 0) reached = it;
  }
  return {reached > 0, fmt("object error %.3g after 200 iterations (below %.0e by iteration %.0f)",
                           error, kSingleModeObjectError, double(reached))};
}

// --- 4 ---------------------------------------------------------------------
Outcome two_mode_recovery() {
  const Scene scene = build_scene(9, 19.0, 2, {0.85, 0.15}, 24, 24.0);
  double errors[2] = {0.0, 0.0};
  for (std::size_t modes = 1; modes <= 2; ++modes) {
    SolverConfig cfg;
    cfg.mode_count = modes;
    cfg.probe_update_start = 0;
    ReconState state = initialize(scene.dataset, cfg);
    run(state, scene.dataset, cfg, 300);
    errors[modes - 1] = object_error_vs_truth(state, *scene.dataset.truth);
  }
  return {errors[1] <= kTwoModeRatio * errors[0],
          fmt("object error M=2 %.3g vs M=1 %.3g (ratio %.3f)", errors[1], errors[0],
              errors[1] / errors[0])};
}

// --- 5 ---------------------------------------------------------------------
ComplexField2D brute_force_correlation(const ComplexField2D& a, const ComplexField2D& b) {
  const std::size_t n = a.rows();
  ComplexField2D out(n, n);
  for (std::size_t dy = 0; dy < n; ++dy)
    for (std::size_t dx = 0; dx < n; ++dx) {
      Complex sum{};
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) sum += a(r, c) * std::conj(b((r + dy) % n, (c + dx) % n));
      out(dy, dx) = sum;
    }
  return out;
}

Outcome registration_accuracy() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const ComplexField2D ref = smooth_test_image(64, 4.0, rng());
    const double dx = shift(rng);
    const double dy = shift(rng);
    const ShiftEstimate e =
        register_shift(ref, subpixel_fourier_shift(ref, dx, dy), Weighting::Phase, kRegKappa);
    worst = std::max({worst, std::abs(e.dx + dx), std::abs(e.dy + dy)});
  }
  // Integer shifts: raw-weighted coarse peak against the brute-force correlation argmax.
  std::size_t mismatches = 0;
  std::uniform_int_distribution<int> ishift(-7, 7);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexField2D ref = smooth_test_image(16, 1.5, rng());
    const int dy = ishift(rng);
    const int dx = ishift(rng);
    const ComplexField2D mov = roll(ref, dy, dx);
    const ComplexField2D brute = brute_force_correlation(ref, mov);
    std::size_t best = 0;
    for (std::size_t i = 1; i < brute.size(); ++i)
      if (std::abs(brute[i]) > std::abs(brute[best])) best = i;
    const auto wrap = [](std::size_t k) { return k > 8 ? static_cast<double>(k) - 16.0 : static_cast<double>(k); };
    const ShiftEstimate e = register_shift(ref, mov, Weighting::Raw, 1);
    if (e.dy != -wrap(best / 16) || e.dx != -wrap(best % 16) || e.dy != -dy || e.dx != -dx) ++mismatches;
    const ShiftEstimate p = register_shift(ref, mov, Weighting::Phase, kRegKappa);
    if (p.dy != -dy || p.dx != -dx) ++mismatches;
  }
  return {worst < kRegMaxError && mismatches == 0,
          fmt("max per-axis error %.4f px (limit %.2f), integer mismatches %.0f", worst, kRegMaxError,
              double(mismatches))};
}

// --- 6 ---------------------------------------------------------------------
struct PosrefScene {
  Scene scene;
  double initial_rmse = 0.0;
};

PosrefScene posref_scene() {
  PosrefScene ps;
  Scene& s = ps.scene;
  ScanSpec scan;
  scan.grid_rows = 9;
  scan.grid_cols = 9;
  scan.step = 19.0;
  scan.seed = 31;
  scan.window = 64;
  scan.margin = 4.0;
  s.plan = make_scan(scan);
  // True positions sit on whole pixels; the reconstruction only sees
  // nominal positions corrupted by up to 2 px per axis.
  std::mt19937_64 rng(derive_seed(31, 1));
  std::uniform_int_distribution<int> jitter(-1, 1);
  std::uniform_real_distribution<double> corrupt(-2.0, 2.0);
  for (std::size_t j = 0; j < s.plan.nominal.size(); ++j) {
    Position t = s.plan.nominal[j];
    t.x += jitter(rng);
    t.y += jitter(rng);
    s.plan.true_positions[j] = t;
    s.plan.nominal[j] = Position{t.x + corrupt(rng), t.y + corrupt(rng)};
  }
  ObjectSpec ospec;
  ospec.rows = s.plan.canvas_rows;
  ospec.cols = s.plan.canvas_cols;
  ospec.seed = 131;
  s.object = make_object(ospec);
  ProbeSpec pspec;
  pspec.radius = 18.0;
  s.probes = make_probe(pspec, geometry64());
  s.dataset = synthesize(s.object, s.probes, s.plan, geometry64());
  ps.initial_rmse = position_rmse(s.dataset.positions, s.plan.true_positions);
  return ps;
}

struct PosrefRun {
  double rmse = 0.0;
  double object_error = 0.0;
};

PosrefRun run_posref(const PosrefScene& ps, std::optional<Sensor> sensor) {
  // The probe is known and held fixed so the comparison isolates positions.
  SolverConfig cfg;
  cfg.canvas_padding = 4;
  cfg.order_seed = 3;
  cfg.alpha_probe = 0.0;
  if (sensor) {
    PosRefConfig pr;
    pr.sensor = *sensor;
    cfg.posref = pr;
  }
  ReconState state = initialize(ps.scene.dataset, cfg);
  state.probes = ps.scene.probes;
  run(state, ps.scene.dataset, cfg, 150);
  return {position_rmse(state.positions, ps.scene.plan.true_positions),
          object_error_vs_truth(state, *ps.scene.dataset.truth)};
}

Outcome position_refinement() {
  const PosrefScene ps = posref_scene();
  const PosrefRun off = run_posref(ps, std::nullopt);
  const PosrefRun a = run_posref(ps, Sensor::XcorrA);
  const PosrefRun b = run_posref(ps, Sensor::XcorrB);
  const bool rmse_ok = a.rmse <= kPosrefRmseFraction * ps.initial_rmse;
  const bool object_ok = a.object_error <= kPosrefObjectRatio * off.object_error;
  const bool order_ok = b.rmse > a.rmse;
  std::string detail = fmt("RMSE %.3f -> A %.3f / B %.3f px; ", ps.initial_rmse, a.rmse, b.rmse);
  detail += fmt("object error A %.3g vs off %.3g (ratio %.3f)", a.object_error, off.object_error,
                a.object_error / off.object_error);
  if (!rmse_ok) detail += "; RMSE above 30% of initial";
  if (!object_ok) detail += "; object error ratio above 0.5";
  if (!order_ok) detail += "; B not worse than A";
  return {rmse_ok && object_ok && order_ok, detail};
}

// --- 7 ---------------------------------------------------------------------
Outcome registration_benchmark(const fs::path& csv_path) {
  BenchOptions opt;
  opt.sizes = {64, 128, 256};
  opt.kappas = {10, 100};
  opt.repeats = 3;
  const auto rows = bench_registration(opt);
  if (!csv_path.empty()) {
    if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
    std::ofstream(csv_path) << to_csv(rows);
  }
  const BenchRow* dft = nullptr;
  const BenchRow* pad = nullptr;
  for (const auto& r : rows) {
    if (r.side != 256 || r.kappa != 100) continue;
    (r.method == "matrix-dft" ? dft : pad) = &r;
  }
  if (dft == nullptr || pad == nullptr) return {false, "benchmark rows missing"};
  const double speedup = pad->median_seconds / dft->median_seconds;
  const double grid = 1.0 / 100.0;
  const bool accurate = dft->abs_error <= grid && pad->abs_error <= grid &&
                        std::abs(dft->dx - pad->dx) <= grid + 1e-12 &&
                        std::abs(dft->dy - pad->dy) <= grid + 1e-12;
  return {speedup >= kBenchSpeedup && accurate && !csv_path.empty(),
          fmt("side 256, kappa 100: %.4f s vs %.2f s (%.0fx), errors %.4f / %.4f px", dft->median_seconds,
              pad->median_seconds, speedup, std::max(dft->abs_error, pad->abs_error)) +
              (csv_path.empty() ? std::string(", no CSV path given") : ", CSV " + csv_path.string())};
}

// --- 8 ---------------------------------------------------------------------
std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void pipeline(const fs::path& dir) {
  ScanSpec scan{5, 5, 19.0, 1.5, 9, 64, -1.0};
  const ScanPlan plan = make_scan(scan);
  ObjectSpec ospec;
  ospec.rows = plan.canvas_rows;
  ospec.cols = plan.canvas_cols;
  ospec.seed = 4;
  ProbeSpec pspec;
  pspec.mode_count = 2;
  pspec.mode_powers = {0.85, 0.15};
  pspec.radius = 18.0;
  const auto probes = make_probe(pspec, geometry64());
  const PtychoDataset ds = synthesize(make_object(ospec), probes, plan, geometry64(),
                                      NoiseModel{NoiseKind::Poisson, 1e6, 12});
  io::write_dataset(ds, dir / "dataset" / "manifest.json");
  const PtychoDataset loaded = io::read_dataset(dir / "dataset" / "manifest.json");
  SolverConfig cfg;
  cfg.mode_count = 2;
  cfg.order_seed = 8;
  PosRefConfig pr;
  pr.warmup_iterations = 3;
  cfg.posref = pr;
  ReconState state = initialize(loaded, cfg);
  io::ReconRecord record;
  run(state, loaded, cfg, 12, {}, [&](const ReconState& s) { record.position_trace.push_back(s.positions); });
  io::write_recon(state, record, dir / "recon");
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "ptycho_acceptance_determinism";
  fs::remove_all(root);
  pipeline(root / "a");
  pipeline(root / "b");
  std::size_t compared = 0;
  std::size_t differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "timing.json") continue;
    const fs::path twin = root / "b" / fs::relative(entry.path(), root / "a");
    ++compared;
    if (!fs::exists(twin) || file_bytes(entry.path()) != file_bytes(twin)) ++differing;
  }
  fs::remove_all(root);
  return {compared > 0 && differing == 0,
          fmt("%.0f files compared across two runs, %.0f differ", double(compared), double(differing))};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path csv_path;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--csv") == 0 && i + 1 < argc) {
      csv_path = argv[++i];
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--csv path] [--only N]...\n", argv[0]);
      return 2;
    }
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "ePIE reduction", epie_reduction},
      {2, "modulus-constraint exactness", modulus_exactness},
      {3, "noiseless single-mode recovery", single_mode_recovery},
      {4, "two-mode recovery", two_mode_recovery},
      {5, "registration accuracy", registration_accuracy},
      {6, "position refinement recovery", position_refinement},
      {7, "registration benchmark", [&] { return registration_benchmark(csv_path); }},
      {8, "determinism", determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), elapsed(start));
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
