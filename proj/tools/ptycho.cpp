#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptycho/bench.hpp"
#include "ptycho/config.hpp"
#include "ptycho/engine.hpp"
#include "ptycho/error.hpp"
#include "ptycho/io.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/registration.hpp"
#include "ptycho/render.hpp"
#include "ptycho/simulator.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ptycho;

namespace {

// Exit codes; usage errors come from CLI11 itself.
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitData = 4;
constexpr int kExitFailure = 5;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return kExitConfig;
    case ErrorKind::Io:
    case ErrorKind::Shape:
    case ErrorKind::Data:
    case ErrorKind::Unsupported:
      return kExitData;
    default:
      return kExitFailure;
  }
}

void report_error(std::string_view kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

// PTYCHO_OUTPUT_DIR relocates an output directory, keeping its last component.
fs::path redirect_output(const fs::path& configured) {
  const char* env = std::getenv(kOutputDirEnv);
  if (env == nullptr || *env == '\0') return configured;
  return fs::path(env) / configured.filename();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const fs::path& config_path) {
  const SimulateConfig c = load_simulate_config(config_path);
  const Geometry geometry = make_geometry(c.wavelength_m, c.distance_m, c.detector_pixel_m, c.window);
  const ScanPlan plan = make_scan(c.scan);

  ProbeSpec pspec = c.probe;
  if (pspec.base == ProbeBase::FromFile) {
    if (c.probe_file.empty()) fail(ErrorKind::Config, "probe.base from-file needs probe.file");
    pspec.custom_base = io::read_complex64(c.probe_file, c.window, c.window);
  }
  const auto probes = make_probe(pspec, geometry);

  ObjectSpec ospec = c.object;
  if (ospec.rows == 0) ospec.rows = plan.canvas_rows;
  if (ospec.cols == 0) ospec.cols = plan.canvas_cols;
  PtychoDataset ds = synthesize(make_object(ospec), probes, plan, geometry, c.noise);
  ds.created_by = "ptycho simulate";

  const fs::path out = redirect_output(c.output);
  io::write_dataset(ds, out / "manifest.json");
  std::cout << json{{"manifest", (out / "manifest.json").string()},
                    {"positions", ds.size()},
                    {"window", c.window},
                    {"canvas", {ospec.rows, ospec.cols}}}
                   .dump()
            << '\n';
  return 0;
}

// --- reconstruct -------------------------------------------------------------

void write_renders(const ReconState& state, const fs::path& dir) {
  render(state.object, RenderKind::Magnitude, dir / "object_magnitude.png");
  render(state.object, RenderKind::Phase, dir / "object_phase.png");
  for (std::size_t k = 0; k < state.probes.size(); ++k) {
    const std::string stem = "probe_" + std::to_string(k);
    render(state.probes[k], RenderKind::Magnitude, dir / (stem + "_magnitude.png"));
    render(state.probes[k], RenderKind::Phase, dir / (stem + "_phase.png"));
  }
}

int cmd_reconstruct(const fs::path& config_path) {
  const ReconstructConfig c = load_reconstruct_config(config_path);
  validate(c.solver);
  const PtychoDataset ds = io::read_dataset(c.dataset);

  io::ReconRecord record;
  ReconState state = c.resume_from.empty() ? initialize(ds, c.solver)
                                           : io::read_recon(c.resume_from, &record);
  if (state.positions.size() != ds.size()) {
    fail(ErrorKind::Data, "resume state has " + std::to_string(state.positions.size()) +
                              " positions, dataset has " + std::to_string(ds.size()));
  }
  if (state.probes.size() != c.solver.mode_count) {
    fail(ErrorKind::Config, "resume state mode count differs from solver.mode_count");
  }

  const fs::path out = redirect_output(c.output);
  fs::create_directories(out);
  const std::size_t remaining = c.solver.iterations > state.iteration ? c.solver.iterations - state.iteration : 0;

  auto tick = std::chrono::steady_clock::now();
  run(state, ds, c.solver, remaining, {}, [&](const ReconState& s) {
    const auto now = std::chrono::steady_clock::now();
    record.seconds_per_iteration.push_back(std::chrono::duration<double>(now - tick).count());
    record.position_trace.push_back(s.positions);
    if (c.checkpoint_every > 0 && s.iteration % c.checkpoint_every == 0) {
      io::write_recon(s, record, out / "checkpoint");
    }
    tick = std::chrono::steady_clock::now();
  });

  io::write_recon(state, record, out);
  if (c.render) write_renders(state, out);

  json summary{{"output", out.string()}, {"iterations", state.iteration}};
  if (!state.error_trace.empty()) summary["final_intensity_error"] = state.error_trace.back();
  std::cout << summary.dump() << '\n';
  return 0;
}

// --- register ----------------------------------------------------------------

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// 16-bit PNGs load as real amplitudes; anything else is raw complex64.
ComplexField2D load_image(const fs::path& path, const std::optional<Shape>& shape) {
  if (path.extension() == ".png") {
    const Gray16Image img = read_png16(path);
    ComplexField2D field(img.rows, img.cols);
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = Complex(img.pixels[i] / 65535.0, 0.0);
    return field;
  }
  if (!shape) fail(ErrorKind::Config, path.string() + ": raw complex64 input needs --shape ROWSxCOLS");
  return io::read_complex64(path, shape->rows, shape->cols);
}

std::optional<Shape> parse_shape(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) fail(ErrorKind::Config, "");
    std::size_t used = 0;
    Shape s{std::stoul(text.substr(0, x), &used), 0};
    if (used != x) fail(ErrorKind::Config, "");
    s.cols = std::stoul(text.substr(x + 1), &used);
    if (used != text.size() - x - 1 || s.rows == 0 || s.cols == 0) fail(ErrorKind::Config, "");
    return s;
  } catch (const std::exception&) {
    fail(ErrorKind::Config, "--shape must look like 64x64, got '" + text + "'");
  }
}

int cmd_register(const fs::path& ref_path, const fs::path& mov_path, int kappa,
                 const std::string& weighting, const std::string& shape_text) {
  Weighting w = Weighting::Phase;
  if (weighting == "raw") {
    w = Weighting::Raw;
  } else if (weighting != "phase") {
    fail(ErrorKind::Config, "--weighting must be phase or raw");
  }
  const auto shape = parse_shape(shape_text);
  const ComplexField2D ref = load_image(ref_path, shape);
  const ComplexField2D mov = load_image(mov_path, shape);
  const ShiftEstimate est = register_shift(ref, mov, w, kappa);
  std::cout << json{{"dy", est.dy}, {"dx", est.dx}, {"peak", est.peak_value}, {"kappa", est.upsample}}.dump()
            << '\n';
  return 0;
}

// --- metrics -----------------------------------------------------------------

int cmd_metrics(const fs::path& recon_dir, const fs::path& manifest, const fs::path& output) {
  io::ReconRecord record;
  const ReconState state = io::read_recon(recon_dir, &record);
  const PtychoDataset ds = io::read_dataset(manifest);
  if (state.positions.size() != ds.size()) {
    fail(ErrorKind::Data, "reconstruction and dataset disagree on the number of positions");
  }

  MetricsReport report;
  report.intensity_error = state.error_trace;
  report.seconds_per_iteration = record.seconds_per_iteration;
  if (ds.truth) {
    report.initial_position_rmse = position_rmse(ds.positions, ds.truth->positions);
    for (const auto& snapshot : record.position_trace) {
      report.position_rmse.push_back(position_rmse(snapshot, ds.truth->positions));
    }
    report.object_error = object_error_vs_truth(state, *ds.truth);
  } else {
    std::cerr << "note: dataset has no ground truth; truth metrics skipped\n";
  }
  validate(report);

  const std::string text = to_json(report);
  if (output.empty()) {
    std::cout << text << '\n';
  } else {
    write_text(redirect_output(output.parent_path().empty() ? fs::path(".") : output.parent_path()) /
                   output.filename(),
               text + "\n");
  }
  return 0;
}

// --- bench-reg ---------------------------------------------------------------

int cmd_bench(const BenchOptions& options, const fs::path& csv) {
  if (options.sizes.empty() || options.kappas.empty() || options.repeats == 0) {
    fail(ErrorKind::Config, "bench-reg needs at least one size, one kappa and one repeat");
  }
  for (int k : options.kappas) {
    if (k < 1) fail(ErrorKind::Config, "kappa must be >= 1");
  }
  const auto rows = bench_registration(options);
  const std::string text = to_csv(rows);
  const fs::path out = redirect_output(csv.parent_path().empty() ? fs::path(".") : csv.parent_path()) /
                       csv.filename();
  write_text(out, text);
  std::cout << text;
  std::cerr << "wrote " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ptychography simulation, reconstruction and registration"};
  app.require_subcommand(1);
  bool print_defaults = false;

  fs::path sim_config;
  auto* sim = app.add_subcommand("simulate", "Synthesize a dataset from a JSON config");
  sim->add_option("config", sim_config, "simulate config (JSON)");
  sim->add_flag("--print-defaults", print_defaults, "print the default config and exit");

  fs::path rec_config;
  auto* rec = app.add_subcommand("reconstruct", "Run the multi-mode rPIE solver from a JSON config");
  rec->add_option("config", rec_config, "reconstruct config (JSON)");
  rec->add_flag("--print-defaults", print_defaults, "print the default config and exit");

  fs::path reg_ref, reg_mov;
  int reg_kappa = 1;
  std::string reg_weighting = "phase";
  std::string reg_shape;
  auto* reg = app.add_subcommand("register", "Subpixel shift between two images");
  reg->add_option("ref", reg_ref, "reference image (.png or raw complex64)")->required();
  reg->add_option("mov", reg_mov, "moving image (.png or raw complex64)")->required();
  reg->add_option("--kappa", reg_kappa, "upsampling factor")->check(CLI::PositiveNumber);
  reg->add_option("--weighting", reg_weighting, "phase or raw");
  reg->add_option("--shape", reg_shape, "ROWSxCOLS for raw complex64 inputs");

  fs::path met_recon, met_manifest, met_output;
  auto* met = app.add_subcommand("metrics", "Metrics of a reconstruction against a dataset");
  met->add_option("recon", met_recon, "reconstruction directory")->required();
  met->add_option("truth", met_manifest, "dataset manifest carrying ground truth")->required();
  met->add_option("-o,--output", met_output, "write the report here instead of stdout");

  BenchOptions bench;
  bench.sizes = {64, 128, 256};
  bench.kappas = {1, 10, 100};
  fs::path bench_csv = "bench_registration.csv";
  auto* bch = app.add_subcommand("bench-reg", "Time matrix-DFT vs zero-padded upsampling");
  bch->add_option("--sizes", bench.sizes, "image sides")->delimiter(',');
  bch->add_option("--kappas", bench.kappas, "upsampling factors")->delimiter(',');
  bch->add_option("--repeats", bench.repeats, "repeats per cell (median reported)");
  bch->add_option("--seed", bench.seed, "test image seed");
  bch->add_option("--csv", bench_csv, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (*sim || *rec) {
      if (print_defaults) {
        std::cout << (*sim ? default_simulate_config_json() : default_reconstruct_config_json()) << '\n';
        return 0;
      }
      const fs::path& cfg = *sim ? sim_config : rec_config;
      if (cfg.empty()) {
        report_error("usage", "a config file is required (or --print-defaults)");
        return kExitUsage;
      }
      return *sim ? cmd_simulate(cfg) : cmd_reconstruct(cfg);
    }
    if (*reg) return cmd_register(reg_ref, reg_mov, reg_kappa, reg_weighting, reg_shape);
    if (*met) return cmd_metrics(met_recon, met_manifest, met_output);
    if (*bch) return cmd_bench(bench, bench_csv);
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    report_error("io", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
