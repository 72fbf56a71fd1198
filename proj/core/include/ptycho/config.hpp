#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ptycho/engine.hpp"
#include "ptycho/simulator.hpp"

namespace ptycho {

/// `simulate` configuration. Relative paths resolve against the config file.
struct SimulateConfig {
  double wavelength_m = 8.3187e-10;
  double distance_m = 0.75;
  double detector_pixel_m = 20e-6;
  std::size_t window = 64;

  ScanSpec scan{9, 9, 19.0, 0.0, 1, 64, -1.0};
  ProbeSpec probe{1, {1.0}, ProbeBase::Disk, 18.0, 3.0, 1.0, std::nullopt};
  std::filesystem::path probe_file;   // complex64, window x window; used with base "from-file"
  ObjectSpec object{ObjectKind::Composite, 0, 0, 0.6, 1.0, 6.0, 3};  // 0 rows/cols: fit the scan
  NoiseModel noise{};
  std::filesystem::path output = "dataset";
};

/// `reconstruct` configuration.
struct ReconstructConfig {
  std::filesystem::path dataset;      // manifest path
  SolverConfig solver;
  std::filesystem::path output = "recon";
  std::size_t checkpoint_every = 0;   // 0 disables checkpoints
  std::filesystem::path resume_from;  // reconstruction or checkpoint directory
  bool render = true;
};

/// Output directory override honoured by the CLI.
inline constexpr const char* kOutputDirEnv = "PTYCHO_OUTPUT_DIR";

SimulateConfig load_simulate_config(const std::filesystem::path& path);
ReconstructConfig load_reconstruct_config(const std::filesystem::path& path);
SimulateConfig parse_simulate_config(const std::string& json_text,
                                     const std::filesystem::path& base_dir = {});
ReconstructConfig parse_reconstruct_config(const std::string& json_text,
                                           const std::filesystem::path& base_dir = {});

/// Complete documents holding every default; `--print-defaults` emits these.
std::string default_simulate_config_json();
std::string default_reconstruct_config_json();

}  // namespace ptycho
