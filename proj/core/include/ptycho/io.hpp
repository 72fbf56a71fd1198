#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ptycho/dataset.hpp"
#include "ptycho/engine.hpp"

namespace ptycho::io {

inline constexpr const char* kDatasetFormat = "ptycho-dataset/1";
inline constexpr const char* kReconFormat = "ptycho-recon/1";

// Raw arrays: little-endian, row-major, no header.
void write_complex64(const std::filesystem::path& path, const ComplexField2D& field);
ComplexField2D read_complex64(const std::filesystem::path& path, std::size_t rows, std::size_t cols);
void write_complex128(const std::filesystem::path& path, const ComplexField2D& field);
ComplexField2D read_complex128(const std::filesystem::path& path, std::size_t rows, std::size_t cols);
void write_float32(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_float32(const std::filesystem::path& path, std::size_t count);
void write_float64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_float64(const std::filesystem::path& path, std::size_t count);

/// Writes `manifest_path` plus sibling array files. Patterns are stored as
/// float32, fields as complex64, positions as float64 (x, y) pairs.
void write_dataset(const PtychoDataset& dataset, const std::filesystem::path& manifest_path);
/// Reads a dataset; a missing ground_truth block leaves `truth` empty.
PtychoDataset read_dataset(const std::filesystem::path& manifest_path);

/// Extra per-run records kept next to a reconstruction.
struct ReconRecord {
  std::vector<std::vector<Position>> position_trace;  // snapshot after each iteration
  std::vector<double> seconds_per_iteration;
};

/// Reconstruction output and checkpoint share one layout: `dir/recon.json`
/// plus raw arrays. Fields are kept in complex128 so a resumed run continues
/// bit-for-bit. Timing goes to `timing.json`, the only non-reproducible file.
void write_recon(const ReconState& state, const ReconRecord& record,
                 const std::filesystem::path& dir);
ReconState read_recon(const std::filesystem::path& dir, ReconRecord* record = nullptr);

}  // namespace ptycho::io
