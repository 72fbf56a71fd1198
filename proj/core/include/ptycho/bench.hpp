#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/registration.hpp"

namespace ptycho {

/// Reference upsampling: zero-pads the cross-power spectrum to side * kappa
/// and inverse-transforms the whole grid (row pass, then one column at a
/// time so memory stays O(side^2 * kappa)). Returns the global peak at
/// 1/kappa resolution.
ShiftEstimate zero_padded_peak(const ComplexField2D& xps, int kappa);

struct BenchRow {
  std::size_t side = 0;
  int kappa = 1;
  std::string method;          // "matrix-dft" or "zero-pad"
  double median_seconds = 0.0;
  double dy = 0.0;
  double dx = 0.0;
  double abs_error = 0.0;      // max per-axis distance to the true shift
};

struct BenchOptions {
  std::vector<std::size_t> sizes{64, 128};
  std::vector<int> kappas{1, 10};
  std::size_t repeats = 3;
  std::uint64_t seed = 7;
};

/// Times both upsampling methods on the same smooth image pair per
/// (side, kappa); two rows per combination.
std::vector<BenchRow> bench_registration(const BenchOptions& options);

std::string to_csv(const std::vector<BenchRow>& rows);

/// Smooth random complex test image with the given correlation length.
ComplexField2D smooth_test_image(std::size_t side, double length, std::uint64_t seed);

}  // namespace ptycho
