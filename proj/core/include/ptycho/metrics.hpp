#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ptycho/dataset.hpp"
#include "ptycho/engine.hpp"
#include "ptycho/field.hpp"

namespace ptycho {

using Mask = std::vector<std::uint8_t>;

/// Phase-gauge invariant distance 1 - |<a, b>| / (|a| |b|) over masked pixels.
double object_error(const ComplexField2D& reconstructed, const ComplexField2D& truth, const Mask& mask);

struct AlignedError {
  double error = 1.0;
  double dy = 0.0;   // translation applied to the reconstruction: out(r) = in(r - d)
  double dx = 0.0;
};

/// object_error minimized over a global translation of the reconstruction
/// (|dy|, |dx| <= max_shift). Blind reconstructions are only defined up to a
/// common shift of object and probe.
AlignedError aligned_object_error(const ComplexField2D& reconstructed, const ComplexField2D& truth,
                                  const Mask& mask, double max_shift);

/// Pixels whose summed illumination sum_j sum_p |P_p|^2 exceeds `threshold`
/// times its maximum. The canvas (0, 0) sits at (origin_row, origin_col) in
/// scan coordinates.
Mask coverage_mask(const std::vector<ComplexField2D>& probes, const std::vector<Position>& positions,
                   std::size_t rows, std::size_t cols, std::ptrdiff_t origin_row,
                   std::ptrdiff_t origin_col, double threshold = 0.05);

/// Root-mean-square 2D distance after removing the mean offset between the
/// two position sets (global translation is unobservable).
double position_rmse(const std::vector<Position>& estimated, const std::vector<Position>& truth);

/// Truth object resampled onto a reconstruction canvas. Pixels of the
/// canvas outside the truth canvas are cleared in `mask`.
ComplexField2D truth_on_canvas(const ComplexField2D& truth, std::size_t rows, std::size_t cols,
                               std::ptrdiff_t origin_row, std::ptrdiff_t origin_col, Mask& mask);

/// Object error of a reconstruction against a dataset's ground truth, using
/// the truth probes and positions for the coverage mask. Global phase and a
/// global translation of up to half a window are factored out.
double object_error_vs_truth(const ReconState& state, const GroundTruth& truth,
                             double threshold = 0.05);

struct MetricsReport {
  std::vector<double> intensity_error;
  std::vector<double> position_rmse;        // per iteration, empty without truth
  double initial_position_rmse = 0.0;
  std::optional<double> object_error;
  std::vector<double> seconds_per_iteration;
};

/// Throws when any entry is negative or non-finite.
void validate(const MetricsReport& report);
std::string to_json(const MetricsReport& report);

}  // namespace ptycho
