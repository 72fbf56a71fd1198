#pragma once

#include <cstddef>

#include "ptycho/field.hpp"

namespace ptycho {

enum class Weighting { Phase, Raw };

/// Translation estimate. (dy, dx) is the shift to add to the moving image's
/// coordinates to align it with the reference: for moving = roll(reference, d)
/// the estimate is -d.
struct ShiftEstimate {
  double dy = 0.0;
  double dx = 0.0;
  double peak_value = 0.0;
  int upsample = 1;
};

/// Cross-power spectrum F(reference) * conj(F(moving)) in plain FFT layout
/// (DC at index (0, 0)). Phase weighting divides each element by
/// |element| + 1e-12 * max|element|.
ComplexField2D cross_power_spectrum(const ComplexField2D& reference, const ComplexField2D& moving,
                                    Weighting weighting);

/// Integer-pixel peak of the inverse-transformed spectrum, mapped into
/// (-side/2, side/2]. Ties go to the smallest |dy| + |dx|, then dy, then dx.
ShiftEstimate coarse_shift(const ComplexField2D& xps);

/// Upsampled DFT: evaluates the correlation on a ceil(1.5 * kappa)-wide grid
/// of spacing 1/kappa around the coarse peak using explicit DFT matrix
/// products. Above kappa = 100 this runs as a 1/50 px pass followed by a
/// 1/kappa pass around its peak. kappa == 1 returns `coarse` unchanged.
ShiftEstimate refine_shift(const ComplexField2D& xps, const ShiftEstimate& coarse, int kappa);

ShiftEstimate register_shift(const ComplexField2D& reference, const ComplexField2D& moving,
                             Weighting weighting, int kappa);

/// Upsampled correlation magnitude sampled at rows dy0 + i / kappa and
/// columns dx0 + j / kappa; exposed for the benchmark harness and tests.
RealImage upsampled_correlation(const ComplexField2D& xps, double dy0, double dx0,
                                std::size_t samples, int kappa);

}  // namespace ptycho
