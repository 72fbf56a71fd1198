#include "ptycho/registration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ptycho/error.hpp"
#include "ptycho/fft.hpp"

namespace ptycho {
namespace {

constexpr int kMaxUpsample = 1000;
constexpr double kPhaseWeightEpsilon = 1e-12;

double signed_index(std::size_t index, std::size_t n) {
  // (-n/2, n/2]
  const auto i = static_cast<double>(index);
  return index > n / 2 ? i - static_cast<double>(n) : i;
}

double wrap_shift(double s, std::size_t n) {
  const double half = static_cast<double>(n) / 2.0;
  const double period = static_cast<double>(n);
  while (s > half) s -= period;
  while (s <= -half) s += period;
  return s;
}

// Row-major (count x n) matrix of exp(+2 pi i f(k) (origin + t / kappa) / n).
std::vector<Complex> dft_kernel(std::size_t count, std::size_t n, double origin, int kappa) {
  std::vector<Complex> kernel(count * n);
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t t = 0; t < count; ++t) {
    const double position = origin + static_cast<double>(t) / kappa;
    for (std::size_t k = 0; k < n; ++k) {
      kernel[t * n + k] = std::polar(1.0, two_pi_over_n * fft::signed_frequency(k, n) * position);
    }
  }
  return kernel;
}

}  // namespace

ComplexField2D cross_power_spectrum(const ComplexField2D& reference, const ComplexField2D& moving,
                                    Weighting weighting) {
  if (!reference.same_shape(moving) || !reference.is_square() || reference.empty()) {
    fail(ErrorKind::Shape, "registration inputs must be equal, non-empty square fields");
  }
  ComplexField2D xps = fft::forward(reference);
  const ComplexField2D moving_spectrum = fft::forward(moving);
  double peak = 0.0;
  for (std::size_t i = 0; i < xps.size(); ++i) {
    xps[i] *= std::conj(moving_spectrum[i]);
    peak = std::max(peak, std::abs(xps[i]));
  }
  if (!(peak > 0.0)) fail(ErrorKind::DegenerateInput, "cross-power spectrum is identically zero");
  if (weighting == Weighting::Phase) {
    const double eps = kPhaseWeightEpsilon * peak;
    for (auto& v : xps) v /= std::abs(v) + eps;
  }
  return xps;
}

ShiftEstimate coarse_shift(const ComplexField2D& xps) {
  if (!xps.is_square() || xps.empty()) fail(ErrorKind::Shape, "spectrum must be square");
  const ComplexField2D corr = fft::backward(xps);
  const std::size_t n = corr.rows();

  double best = -1.0;
  double best_dy = 0.0;
  double best_dx = 0.0;
  const auto better_tie = [](double dy, double dx, double bdy, double bdx) {
    const double l1 = std::abs(dy) + std::abs(dx);
    const double bl1 = std::abs(bdy) + std::abs(bdx);
    if (l1 != bl1) return l1 < bl1;
    if (dy != bdy) return dy < bdy;
    return dx < bdx;
  };
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double value = std::abs(corr(r, c));
      const double dy = signed_index(r, n);
      const double dx = signed_index(c, n);
      if (value > best || (value == best && better_tie(dy, dx, best_dy, best_dx))) {
        best = value;
        best_dy = dy;
        best_dx = dx;
      }
    }
  }
  return ShiftEstimate{best_dy, best_dx, best, 1};
}

RealImage upsampled_correlation(const ComplexField2D& xps, double dy0, double dx0,
                                std::size_t samples, int kappa) {
  const std::size_t n = xps.rows();
  const auto row_kernel = dft_kernel(samples, n, dy0, kappa);  // samples x n
  const auto col_kernel = dft_kernel(samples, n, dx0, kappa);  // samples x n

  // tmp = xps * col_kernel^T  (n x samples)
  std::vector<Complex> tmp(n * samples, Complex{});
  for (std::size_t r = 0; r < n; ++r) {
    const Complex* xrow = xps.data() + r * n;
    for (std::size_t j = 0; j < samples; ++j) {
      const Complex* krow = col_kernel.data() + j * n;
      Complex acc{};
      for (std::size_t k = 0; k < n; ++k) acc += xrow[k] * krow[k];
      tmp[r * samples + j] = acc;
    }
  }
  // out = row_kernel * tmp  (samples x samples)
  RealImage out(samples, samples);
  std::vector<Complex> acc(samples);
  const double norm = 1.0 / static_cast<double>(n * n);
  for (std::size_t i = 0; i < samples; ++i) {
    std::fill(acc.begin(), acc.end(), Complex{});
    const Complex* krow = row_kernel.data() + i * n;
    for (std::size_t r = 0; r < n; ++r) {
      const Complex weight = krow[r];
      const Complex* trow = tmp.data() + r * samples;
      for (std::size_t j = 0; j < samples; ++j) acc[j] += weight * trow[j];
    }
    for (std::size_t j = 0; j < samples; ++j) out(i, j) = std::abs(acc[j]) * norm;
  }
  return out;
}

namespace {

// Factors above kSinglePassUpsample are reached in two passes: a
// 1/kFirstPassUpsample px grid over 1.5 px, then a 1/kappa grid within one
// first-pass cell of its peak.
constexpr int kSinglePassUpsample = 100;
constexpr int kFirstPassUpsample = 50;

ShiftEstimate grid_peak(const ComplexField2D& xps, double centre_y, double centre_x,
                        std::size_t samples, int kappa) {
  const auto half = static_cast<double>(samples / 2);
  const double dy0 = centre_y - half / kappa;
  const double dx0 = centre_x - half / kappa;
  const RealImage corr = upsampled_correlation(xps, dy0, dx0, samples, kappa);

  std::size_t best_i = 0;
  std::size_t best_j = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < samples; ++j) {
      if (corr(i, j) > best) {
        best = corr(i, j);
        best_i = i;
        best_j = j;
      }
    }
  }
  const std::size_t n = xps.rows();
  ShiftEstimate out;
  out.dy = wrap_shift(dy0 + static_cast<double>(best_i) / kappa, n);
  out.dx = wrap_shift(dx0 + static_cast<double>(best_j) / kappa, n);
  out.peak_value = best;
  out.upsample = kappa;
  return out;
}

}  // namespace

ShiftEstimate refine_shift(const ComplexField2D& xps, const ShiftEstimate& coarse, int kappa) {
  if (kappa < 1 || kappa > kMaxUpsample) {
    fail(ErrorKind::Parameter,
         "upsample factor must lie in [1, 1000], got " + std::to_string(kappa));
  }
  if (kappa == 1) return coarse;
  if (!xps.is_square() || xps.empty()) fail(ErrorKind::Shape, "spectrum must be square");

  const int first = kappa <= kSinglePassUpsample ? kappa : kFirstPassUpsample;
  const auto samples = static_cast<std::size_t>(std::ceil(1.5 * first));
  const ShiftEstimate pass = grid_peak(xps, coarse.dy, coarse.dx, samples, first);
  if (kappa == first) return pass;
  const auto local = 2 * static_cast<std::size_t>(std::ceil(static_cast<double>(kappa) / first)) + 1;
  return grid_peak(xps, pass.dy, pass.dx, local, kappa);
}

ShiftEstimate register_shift(const ComplexField2D& reference, const ComplexField2D& moving,
                             Weighting weighting, int kappa) {
  const ComplexField2D xps = cross_power_spectrum(reference, moving, weighting);
  return refine_shift(xps, coarse_shift(xps), kappa);
}

}  // namespace ptycho
