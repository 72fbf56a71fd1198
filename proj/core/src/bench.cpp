#include "ptycho/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ptycho/error.hpp"
#include "ptycho/fft.hpp"

namespace ptycho {
namespace {

// Padded bin for signed frequency f in an L-point transform.
std::size_t padded_bin(double f, std::size_t length) {
  return f < 0.0 ? length - static_cast<std::size_t>(-f) : static_cast<std::size_t>(f);
}

template <typename Fn>
double median_seconds(std::size_t repeats, Fn&& fn) {
  std::vector<double> samples;
  samples.reserve(repeats);
  for (std::size_t k = 0; k < std::max<std::size_t>(repeats, 1); ++k) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

}  // namespace

ShiftEstimate zero_padded_peak(const ComplexField2D& xps, int kappa) {
  if (kappa < 1) fail(ErrorKind::Parameter, "upsample factor must be positive");
  if (!xps.is_square() || xps.empty()) fail(ErrorKind::Shape, "spectrum must be square");
  const std::size_t n = xps.rows();
  const std::size_t length = n * static_cast<std::size_t>(kappa);

  // Row pass: each spectrum row padded along x and inverse-transformed.
  std::vector<Complex> rows(n * length, Complex{});
  std::vector<Complex> line(length);
  for (std::size_t r = 0; r < n; ++r) {
    std::fill(line.begin(), line.end(), Complex{});
    for (std::size_t k = 0; k < n; ++k) line[padded_bin(fft::signed_frequency(k, n), length)] = xps(r, k);
    fft::backward_1d_inplace(line);
    std::copy(line.begin(), line.end(), rows.begin() + static_cast<std::ptrdiff_t>(r * length));
  }

  // Column pass, one output column at a time.
  double best = -1.0;
  std::size_t best_row = 0;
  std::size_t best_col = 0;
  for (std::size_t c = 0; c < length; ++c) {
    std::fill(line.begin(), line.end(), Complex{});
    for (std::size_t r = 0; r < n; ++r) {
      line[padded_bin(fft::signed_frequency(r, n), length)] = rows[r * length + c];
    }
    fft::backward_1d_inplace(line);
    for (std::size_t r = 0; r < length; ++r) {
      const double value = std::abs(line[r]);
      if (value > best) {
        best = value;
        best_row = r;
        best_col = c;
      }
    }
  }
  const auto to_shift = [&](std::size_t index) {
    const double signed_index = index > length / 2 ? static_cast<double>(index) - static_cast<double>(length)
                                                   : static_cast<double>(index);
    return signed_index / kappa;
  };
  // Both 1D inverses carry a 1/L factor; rescale to the 1/n^2 convention.
  const double scale = static_cast<double>(length) * static_cast<double>(length) /
                       (static_cast<double>(n) * static_cast<double>(n));
  return ShiftEstimate{to_shift(best_row), to_shift(best_col), best * scale, kappa};
}

ComplexField2D smooth_test_image(std::size_t side, double length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexField2D image(side, side);
  for (auto& v : image) v = Complex(normal(rng), normal(rng));
  fft::forward_inplace(image);
  const double sigma = static_cast<double>(side) / (2.0 * std::numbers::pi * length);
  for (std::size_t r = 0; r < side; ++r) {
    const double fr = fft::signed_frequency(r, side) / sigma;
    for (std::size_t c = 0; c < side; ++c) {
      const double fc = fft::signed_frequency(c, side) / sigma;
      image(r, c) *= std::exp(-0.5 * (fr * fr + fc * fc));
    }
  }
  fft::backward_inplace(image);
  return image;
}

std::vector<BenchRow> bench_registration(const BenchOptions& options) {
  std::vector<BenchRow> table;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  for (const std::size_t side : options.sizes) {
    for (const int kappa : options.kappas) {
      const ComplexField2D reference = smooth_test_image(side, 4.0, rng());
      const double true_dy = shift(rng);
      const double true_dx = shift(rng);
      // moving = reference shifted by d, so the expected estimate is -d.
      const ComplexField2D moving = subpixel_fourier_shift(reference, true_dx, true_dy);
      const ComplexField2D xps = cross_power_spectrum(reference, moving, Weighting::Phase);

      ShiftEstimate dft_result;
      const double dft_time = median_seconds(options.repeats, [&] {
        dft_result = refine_shift(xps, coarse_shift(xps), kappa);
      });
      ShiftEstimate pad_result;
      const double pad_time = median_seconds(options.repeats, [&] {
        pad_result = zero_padded_peak(xps, kappa);
      });

      const auto error = [&](const ShiftEstimate& e) {
        return std::max(std::abs(e.dy + true_dy), std::abs(e.dx + true_dx));
      };
      table.push_back({side, kappa, "matrix-dft", dft_time, dft_result.dy, dft_result.dx, error(dft_result)});
      table.push_back({side, kappa, "zero-pad", pad_time, pad_result.dy, pad_result.dx, error(pad_result)});
    }
  }
  return table;
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out.precision(9);
  out << "side,kappa,method,median_seconds,dy,dx,abs_error\n";
  for (const auto& row : rows) {
    out << row.side << ',' << row.kappa << ',' << row.method << ',' << row.median_seconds << ','
        << row.dy << ',' << row.dx << ',' << row.abs_error << '\n';
  }
  return out.str();
}

}  // namespace ptycho
