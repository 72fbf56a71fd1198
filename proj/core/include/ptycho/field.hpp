#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ptycho {

using Complex = std::complex<double>;

/// Dense row-major 2D array of complex amplitudes. Holds object canvases,
/// probe modes and exit/detector waves alike.
class ComplexField2D {
 public:
  ComplexField2D() = default;
  ComplexField2D(std::size_t rows, std::size_t cols, Complex fill = Complex{});

  /// Takes ownership of `values`; throws a shape error when the length does
  /// not equal rows * cols.
  static ComplexField2D from_values(std::size_t rows, std::size_t cols,
                                    std::vector<Complex> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool same_shape(const ComplexField2D& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Complex& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }
  Complex& operator[](std::size_t i) noexcept { return data_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<Complex> values() noexcept { return data_; }
  std::span<const Complex> values() const noexcept { return data_; }
  Complex* data() noexcept { return data_.data(); }
  const Complex* data() const noexcept { return data_.data(); }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const ComplexField2D&, const ComplexField2D&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Real-valued companion used for intensities and coverage maps.
struct RealImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  RealImage() = default;
  RealImage(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) noexcept { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }

  friend bool operator==(const RealImage&, const RealImage&) = default;
};

/// Sum of conj(a) * b.
Complex inner_product(const ComplexField2D& a, const ComplexField2D& b);
double squared_norm(const ComplexField2D& field);
bool all_finite(const ComplexField2D& field) noexcept;
/// max |a - b| elementwise; shapes must match.
double max_abs_diff(const ComplexField2D& a, const ComplexField2D& b);

ComplexField2D multiply(const ComplexField2D& a, const ComplexField2D& b);
ComplexField2D scaled(const ComplexField2D& field, Complex factor);
RealImage intensity(const ComplexField2D& field);
ComplexField2D to_complex(const RealImage& image);

// --- geometry -------------------------------------------------------------

struct Geometry {
  double wavelength_m = 0.0;
  double distance_m = 0.0;        // sample to detector
  double detector_pixel_m = 0.0;
  std::size_t window = 0;         // square crop side in pixels
  double sample_pixel_m = 0.0;    // derived
};

/// Far-field pixel size at the sample plane: wavelength * distance / (window * detector_pixel).
double sample_pixel_size(double wavelength_m, double distance_m, std::size_t window,
                         double detector_pixel_m);

/// Validates inputs (positive lengths, even window >= 8) and fills sample_pixel_m.
Geometry make_geometry(double wavelength_m, double distance_m, double detector_pixel_m,
                       std::size_t window);

// --- propagation ----------------------------------------------------------

enum class Direction { Forward, Backward };

/// Centered unitary 2D DFT (DC at the center for even sides). Backward is the
/// exact inverse. Constant Fraunhofer phase prefactors are omitted.
ComplexField2D propagate(const ComplexField2D& field, Direction direction);
/// As above, additionally checking the side against the geometry window.
ComplexField2D propagate(const ComplexField2D& field, Direction direction,
                         const Geometry& geometry);
void propagate_inplace(ComplexField2D& field, Direction direction);

// --- crop / paste ---------------------------------------------------------

struct CropBox {
  std::ptrdiff_t row = 0;
  std::ptrdiff_t col = 0;
  std::size_t side = 0;

  friend bool operator==(const CropBox&, const CropBox&) = default;
};

bool box_inside(const ComplexField2D& canvas, const CropBox& box) noexcept;

ComplexField2D crop(const ComplexField2D& canvas, const CropBox& box);
ComplexField2D paste_add(const ComplexField2D& canvas, const CropBox& box,
                         const ComplexField2D& delta);
void paste_add_inplace(ComplexField2D& canvas, const CropBox& box, const ComplexField2D& delta);
/// Overwrites the box contents with `window`.
void paste_inplace(ComplexField2D& canvas, const CropBox& box, const ComplexField2D& window);

// --- shifts ---------------------------------------------------------------

/// Circular shift by (dy, dx) pixels through a Fourier-domain phase ramp:
/// out(r, c) = in(r - dy, c - dx). Integer shifts reproduce `roll`.
ComplexField2D subpixel_fourier_shift(const ComplexField2D& field, double dx, double dy);

/// Index roll: out(r, c) = in((r - dy) mod rows, (c - dx) mod cols).
ComplexField2D roll(const ComplexField2D& field, std::ptrdiff_t dy, std::ptrdiff_t dx);

}  // namespace ptycho
