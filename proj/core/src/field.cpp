#include "ptycho/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ptycho/error.hpp"
#include "ptycho/fft.hpp"

namespace ptycho {
namespace {

void require_same_shape(const ComplexField2D& a, const ComplexField2D& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::Shape, std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) +
                               "x" + std::to_string(a.cols()) + " vs " +
                               std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
  }
}

void require_inside(const ComplexField2D& canvas, const CropBox& box) {
  if (!box_inside(canvas, box)) {
    fail(ErrorKind::Bounds, "crop box at (" + std::to_string(box.row) + ", " +
                                std::to_string(box.col) + ") side " + std::to_string(box.side) +
                                " exceeds canvas " + std::to_string(canvas.rows()) + "x" +
                                std::to_string(canvas.cols()));
  }
}

// Moves element (r, c) to ((r + sr) mod rows, (c + sc) mod cols).
ComplexField2D circular_move(const ComplexField2D& in, std::size_t sr, std::size_t sc) {
  ComplexField2D out(in.rows(), in.cols());
  const std::size_t rows = in.rows();
  const std::size_t cols = in.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t rr = (r + sr) % rows;
    for (std::size_t c = 0; c < cols; ++c) out(rr, (c + sc) % cols) = in(r, c);
  }
  return out;
}

}  // namespace

ComplexField2D::ComplexField2D(std::size_t rows, std::size_t cols, Complex fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

ComplexField2D ComplexField2D::from_values(std::size_t rows, std::size_t cols,
                                           std::vector<Complex> values) {
  if (values.size() != rows * cols) {
    fail(ErrorKind::Shape, "field data length " + std::to_string(values.size()) +
                               " does not match " + std::to_string(rows) + "x" +
                               std::to_string(cols));
  }
  ComplexField2D f;
  f.rows_ = rows;
  f.cols_ = cols;
  f.data_ = std::move(values);
  return f;
}

Complex inner_product(const ComplexField2D& a, const ComplexField2D& b) {
  require_same_shape(a, b, "inner_product");
  Complex acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double squared_norm(const ComplexField2D& field) {
  double acc = 0.0;
  for (const auto& v : field) acc += std::norm(v);
  return acc;
}

bool all_finite(const ComplexField2D& field) noexcept {
  return std::all_of(field.begin(), field.end(), [](const Complex& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double max_abs_diff(const ComplexField2D& a, const ComplexField2D& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ComplexField2D multiply(const ComplexField2D& a, const ComplexField2D& b) {
  require_same_shape(a, b, "multiply");
  ComplexField2D out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

ComplexField2D scaled(const ComplexField2D& field, Complex factor) {
  ComplexField2D out = field;
  for (auto& v : out) v *= factor;
  return out;
}

RealImage intensity(const ComplexField2D& field) {
  RealImage out(field.rows(), field.cols());
  for (std::size_t i = 0; i < field.size(); ++i) out.values[i] = std::norm(field[i]);
  return out;
}

ComplexField2D to_complex(const RealImage& image) {
  ComplexField2D out(image.rows, image.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = image.values[i];
  return out;
}

double sample_pixel_size(double wavelength_m, double distance_m, std::size_t window,
                         double detector_pixel_m) {
  if (!(wavelength_m > 0.0) || !(distance_m > 0.0) || !(detector_pixel_m > 0.0) || window == 0) {
    fail(ErrorKind::InvalidGeometry, "wavelength, distance, window and detector pixel must be positive");
  }
  return wavelength_m * distance_m / (static_cast<double>(window) * detector_pixel_m);
}

Geometry make_geometry(double wavelength_m, double distance_m, double detector_pixel_m,
                       std::size_t window) {
  if (window < 8 || window % 2 != 0) {
    fail(ErrorKind::InvalidGeometry,
         "window must be even and at least 8 pixels, got " + std::to_string(window));
  }
  Geometry g;
  g.wavelength_m = wavelength_m;
  g.distance_m = distance_m;
  g.detector_pixel_m = detector_pixel_m;
  g.window = window;
  g.sample_pixel_m = sample_pixel_size(wavelength_m, distance_m, window, detector_pixel_m);
  return g;
}

void propagate_inplace(ComplexField2D& field, Direction direction) {
  if (!field.is_square() || field.empty()) {
    fail(ErrorKind::Shape, "propagate requires a non-empty square field, got " +
                               std::to_string(field.rows()) + "x" + std::to_string(field.cols()));
  }
  const std::size_t n = field.rows();
  // ifftshift, transform, fftshift.
  field = circular_move(field, n - n / 2, n - n / 2);
  const double side = static_cast<double>(n);
  if (direction == Direction::Forward) {
    fft::forward_inplace(field);
    for (auto& v : field) v /= side;
  } else {
    fft::backward_inplace(field);
    for (auto& v : field) v *= side;
  }
  field = circular_move(field, n / 2, n / 2);
}

ComplexField2D propagate(const ComplexField2D& field, Direction direction) {
  ComplexField2D out = field;
  propagate_inplace(out, direction);
  return out;
}

ComplexField2D propagate(const ComplexField2D& field, Direction direction,
                         const Geometry& geometry) {
  if (field.rows() != geometry.window || field.cols() != geometry.window) {
    fail(ErrorKind::Shape, "field side " + std::to_string(field.rows()) +
                               " does not match geometry window " +
                               std::to_string(geometry.window));
  }
  return propagate(field, direction);
}

bool box_inside(const ComplexField2D& canvas, const CropBox& box) noexcept {
  if (box.row < 0 || box.col < 0) return false;
  return static_cast<std::size_t>(box.row) + box.side <= canvas.rows() &&
         static_cast<std::size_t>(box.col) + box.side <= canvas.cols();
}

ComplexField2D crop(const ComplexField2D& canvas, const CropBox& box) {
  require_inside(canvas, box);
  ComplexField2D out(box.side, box.side);
  const auto r0 = static_cast<std::size_t>(box.row);
  const auto c0 = static_cast<std::size_t>(box.col);
  for (std::size_t r = 0; r < box.side; ++r) {
    const Complex* src = canvas.data() + (r0 + r) * canvas.cols() + c0;
    std::copy(src, src + box.side, out.data() + r * box.side);
  }
  return out;
}

void paste_add_inplace(ComplexField2D& canvas, const CropBox& box, const ComplexField2D& delta) {
  require_inside(canvas, box);
  if (delta.rows() != box.side || delta.cols() != box.side) {
    fail(ErrorKind::Shape, "paste delta does not match crop box side");
  }
  const auto r0 = static_cast<std::size_t>(box.row);
  const auto c0 = static_cast<std::size_t>(box.col);
  for (std::size_t r = 0; r < box.side; ++r)
    for (std::size_t c = 0; c < box.side; ++c) canvas(r0 + r, c0 + c) += delta(r, c);
}

ComplexField2D paste_add(const ComplexField2D& canvas, const CropBox& box,
                         const ComplexField2D& delta) {
  ComplexField2D out = canvas;
  paste_add_inplace(out, box, delta);
  return out;
}

void paste_inplace(ComplexField2D& canvas, const CropBox& box, const ComplexField2D& window) {
  require_inside(canvas, box);
  if (window.rows() != box.side || window.cols() != box.side) {
    fail(ErrorKind::Shape, "pasted window does not match crop box side");
  }
  const auto r0 = static_cast<std::size_t>(box.row);
  const auto c0 = static_cast<std::size_t>(box.col);
  for (std::size_t r = 0; r < box.side; ++r) {
    std::copy(window.data() + r * box.side, window.data() + (r + 1) * box.side,
              canvas.data() + (r0 + r) * canvas.cols() + c0);
  }
}

ComplexField2D subpixel_fourier_shift(const ComplexField2D& field, double dx, double dy) {
  if (field.empty()) fail(ErrorKind::Shape, "cannot shift an empty field");
  ComplexField2D spectrum = fft::forward(field);
  const std::size_t rows = field.rows();
  const std::size_t cols = field.cols();
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Complex> col_ramp(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const double phase = -two_pi * fft::signed_frequency(c, cols) * dx / static_cast<double>(cols);
    col_ramp[c] = std::polar(1.0, phase);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double phase = -two_pi * fft::signed_frequency(r, rows) * dy / static_cast<double>(rows);
    const Complex row_ramp = std::polar(1.0, phase);
    for (std::size_t c = 0; c < cols; ++c) spectrum(r, c) *= row_ramp * col_ramp[c];
  }
  fft::backward_inplace(spectrum);
  return spectrum;
}

ComplexField2D roll(const ComplexField2D& field, std::ptrdiff_t dy, std::ptrdiff_t dx) {
  const auto rows = static_cast<std::ptrdiff_t>(field.rows());
  const auto cols = static_cast<std::ptrdiff_t>(field.cols());
  if (rows == 0 || cols == 0) return field;
  const auto sr = static_cast<std::size_t>(((dy % rows) + rows) % rows);
  const auto sc = static_cast<std::size_t>(((dx % cols) + cols) % cols);
  return circular_move(field, sr, sc);
}

}  // namespace ptycho
