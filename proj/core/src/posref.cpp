#include "ptycho/posref.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptycho/error.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/registration.hpp"

namespace ptycho {
namespace {

// Fraction of spectral energy outside DC below which an image is treated
// as flat.
constexpr double kFlatThreshold = 1e-12;

bool is_flat(const ComplexField2D& image) {
  const ComplexField2D spectrum = fft::forward(image);
  const double total = squared_norm(spectrum);
  if (!(total > 0.0)) return true;
  return (total - std::norm(spectrum[0])) <= kFlatThreshold * total;
}

SensedShift sense(const ComplexField2D& reference, const ComplexField2D& moving, Weighting weighting,
                  int kappa) {
  if (!reference.same_shape(moving)) fail(ErrorKind::Shape, "sensor inputs differ in shape");
  if (is_flat(reference) || is_flat(moving)) return SensedShift{0.0, 0.0, true};
  const ShiftEstimate shift = register_shift(reference, moving, weighting, kappa);
  return SensedShift{shift.dx, shift.dy, false};
}

}  // namespace

void validate(const PosRefConfig& config) {
  if (!(config.beta1 > 0.0 && config.beta1 < 1.0) || !(config.beta2 > 0.0 && config.beta2 < 1.0)) {
    fail(ErrorKind::Parameter, "Adam beta1 and beta2 must lie in (0, 1)");
  }
  if (!(config.step_size > 0.0)) fail(ErrorKind::Parameter, "posref step_size must be positive");
  if (!(config.eps_adam > 0.0)) fail(ErrorKind::Parameter, "posref eps_adam must be positive");
  if (!(config.max_correction > 0.0)) fail(ErrorKind::Parameter, "posref max_correction must be positive");
  if (config.kappa < 1 || config.kappa > 1000) {
    fail(ErrorKind::Parameter, "posref kappa must lie in [1, 1000]");
  }
}

SensedShift sense_shift_A(const ComplexField2D& before, const ComplexField2D& after, int kappa) {
  return sense(before, after, Weighting::Raw, kappa);
}

SensedShift sense_shift_B(const RealImage& model, const RealImage& measured, int kappa) {
  return sense(to_complex(model), to_complex(measured), Weighting::Raw, kappa);
}

Vec2 adam_step(AdamBuffers& buffers, std::size_t j, Vec2 g, const PosRefConfig& config) {
  if (j >= buffers.size()) fail(ErrorKind::Bounds, "Adam buffer index out of range");
  auto& m = buffers.m[j];
  auto& v = buffers.v[j];
  const auto t = static_cast<double>(++buffers.t[j]);

  m.x = config.beta1 * m.x + (1.0 - config.beta1) * g.x;
  m.y = config.beta1 * m.y + (1.0 - config.beta1) * g.y;
  v.x = config.beta2 * v.x + (1.0 - config.beta2) * g.x * g.x;
  v.y = config.beta2 * v.y + (1.0 - config.beta2) * g.y * g.y;

  const double m_correction = 1.0 - std::pow(config.beta1, t);
  const double v_correction = 1.0 - std::pow(config.beta2, t);
  const auto component = [&](double mc, double vc) {
    const double m_hat = mc / m_correction;
    const double v_hat = vc / v_correction;
    const double step = config.step_size * m_hat / (std::sqrt(v_hat) + config.eps_adam);
    return std::clamp(step, -config.max_correction, config.max_correction);
  };
  return Vec2{component(m.x, v.x), component(m.y, v.y)};
}

bool apply_correction(std::vector<Position>& positions, std::size_t j, Vec2 delta,
                      const PositionBounds& bounds) {
  if (j >= positions.size()) fail(ErrorKind::Bounds, "position index out of range");
  Position& p = positions[j];
  const Position moved{p.x + delta.x, p.y + delta.y};
  p.x = std::clamp(moved.x, bounds.min_x, bounds.max_x);
  p.y = std::clamp(moved.y, bounds.min_y, bounds.max_y);
  return p.x != moved.x || p.y != moved.y;
}

}  // namespace ptycho
