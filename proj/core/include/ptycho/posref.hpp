#pragma once

#include <cstdint>
#include <vector>

#include "ptycho/dataset.hpp"
#include "ptycho/field.hpp"

namespace ptycho {

enum class Sensor {
  XcorrA,  // previous vs. updated object crop (complex, raw weighted)
  XcorrB,  // modeled vs. measured diffraction intensity (real, raw weighted)
};

struct PosRefConfig {
  Sensor sensor = Sensor::XcorrA;
  double step_size = 0.5;        // pixels per unit of normalized surrogate gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::size_t warmup_iterations = 10;
  int kappa = 1000;
  double max_correction = 1.0;   // pixels per iteration and axis
};

/// Validates the invariants above; throws a parameter error.
void validate(const PosRefConfig& config);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Per-position Adam moments. Each position owns its own timestep so a
/// visit to one position never touches another's state.
struct AdamBuffers {
  std::vector<Vec2> m;
  std::vector<Vec2> v;
  std::vector<std::uint64_t> t;

  AdamBuffers() = default;
  explicit AdamBuffers(std::size_t positions) : m(positions), v(positions), t(positions, 0) {}
  std::size_t size() const noexcept { return t.size(); }

  friend bool operator==(const AdamBuffers&, const AdamBuffers&) = default;
};

struct SensedShift {
  double gx = 0.0;
  double gy = 0.0;
  bool low_confidence = false;
};

SensedShift sense_shift_A(const ComplexField2D& before, const ComplexField2D& after, int kappa);
SensedShift sense_shift_B(const RealImage& model, const RealImage& measured, int kappa);

/// One Adam update for position j with surrogate gradient g; returns the
/// clipped correction.
Vec2 adam_step(AdamBuffers& buffers, std::size_t j, Vec2 g, const PosRefConfig& config);

/// Allowed range of positions; a position p is legal when its rounded crop
/// box lies on the canvas.
struct PositionBounds {
  double min_x = 0.0;
  double max_x = 0.0;
  double min_y = 0.0;
  double max_y = 0.0;
};

/// Adds `delta` to position j. Returns true when the result had to be
/// clamped back into `bounds` (low confidence).
bool apply_correction(std::vector<Position>& positions, std::size_t j, Vec2 delta,
                      const PositionBounds& bounds);

}  // namespace ptycho
