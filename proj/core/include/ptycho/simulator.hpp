#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ptycho/dataset.hpp"
#include "ptycho/field.hpp"

namespace ptycho {

struct ScanSpec {
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  double step = 0.0;              // pixels
  double jitter_amplitude = 0.0;  // pixels, uniform in [-a, a] per axis
  std::uint64_t seed = 0;
  std::size_t window = 0;
  /// Distance of the grid origin from the canvas edge; negative means
  /// ceil(jitter_amplitude) + 1.
  double margin = -1.0;
};

struct ScanPlan {
  std::vector<Position> nominal;
  std::vector<Position> true_positions;
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  double step = 0.0;
  double jitter_amplitude = 0.0;
  std::uint64_t seed = 0;
  double offset = 0.0;           // canvas offset added to the raster grid
  std::size_t canvas_rows = 0;   // smallest canvas containing every crop box
  std::size_t canvas_cols = 0;

  friend bool operator==(const ScanPlan&, const ScanPlan&) = default;
};

/// Raster grid (row-major, index = row * cols + col) with seeded uniform jitter.
ScanPlan make_scan(const ScanSpec& spec);

/// Linear overlap of neighbouring illuminations along one axis.
double overlap_fraction(double step, std::size_t window);

enum class ProbeBase { Disk, Gaussian, FromFile };

struct ProbeSpec {
  std::size_t mode_count = 1;
  std::vector<double> mode_powers{1.0};
  ProbeBase base = ProbeBase::Disk;
  double radius = 0.0;          // pixels
  double curvature = 3.0;       // quadratic phase (rad) reached at `radius`
  double total_power = 1.0;     // sum over modes of sum |P|^2
  std::optional<ComplexField2D> custom_base;  // used with ProbeBase::FromFile
};

constexpr std::size_t kMaxProbeModes = 8;

/// Mode 1 is the base profile; higher modes are the base modulated by
/// low-order polynomials and Gram-Schmidt orthogonalized.
std::vector<ComplexField2D> make_probe(const ProbeSpec& spec, const Geometry& geometry);

/// `base` followed by count - 1 copies modulated by u, v, uv, u^2 - v^2, ...
/// (coordinates in units of `length_scale` from the window center), each
/// orthogonalized against all earlier modes. Powers are left unnormalized.
std::vector<ComplexField2D> polynomial_modes(const ComplexField2D& base, std::size_t count,
                                             double length_scale);

enum class ObjectKind { Spokes, Checker, PhaseScreen, Composite };

struct ObjectSpec {
  ObjectKind kind = ObjectKind::Composite;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double min_transmission = 0.6;
  double max_phase = 1.0;       // radians
  double feature_size = 6.0;    // pixels; checker period and phase-screen correlation length
  std::uint64_t seed = 0;
};

ComplexField2D make_object(const ObjectSpec& spec);

enum class NoiseKind { None, Poisson };

struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double photon_budget = 0.0;   // expected photons per pattern
  std::uint64_t seed = 0;
};

/// Forward model: crop at the rounded true position, apply the residual
/// subpixel offset in Fourier space, sum mode intensities in the far field.
/// The returned dataset carries nominal positions; the truth is attached
/// separately.
PtychoDataset synthesize(const ComplexField2D& object, const std::vector<ComplexField2D>& probes,
                         const ScanPlan& plan, const Geometry& geometry,
                         const NoiseModel& noise = {});

/// Object crop seen by the beam at a (possibly fractional) position.
ComplexField2D object_view(const ComplexField2D& object, const Position& position,
                           std::size_t side);

/// Seed for stream `index` derived from a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace ptycho
