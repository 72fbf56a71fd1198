#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ptycho/field.hpp"

namespace ptycho {

/// Scan coordinate of a crop box's top-left corner in sample-plane pixels:
/// x runs along columns, y along rows.
struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline std::ptrdiff_t round_pixel(double v) noexcept {
  return static_cast<std::ptrdiff_t>(std::floor(v + 0.5));
}

inline CropBox crop_box_at(const Position& p, std::size_t side) noexcept {
  return CropBox{round_pixel(p.y), round_pixel(p.x), side};
}

struct GroundTruth {
  std::vector<Position> positions;
  ComplexField2D object;
  std::vector<ComplexField2D> probes;
  std::vector<double> mode_powers;
};

/// Diffraction stack with its scan and geometry; the unit of persistence.
/// `positions` are the nominal (commanded) coordinates a reconstruction sees.
struct PtychoDataset {
  Geometry geometry;
  std::vector<Position> positions;
  std::vector<RealImage> patterns;
  std::optional<GroundTruth> truth;
  std::uint64_t scan_seed = 0;
  std::uint64_t noise_seed = 0;
  std::string created_by;

  std::size_t size() const noexcept { return patterns.size(); }
};

}  // namespace ptycho
