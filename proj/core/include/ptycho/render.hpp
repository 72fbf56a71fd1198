#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ptycho/field.hpp"

namespace ptycho {

enum class RenderKind { Magnitude, Phase };

/// Linear mapping used for a render: value = offset + scale * gray / 65535.
struct RenderScaling {
  RenderKind kind = RenderKind::Magnitude;
  double offset = 0.0;
  double scale = 0.0;
};

/// Writes a 16-bit grayscale PNG and `<path>.json` holding the scaling.
/// Magnitude is min-max scaled; phase maps (-pi, pi] linearly.
RenderScaling render(const ComplexField2D& field, RenderKind kind, const std::filesystem::path& path);

RenderScaling read_render_sidecar(const std::filesystem::path& png_path);

struct Gray16Image {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint16_t> pixels;
};

Gray16Image read_png16(const std::filesystem::path& path);

}  // namespace ptycho
