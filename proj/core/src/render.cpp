#include "ptycho/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>

#include <json.hpp>

#include "ptycho/error.hpp"

namespace ptycho {
namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

std::filesystem::path sidecar_path(const fs::path& png) { return fs::path(png.string() + ".json"); }

void write_png16(const fs::path& path, std::size_t rows, std::size_t cols,
                 const std::vector<std::uint16_t>& pixels) {
  FileHandle file(std::fopen(path.string().c_str(), "wb"));
  if (!file) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::Io, "libpng initialization failed");
  }
  // PNG stores 16-bit samples big-endian.
  std::vector<png_byte> row_bytes(cols * 2);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::Io, "libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::uint16_t v = pixels[r * cols + c];
      row_bytes[2 * c] = static_cast<png_byte>(v >> 8);
      row_bytes[2 * c + 1] = static_cast<png_byte>(v & 0xFF);
    }
    png_write_row(png, row_bytes.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RenderScaling render(const ComplexField2D& field, RenderKind kind, const fs::path& path) {
  if (field.empty()) fail(ErrorKind::Shape, "cannot render an empty field");
  std::vector<double> values(field.size());
  RenderScaling scaling;
  scaling.kind = kind;
  if (kind == RenderKind::Magnitude) {
    for (std::size_t i = 0; i < field.size(); ++i) values[i] = std::abs(field[i]);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    scaling.offset = *lo;
    scaling.scale = *hi - *lo;
  } else {
    for (std::size_t i = 0; i < field.size(); ++i) values[i] = std::arg(field[i]);
    scaling.offset = -std::numbers::pi;
    scaling.scale = 2.0 * std::numbers::pi;
  }

  std::vector<std::uint16_t> pixels(values.size(), 0);
  if (scaling.scale > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double t = std::clamp((values[i] - scaling.offset) / scaling.scale, 0.0, 1.0);
      pixels[i] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
    }
  }
  write_png16(path, field.rows(), field.cols(), pixels);

  nlohmann::json sidecar;
  sidecar["kind"] = kind == RenderKind::Magnitude ? "magnitude" : "phase";
  sidecar["offset"] = scaling.offset;
  sidecar["scale"] = scaling.scale;
  sidecar["bit_depth"] = 16;
  sidecar["rows"] = field.rows();
  sidecar["cols"] = field.cols();
  sidecar["mapping"] = "value = offset + scale * gray / 65535";
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write sidecar for '" + path.string() + "'");
  out << sidecar.dump(2) << '\n';
  return scaling;
}

RenderScaling read_render_sidecar(const fs::path& png_path) {
  std::ifstream in(sidecar_path(png_path));
  if (!in) fail(ErrorKind::Io, "missing render sidecar for '" + png_path.string() + "'");
  try {
    const auto doc = nlohmann::json::parse(in);
    RenderScaling scaling;
    scaling.kind = doc.at("kind").get<std::string>() == "phase" ? RenderKind::Phase : RenderKind::Magnitude;
    scaling.offset = doc.at("offset").get<double>();
    scaling.scale = doc.at("scale").get<double>();
    return scaling;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed render sidecar: ") + e.what());
  }
}

Gray16Image read_png16(const fs::path& path) {
  FileHandle file(std::fopen(path.string().c_str(), "rb"));
  if (!file) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Io, "libpng initialization failed");
  }
  Gray16Image image;
  std::vector<png_byte> row_bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Io, "libpng failed reading '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Io, "'" + path.string() + "' is not a 16-bit grayscale PNG");
  }
  image.cols = png_get_image_width(png, info);
  image.rows = png_get_image_height(png, info);
  image.pixels.resize(image.rows * image.cols);
  row_bytes.resize(image.cols * 2);
  for (std::size_t r = 0; r < image.rows; ++r) {
    png_read_row(png, row_bytes.data(), nullptr);
    for (std::size_t c = 0; c < image.cols; ++c) {
      image.pixels[r * image.cols + c] =
          static_cast<std::uint16_t>((row_bytes[2 * c] << 8) | row_bytes[2 * c + 1]);
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

}  // namespace ptycho
