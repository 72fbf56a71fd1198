#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ptycho/error.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/render.hpp"
#include "support/random_fields.hpp"

using namespace ptycho;
namespace fs = std::filesystem;

TEST_CASE("object_error") {
  const ComplexField2D a = ptycho::testing::random_field(16, 16, 1);
  const Mask all(a.size(), 1);
  CHECK(object_error(a, a, all) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(object_error(scaled(a, std::polar(1.0, 0.8)), a, all) < 1e-14);
  // Orthogonal fields differ maximally.
  ComplexField2D b(16, 16), c(16, 16);
  for (std::size_t i = 0; i < 128; ++i) b[i] = 1.0;
  for (std::size_t i = 128; i < 256; ++i) c[i] = 1.0;
  CHECK(object_error(b, c, all) == doctest::Approx(1.0));
  // Masked-out pixels do not count.
  Mask half(a.size(), 0);
  for (std::size_t i = 0; i < 128; ++i) half[i] = 1;
  ComplexField2D corrupted = a;
  for (std::size_t i = 128; i < 256; ++i) corrupted[i] = 0.0;
  CHECK(object_error(corrupted, a, half) < 1e-14);
  CHECK_THROWS_AS(object_error(a, a, Mask(a.size(), 0)), Error);
}

TEST_CASE("position_rmse removes the common offset") {
  const std::vector<Position> truth{{0, 0}, {10, 0}, {0, 10}, {10, 10}};
  std::vector<Position> est = truth;
  for (auto& p : est) {
    p.x += 3.5;
    p.y -= 1.0;
  }
  CHECK(position_rmse(est, truth) < 1e-12);
  est[0].x += 1.0;
  // offsets (1, 0) on one of four points: residuals after mean removal
  const double expect = std::sqrt((0.75 * 0.75 + 3 * 0.25 * 0.25) / 4.0);
  CHECK(position_rmse(est, truth) == doctest::Approx(expect));
}

TEST_CASE("coverage mask") {
  ComplexField2D probe(4, 4, 1.0);
  const Mask m = coverage_mask({probe}, {{2, 3}}, 10, 10, 0, 0);
  std::size_t covered = 0;
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 10; ++c) {
      const bool inside = r >= 3 && r < 7 && c >= 2 && c < 6;
      CHECK(static_cast<bool>(m[r * 10 + c]) == inside);
      covered += m[r * 10 + c];
    }
  CHECK(covered == 16);
}

TEST_CASE("metrics report") {
  MetricsReport r;
  r.intensity_error = {0.5, 0.1};
  validate(r);
  CHECK(to_json(r).find("intensity_error") != std::string::npos);
  r.intensity_error.push_back(-1.0);
  CHECK_THROWS_AS(validate(r), Error);
  r.intensity_error.back() = std::nan("");
  CHECK_THROWS_AS(validate(r), Error);
}

TEST_CASE("render") {
  const fs::path dir = fs::temp_directory_path() / "ptycho_render_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  SUBCASE("constant field renders black") {
    const ComplexField2D f(6, 9, Complex(0.3, 0.4));
    render(f, RenderKind::Magnitude, dir / "c.png");
    const Gray16Image img = read_png16(dir / "c.png");
    CHECK(img.rows == 6);
    CHECK(img.cols == 9);
    for (auto v : img.pixels) CHECK(v == 0);
  }
  SUBCASE("phase ramp is monotone and decodes through the sidecar") {
    ComplexField2D f(4, 32);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 32; ++c) f(r, c) = std::polar(1.0, -3.0 + 6.0 * c / 31.0);
    const RenderScaling s = render(f, RenderKind::Phase, dir / "p.png");
    const RenderScaling back = read_render_sidecar(dir / "p.png");
    CHECK(back.kind == RenderKind::Phase);
    CHECK(std::abs(back.offset - s.offset) < 1e-6);
    CHECK(std::abs(back.scale - s.scale) < 1e-6);
    CHECK(std::abs(back.offset + std::numbers::pi) < 1e-6);
    const Gray16Image img = read_png16(dir / "p.png");
    for (std::size_t c = 1; c < 32; ++c) CHECK(img.pixels[c] > img.pixels[c - 1]);
    for (std::size_t c = 0; c < 32; ++c) {
      const double decoded = back.offset + back.scale * img.pixels[c] / 65535.0;
      CHECK(std::abs(decoded - std::arg(f(0, c))) < 2.0 * back.scale / 65535.0);
    }
  }
  SUBCASE("magnitude min-max") {
    const ComplexField2D f = ptycho::testing::random_field(8, 8, 5);
    const RenderScaling s = render(f, RenderKind::Magnitude, dir / "m.png");
    const Gray16Image img = read_png16(dir / "m.png");
    double lo = 1e300, hi = 0.0;
    for (const auto& v : f) {
      lo = std::min(lo, std::abs(v));
      hi = std::max(hi, std::abs(v));
    }
    CHECK(s.offset == doctest::Approx(lo));
    CHECK(s.scale == doctest::Approx(hi - lo));
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double decoded = s.offset + s.scale * img.pixels[i] / 65535.0;
      CHECK(std::abs(decoded - std::abs(f[i])) <= s.scale / 65535.0);
    }
  }
}
