#include <doctest.h>

#include <cmath>

#include "ptycho/error.hpp"
#include "ptycho/field.hpp"
#include "support/random_fields.hpp"

using namespace ptycho;
using ptycho::testing::random_field;

TEST_CASE("sample pixel size") {
  SUBCASE("fixed point: lambda = W * dD^2 / z gives dS = dD") {
    const double z = 0.5;
    const double pitch = 13.5e-6;
    const std::size_t w = 256;
    const double lambda = static_cast<double>(w) * pitch * pitch / z;
    CHECK(sample_pixel_size(lambda, z, w, pitch) == doctest::Approx(pitch).epsilon(1e-14));
  }
  SUBCASE("soft x-ray reference values") {
    // 8.3187e-10 * 0.75 / (1024 * 20e-6), evaluated by hand.
    CHECK(sample_pixel_size(8.3187e-10, 0.75, 1024, 20e-6) == doctest::Approx(3.0464e-8).epsilon(1e-4));
  }
  SUBCASE("homogeneity") {
    const double base = sample_pixel_size(1e-9, 0.4, 128, 10e-6);
    CHECK(sample_pixel_size(1e-9, 0.8, 128, 10e-6) == doctest::Approx(2.0 * base));
    CHECK(sample_pixel_size(3e-9, 0.4, 128, 10e-6) == doctest::Approx(3.0 * base));
    CHECK(sample_pixel_size(1e-9, 0.4, 256, 10e-6) == doctest::Approx(0.5 * base));
    CHECK(sample_pixel_size(1e-9, 0.4, 128, 40e-6) == doctest::Approx(0.25 * base));
  }
  SUBCASE("non-positive inputs") {
    CHECK_THROWS_AS(sample_pixel_size(0.0, 0.4, 128, 10e-6), Error);
    CHECK_THROWS_AS(sample_pixel_size(1e-9, -1.0, 128, 10e-6), Error);
    CHECK_THROWS_AS(sample_pixel_size(1e-9, 0.4, 0, 10e-6), Error);
    try {
      sample_pixel_size(1e-9, 0.4, 128, 0.0);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidGeometry);
    }
  }
  SUBCASE("geometry invariants") {
    const Geometry g = make_geometry(1e-9, 0.5, 20e-6, 64);
    CHECK(g.sample_pixel_m == doctest::Approx(1e-9 * 0.5 / (64 * 20e-6)));
    CHECK_THROWS_AS(make_geometry(1e-9, 0.5, 20e-6, 63), Error);
    CHECK_THROWS_AS(make_geometry(1e-9, 0.5, 20e-6, 6), Error);
  }
}

TEST_CASE("propagate") {
  SUBCASE("centered impulse spreads to magnitude 1/W") {
    const std::size_t w = 32;
    ComplexField2D impulse(w, w);
    impulse(w / 2, w / 2) = 1.0;
    const ComplexField2D out = propagate(impulse, Direction::Forward);
    for (const auto& v : out) CHECK(std::abs(v) == doctest::Approx(1.0 / w).epsilon(1e-12));
  }
  SUBCASE("unitarity and round trip over 100 seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const ComplexField2D f = random_field(16, 16, seed);
      const ComplexField2D fwd = propagate(f, Direction::Forward);
      const double energy = squared_norm(f);
      CHECK(std::abs(squared_norm(fwd) - energy) <= 1e-10 * energy);
      const ComplexField2D back = propagate(fwd, Direction::Backward);
      CHECK(ptycho::testing::relative_diff(back, f) < 1e-10);
    }
  }
  SUBCASE("DC lands at the center") {
    const ComplexField2D ones(16, 16, 1.0);
    const ComplexField2D out = propagate(ones, Direction::Forward);
    CHECK(std::abs(out(8, 8)) == doctest::Approx(16.0));
    CHECK(std::abs(out(0, 0)) < 1e-12);
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(propagate(ComplexField2D(8, 16), Direction::Forward), Error);
    const Geometry g = make_geometry(1e-9, 0.5, 20e-6, 64);
    CHECK_THROWS_AS(propagate(ComplexField2D(32, 32), Direction::Forward, g), Error);
  }
}

TEST_CASE("crop and paste") {
  SUBCASE("all-ones canvas") {
    const ComplexField2D canvas(20, 20, 1.0);
    const ComplexField2D window = crop(canvas, CropBox{3, 5, 8});
    for (const auto& v : window) CHECK(v == Complex(1.0, 0.0));
  }
  SUBCASE("anchor (0,0) reproduces the top-left block") {
    ComplexField2D canvas(12, 12);
    for (std::size_t r = 0; r < 12; ++r)
      for (std::size_t c = 0; c < 12; ++c) canvas(r, c) = Complex(double(r), double(c));
    const ComplexField2D window = crop(canvas, CropBox{0, 0, 4});
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) CHECK(window(r, c) == Complex(double(r), double(c)));
  }
  SUBCASE("adjointness <crop(C), w> = <C, paste0(w)> by direct summation") {
    const ComplexField2D canvas = random_field(8, 8, 11);
    const ComplexField2D w = random_field(4, 4, 12);
    const CropBox box{2, 3, 4};
    const Complex lhs = inner_product(crop(canvas, box), w);
    Complex rhs{};
    for (std::size_t r = 0; r < 8; ++r) {
      for (std::size_t c = 0; c < 8; ++c) {
        Complex embedded{};
        if (r >= 2 && r < 6 && c >= 3 && c < 7) embedded = w(r - 2, c - 3);
        rhs += std::conj(canvas(r, c)) * embedded;
      }
    }
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));
    CHECK(std::abs(inner_product(canvas, paste_add(ComplexField2D(8, 8), box, w)) - rhs) < 1e-12);
  }
  SUBCASE("paste_add") {
    const ComplexField2D canvas = random_field(10, 10, 3);
    const CropBox box{1, 2, 4};
    CHECK(paste_add(canvas, box, ComplexField2D(4, 4)) == canvas);

    const ComplexField2D delta = random_field(4, 4, 4);
    const ComplexField2D after = paste_add(canvas, box, delta);
    const ComplexField2D before_crop = crop(canvas, box);
    const ComplexField2D after_crop = crop(after, box);
    for (std::size_t i = 0; i < delta.size(); ++i) CHECK(after_crop[i] == before_crop[i] + delta[i]);
    for (std::size_t r = 0; r < 10; ++r)
      for (std::size_t c = 0; c < 10; ++c)
        if (r < 1 || r >= 5 || c < 2 || c >= 6) CHECK(after(r, c) == canvas(r, c));

    const ComplexField2D d2 = random_field(4, 4, 5);
    const CropBox other{6, 6, 4};
    CHECK(paste_add(paste_add(canvas, box, delta), other, d2) ==
          paste_add(paste_add(canvas, other, d2), box, delta));
  }
  SUBCASE("bounds errors") {
    const ComplexField2D canvas(8, 8);
    CHECK_THROWS_AS(crop(canvas, CropBox{5, 0, 4}), Error);
    CHECK_THROWS_AS(crop(canvas, CropBox{-1, 0, 4}), Error);
    CHECK_THROWS_AS(paste_add(canvas, CropBox{0, 6, 4}, ComplexField2D(4, 4)), Error);
    try {
      crop(canvas, CropBox{0, 5, 4});
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Bounds);
    }
  }
}

TEST_CASE("subpixel fourier shift") {
  const ComplexField2D f = random_field(16, 16, 21);
  SUBCASE("zero shift is identity") {
    CHECK(max_abs_diff(subpixel_fourier_shift(f, 0.0, 0.0), f) < 1e-12);
  }
  SUBCASE("integer shift matches index roll") {
    // (dy, dx) = (3, -2)
    const ComplexField2D shifted = subpixel_fourier_shift(f, -2.0, 3.0);
    ComplexField2D rolled(16, 16);
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c) rolled((r + 3) % 16, (c + 16 - 2) % 16) = f(r, c);
    CHECK(max_abs_diff(shifted, rolled) < 1e-10);
    CHECK(max_abs_diff(roll(f, 3, -2), rolled) == 0.0);
  }
  SUBCASE("group property") {
    const ComplexField2D half_twice = subpixel_fourier_shift(subpixel_fourier_shift(f, 0.5, 0.0), 0.5, 0.0);
    CHECK(max_abs_diff(half_twice, subpixel_fourier_shift(f, 1.0, 0.0)) < 1e-10);
  }
  SUBCASE("results stay finite") {
    CHECK(all_finite(subpixel_fourier_shift(f, 0.37, -1.21)));
  }
}
