#include "ptycho/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "ptycho/error.hpp"
#include "ptycho/fft.hpp"

namespace ptycho {
namespace {

constexpr double kPowerSumTolerance = 1e-9;

void gram_schmidt_against(ComplexField2D& mode, const std::vector<ComplexField2D>& previous) {
  // Two passes of modified Gram-Schmidt bring residual overlaps to round-off.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& prev : previous) {
      const Complex coeff = inner_product(prev, mode) / squared_norm(prev);
      for (std::size_t i = 0; i < mode.size(); ++i) mode[i] -= coeff * prev[i];
    }
  }
}

ComplexField2D base_profile(const ProbeSpec& spec, std::size_t side) {
  if (spec.base == ProbeBase::FromFile) {
    if (!spec.custom_base) fail(ErrorKind::Parameter, "probe base 'from-file' without a loaded field");
    if (spec.custom_base->rows() != side || spec.custom_base->cols() != side) {
      fail(ErrorKind::Shape, "probe file does not match the window size");
    }
    return *spec.custom_base;
  }
  ComplexField2D base(side, side);
  const double center = static_cast<double>(side) / 2.0;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double dy = static_cast<double>(r) - center;
      const double dx = static_cast<double>(c) - center;
      const double rho = std::hypot(dx, dy);
      const double amplitude = spec.base == ProbeBase::Disk
          ? std::clamp(spec.radius + 0.5 - rho, 0.0, 1.0)
          : std::exp(-(rho * rho) / (spec.radius * spec.radius));
      const double phase = spec.curvature * (rho * rho) / (spec.radius * spec.radius);
      base(r, c) = std::polar(amplitude, phase);
    }
  }
  return base;
}

double polynomial(std::size_t order, double u, double v) {
  switch (order) {
    case 0: return u;
    case 1: return v;
    case 2: return u * v;
    case 3: return u * u - v * v;
    case 4: return u * u + v * v;
    case 5: return u * u * v;
    case 6: return u * v * v;
    default: return u * u * u;
  }
}

double smoothstep_spokes(double theta, int spokes) {
  return 0.5 + 0.5 * std::tanh(4.0 * std::sin(spokes * theta));
}

std::vector<double> smooth_noise(std::size_t rows, std::size_t cols, double length,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexField2D noise(rows, cols);
  for (auto& v : noise) v = normal(rng);
  fft::forward_inplace(noise);
  const double sigma_r = static_cast<double>(rows) / (2.0 * std::numbers::pi * length);
  const double sigma_c = static_cast<double>(cols) / (2.0 * std::numbers::pi * length);
  for (std::size_t r = 0; r < rows; ++r) {
    const double fr = fft::signed_frequency(r, rows) / sigma_r;
    for (std::size_t c = 0; c < cols; ++c) {
      const double fc = fft::signed_frequency(c, cols) / sigma_c;
      noise(r, c) *= std::exp(-0.5 * (fr * fr + fc * fc));
    }
  }
  fft::backward_inplace(noise);
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = noise[i].real();
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double low = *lo;
  const double span = std::max(*hi - low, 1e-300);
  for (auto& v : out) v = 2.0 * (v - low) / span - 1.0;  // [-1, 1]
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double overlap_fraction(double step, std::size_t window) {
  return 1.0 - step / static_cast<double>(window);
}

ScanPlan make_scan(const ScanSpec& spec) {
  if (spec.grid_rows == 0 || spec.grid_cols == 0) fail(ErrorKind::Plan, "scan grid must be non-empty");
  if (spec.window == 0) fail(ErrorKind::Plan, "scan window must be positive");
  if (!(spec.step > 0.0) || spec.step >= static_cast<double>(spec.window)) {
    fail(ErrorKind::Plan, "scan step must lie in (0, window) for the illuminations to overlap");
  }
  if (spec.jitter_amplitude < 0.0) fail(ErrorKind::Plan, "jitter amplitude must be non-negative");
  const double margin = spec.margin < 0.0 ? std::ceil(spec.jitter_amplitude) + 1.0 : spec.margin;
  if (margin < spec.jitter_amplitude + 0.5) {
    fail(ErrorKind::Plan, "margin " + std::to_string(margin) +
                              " leaves jittered crop boxes outside the canvas");
  }

  ScanPlan plan;
  plan.grid_rows = spec.grid_rows;
  plan.grid_cols = spec.grid_cols;
  plan.step = spec.step;
  plan.jitter_amplitude = spec.jitter_amplitude;
  plan.seed = spec.seed;
  plan.offset = margin;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-spec.jitter_amplitude, spec.jitter_amplitude);
  const std::size_t count = spec.grid_rows * spec.grid_cols;
  plan.nominal.reserve(count);
  plan.true_positions.reserve(count);
  for (std::size_t r = 0; r < spec.grid_rows; ++r) {
    for (std::size_t c = 0; c < spec.grid_cols; ++c) {
      const Position nominal{margin + spec.step * static_cast<double>(c),
                             margin + spec.step * static_cast<double>(r)};
      Position truth = nominal;
      if (spec.jitter_amplitude > 0.0) {
        truth.x += jitter(rng);
        truth.y += jitter(rng);
      }
      plan.nominal.push_back(nominal);
      plan.true_positions.push_back(truth);
    }
  }

  const auto extent = [&](std::size_t cells) {
    return static_cast<std::size_t>(
               std::ceil(2.0 * margin + spec.step * static_cast<double>(cells - 1))) +
           spec.window;
  };
  plan.canvas_rows = extent(spec.grid_rows);
  plan.canvas_cols = extent(spec.grid_cols);

  const ComplexField2D probe_canvas(plan.canvas_rows, plan.canvas_cols);
  for (const auto* set : {&plan.nominal, &plan.true_positions}) {
    for (const auto& p : *set) {
      if (!box_inside(probe_canvas, crop_box_at(p, spec.window))) {
        fail(ErrorKind::Plan, "crop box would exit the object canvas");
      }
    }
  }
  return plan;
}

std::vector<ComplexField2D> make_probe(const ProbeSpec& spec, const Geometry& geometry) {
  const std::size_t side = geometry.window;
  if (spec.mode_count == 0) fail(ErrorKind::Parameter, "probe needs at least one mode");
  if (spec.mode_count > kMaxProbeModes) {
    fail(ErrorKind::Unsupported, "at most 8 probe modes are supported, got " +
                                     std::to_string(spec.mode_count));
  }
  if (spec.mode_powers.size() != spec.mode_count) {
    fail(ErrorKind::Parameter, "mode_powers must list one fraction per mode");
  }
  if (std::any_of(spec.mode_powers.begin(), spec.mode_powers.end(),
                  [](double p) { return !(p > 0.0); })) {
    fail(ErrorKind::Parameter, "mode powers must be positive");
  }
  const double power_sum = std::accumulate(spec.mode_powers.begin(), spec.mode_powers.end(), 0.0);
  if (std::abs(power_sum - 1.0) > kPowerSumTolerance) {
    fail(ErrorKind::Parameter, "mode powers must sum to 1");
  }
  if (spec.base != ProbeBase::FromFile &&
      (!(spec.radius > 0.0) || spec.radius >= static_cast<double>(side) / 2.0)) {
    fail(ErrorKind::Parameter, "probe radius must lie in (0, window / 2)");
  }
  if (!(spec.total_power > 0.0)) fail(ErrorKind::Parameter, "probe total power must be positive");

  const ComplexField2D base = base_profile(spec, side);
  if (!(squared_norm(base) > 0.0)) fail(ErrorKind::DegenerateInput, "probe base is identically zero");

  const double scale = spec.base == ProbeBase::FromFile ? static_cast<double>(side) / 4.0 : spec.radius;
  std::vector<ComplexField2D> modes = polynomial_modes(base, spec.mode_count, scale);
  for (std::size_t p = 0; p < modes.size(); ++p) {
    const double target = spec.mode_powers[p] * spec.total_power;
    const double factor = std::sqrt(target / squared_norm(modes[p]));
    for (auto& v : modes[p]) v *= factor;
  }
  return modes;
}

std::vector<ComplexField2D> polynomial_modes(const ComplexField2D& base, std::size_t count,
                                             double length_scale) {
  const std::size_t rows = base.rows();
  const std::size_t cols = base.cols();
  const double cy = static_cast<double>(rows) / 2.0;
  const double cx = static_cast<double>(cols) / 2.0;
  std::vector<ComplexField2D> modes;
  modes.reserve(count);
  modes.push_back(base);
  for (std::size_t p = 1; p < count; ++p) {
    ComplexField2D mode(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const double v = (static_cast<double>(r) - cy) / length_scale;
      for (std::size_t c = 0; c < cols; ++c) {
        const double u = (static_cast<double>(c) - cx) / length_scale;
        mode(r, c) = base(r, c) * polynomial(p - 1, u, v);
      }
    }
    gram_schmidt_against(mode, modes);
    modes.push_back(std::move(mode));
  }
  return modes;
}

ComplexField2D make_object(const ObjectSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0) fail(ErrorKind::Parameter, "object canvas must be non-empty");
  if (!(spec.min_transmission > 0.0) || spec.min_transmission > 1.0) {
    fail(ErrorKind::Parameter, "min_transmission must lie in (0, 1]");
  }
  if (!(spec.feature_size > 0.0)) fail(ErrorKind::Parameter, "feature_size must be positive");

  ComplexField2D object(spec.rows, spec.cols);
  const double cy = static_cast<double>(spec.rows) / 2.0;
  const double cx = static_cast<double>(spec.cols) / 2.0;
  const double contrast = 1.0 - spec.min_transmission;
  std::vector<double> screen;
  if (spec.kind == ObjectKind::PhaseScreen || spec.kind == ObjectKind::Composite) {
    screen = smooth_noise(spec.rows, spec.cols, spec.feature_size, spec.seed);
  }

  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (std::size_t c = 0; c < spec.cols; ++c) {
      const double y = static_cast<double>(r) - cy;
      const double x = static_cast<double>(c) - cx;
      double magnitude = 1.0;
      double phase = 0.0;
      switch (spec.kind) {
        case ObjectKind::Spokes: {
          const double s = smoothstep_spokes(std::atan2(y, x), 18);
          magnitude = spec.min_transmission + contrast * s;
          phase = spec.max_phase * (s - 0.5);
          break;
        }
        case ObjectKind::Checker: {
          const auto cell = [&](double t) {
            return static_cast<long>(std::floor(t / spec.feature_size));
          };
          const bool on = ((cell(static_cast<double>(r)) + cell(static_cast<double>(c))) & 1) == 0;
          magnitude = on ? 1.0 : spec.min_transmission;
          phase = on ? spec.max_phase * 0.5 : -spec.max_phase * 0.5;
          break;
        }
        case ObjectKind::PhaseScreen:
          phase = spec.max_phase * screen[r * spec.cols + c];
          break;
        case ObjectKind::Composite: {
          const double s = smoothstep_spokes(std::atan2(y, x), 18);
          magnitude = spec.min_transmission + contrast * s;
          phase = spec.max_phase * screen[r * spec.cols + c];
          break;
        }
      }
      object(r, c) = std::polar(magnitude, phase);
    }
  }
  return object;
}

ComplexField2D object_view(const ComplexField2D& object, const Position& position,
                           std::size_t side) {
  const CropBox box = crop_box_at(position, side);
  ComplexField2D view = crop(object, box);
  const double fx = position.x - static_cast<double>(box.col);
  const double fy = position.y - static_cast<double>(box.row);
  if (fx != 0.0 || fy != 0.0) view = subpixel_fourier_shift(view, -fx, -fy);
  return view;
}

PtychoDataset synthesize(const ComplexField2D& object, const std::vector<ComplexField2D>& probes,
                         const ScanPlan& plan, const Geometry& geometry, const NoiseModel& noise) {
  const std::size_t side = geometry.window;
  if (probes.empty()) fail(ErrorKind::Parameter, "synthesize needs at least one probe mode");
  for (const auto& p : probes) {
    if (p.rows() != side || p.cols() != side) fail(ErrorKind::Shape, "probe mode does not match window");
  }
  if (noise.kind == NoiseKind::Poisson && !(noise.photon_budget > 0.0)) {
    fail(ErrorKind::Parameter, "Poisson noise needs a positive photon budget");
  }
  for (const auto& p : plan.true_positions) {
    if (!box_inside(object, crop_box_at(p, side))) {
      fail(ErrorKind::Bounds, "object canvas does not cover every true crop box");
    }
  }

  PtychoDataset ds;
  ds.geometry = geometry;
  ds.positions = plan.nominal;
  ds.scan_seed = plan.seed;
  ds.noise_seed = noise.seed;
  ds.patterns.reserve(plan.true_positions.size());

  for (std::size_t j = 0; j < plan.true_positions.size(); ++j) {
    const ComplexField2D view = object_view(object, plan.true_positions[j], side);
    RealImage pattern(side, side);
    for (const auto& probe : probes) {
      ComplexField2D wave = multiply(probe, view);
      propagate_inplace(wave, Direction::Forward);
      for (std::size_t i = 0; i < wave.size(); ++i) pattern.values[i] += std::norm(wave[i]);
    }
    if (noise.kind == NoiseKind::Poisson) {
      const double total = std::accumulate(pattern.values.begin(), pattern.values.end(), 0.0);
      if (total > 0.0) {
        const double scale = noise.photon_budget / total;
        std::mt19937_64 rng(derive_seed(noise.seed, j));
        for (auto& v : pattern.values) {
          const double mean = v * scale;
          double counts = 0.0;
          if (mean > 0.0) {
            std::poisson_distribution<long long> draw(mean);
            counts = static_cast<double>(draw(rng));
          }
          v = counts / scale;
        }
      }
    }
    ds.patterns.push_back(std::move(pattern));
  }

  GroundTruth truth;
  truth.positions = plan.true_positions;
  truth.object = object;
  truth.probes = probes;
  double total_power = 0.0;
  for (const auto& p : probes) total_power += squared_norm(p);
  for (const auto& p : probes) truth.mode_powers.push_back(squared_norm(p) / total_power);
  ds.truth = std::move(truth);
  return ds;
}

}  // namespace ptycho
