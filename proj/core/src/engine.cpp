#include "ptycho/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ptycho/error.hpp"
#include "ptycho/simulator.hpp"

namespace ptycho {
namespace {

constexpr double kInitialMinorModePower = 0.01;

void require_window(const ComplexField2D& field, std::size_t side, const char* what) {
  if (field.rows() != side || field.cols() != side) {
    fail(ErrorKind::Shape, std::string(what) + " does not match the window size");
  }
}

RealImage summed_probe_power(const std::vector<ComplexField2D>& probes) {
  RealImage power(probes.front().rows(), probes.front().cols());
  for (const auto& p : probes)
    for (std::size_t i = 0; i < p.size(); ++i) power.values[i] += std::norm(p[i]);
  return power;
}

double max_value(const std::vector<double>& values) {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

}  // namespace

void validate(const SolverConfig& config) {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(config.alpha_object) || !in_unit(config.alpha_probe)) {
    fail(ErrorKind::Parameter, "update rates alpha_object and alpha_probe must lie in [0, 1]");
  }
  if (!(config.beta > 0.0 && config.beta <= 1.0) || !(config.gamma > 0.0 && config.gamma <= 1.0)) {
    fail(ErrorKind::Parameter, "regularization beta and gamma must lie in (0, 1]");
  }
  if (config.mode_count == 0 || config.mode_count > kMaxProbeModes) {
    fail(ErrorKind::Parameter, "mode_count must lie in [1, 8]");
  }
  if (!(config.epsilon_div > 0.0)) fail(ErrorKind::Parameter, "epsilon_div must be positive");
  if (config.posref) validate(*config.posref);
}

CropBox ReconState::box_for(const Position& p) const {
  const std::size_t side = probes.empty() ? 0 : probes.front().rows();
  CropBox box = crop_box_at(p, side);
  box.row -= origin_row;
  box.col -= origin_col;
  return box;
}

PositionBounds ReconState::position_bounds() const {
  const std::size_t side = probes.empty() ? 0 : probes.front().rows();
  PositionBounds b;
  b.min_x = static_cast<double>(origin_col);
  b.min_y = static_cast<double>(origin_row);
  b.max_x = static_cast<double>(origin_col) + static_cast<double>(object.cols() - side);
  b.max_y = static_cast<double>(origin_row) + static_cast<double>(object.rows() - side);
  return b;
}

MagnitudeCorrection magnitude_correct(const std::vector<ComplexField2D>& probes,
                                      const ComplexField2D& object_crop, const RealImage& measured,
                                      double epsilon_rel) {
  if (probes.empty()) fail(ErrorKind::Parameter, "magnitude_correct needs at least one probe mode");
  const std::size_t side = object_crop.rows();
  require_window(object_crop, side, "object crop");
  for (const auto& p : probes) require_window(p, side, "probe mode");
  if (measured.rows != side || measured.cols != side) {
    fail(ErrorKind::Shape, "diffraction pattern does not match the window size");
  }
  for (double v : measured.values) {
    if (v < 0.0 || !std::isfinite(v)) fail(ErrorKind::Data, "diffraction pattern has negative or non-finite entries");
  }

  MagnitudeCorrection out;
  out.detector.reserve(probes.size());
  out.model_intensity = RealImage(side, side);
  for (const auto& p : probes) {
    ComplexField2D wave = multiply(p, object_crop);
    propagate_inplace(wave, Direction::Forward);
    for (std::size_t i = 0; i < wave.size(); ++i) out.model_intensity.values[i] += std::norm(wave[i]);
    out.detector.push_back(std::move(wave));
  }

  out.guard = epsilon_rel * max_value(out.model_intensity.values);
  std::vector<double> scale(side * side);
  for (std::size_t i = 0; i < scale.size(); ++i) {
    const double model = out.model_intensity.values[i];
    if (model > out.guard) {
      scale[i] = std::sqrt(measured.values[i]) / std::sqrt(model);
    } else {
      const double floor = model + out.guard;
      scale[i] = floor > 0.0 ? std::sqrt(measured.values[i]) / std::sqrt(floor) : 0.0;
    }
  }

  out.exit_waves.reserve(probes.size());
  for (const auto& wave : out.detector) {
    ComplexField2D corrected(side, side);
    for (std::size_t i = 0; i < wave.size(); ++i) corrected[i] = scale[i] * wave[i];
    propagate_inplace(corrected, Direction::Backward);
    out.exit_waves.push_back(std::move(corrected));
  }
  return out;
}

ComplexField2D update_object(const ComplexField2D& object_crop,
                             const std::vector<ComplexField2D>& probes,
                             const std::vector<ComplexField2D>& exit_waves, double alpha,
                             double gamma, double epsilon_rel) {
  if (probes.empty() || probes.size() != exit_waves.size()) {
    fail(ErrorKind::Shape, "update_object needs one exit wave per probe mode");
  }
  const std::size_t side = object_crop.rows();
  require_window(object_crop, side, "object crop");
  for (std::size_t p = 0; p < probes.size(); ++p) {
    require_window(probes[p], side, "probe mode");
    require_window(exit_waves[p], side, "exit wave");
  }

  const RealImage power = summed_probe_power(probes);
  const double power_max = max_value(power.values);
  if (!(power_max > 0.0)) fail(ErrorKind::DegenerateInput, "all probe modes are zero");
  const double eps = epsilon_rel * power_max;

  ComplexField2D out = object_crop;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Complex numerator{};
    for (std::size_t p = 0; p < probes.size(); ++p) {
      numerator += (exit_waves[p][i] - probes[p][i] * object_crop[i]) * std::conj(probes[p][i]);
    }
    const double denominator = gamma * power_max + (1.0 - gamma) * power.values[i] + eps;
    out[i] = object_crop[i] + alpha * numerator / denominator;
  }
  return out;
}

ComplexField2D update_probe(const ComplexField2D& probe, const ComplexField2D& object_crop,
                            const ComplexField2D& exit_wave, double alpha, double beta,
                            double epsilon_rel) {
  const std::size_t side = probe.rows();
  require_window(probe, side, "probe mode");
  require_window(object_crop, side, "object crop");
  require_window(exit_wave, side, "exit wave");

  double object_max = 0.0;
  for (const auto& v : object_crop) object_max = std::max(object_max, std::norm(v));
  if (!(object_max > 0.0)) fail(ErrorKind::DegenerateInput, "object crop is identically zero");
  const double eps = epsilon_rel * object_max;

  ComplexField2D out = probe;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Complex numerator = (exit_wave[i] - probe[i] * object_crop[i]) * std::conj(object_crop[i]);
    const double denominator = beta * object_max + (1.0 - beta) * std::norm(object_crop[i]) + eps;
    out[i] = probe[i] + alpha * numerator / denominator;
  }
  return out;
}

void orthogonalize_modes(std::vector<ComplexField2D>& probes) {
  if (probes.size() < 2) return;
  double total = 0.0;
  for (const auto& p : probes) total += squared_norm(p);
  std::stable_sort(probes.begin(), probes.end(), [](const ComplexField2D& a, const ComplexField2D& b) {
    return squared_norm(a) > squared_norm(b);
  });
  for (std::size_t k = 1; k < probes.size(); ++k) {
    for (std::size_t q = 0; q < k; ++q) {
      const double norm_q = squared_norm(probes[q]);
      if (!(norm_q > 0.0)) continue;
      const Complex coeff = inner_product(probes[q], probes[k]) / norm_q;
      for (std::size_t i = 0; i < probes[k].size(); ++i) probes[k][i] -= coeff * probes[q][i];
    }
  }
  double after = 0.0;
  for (const auto& p : probes) after += squared_norm(p);
  if (after > 0.0) {
    const double factor = std::sqrt(total / after);
    for (auto& p : probes)
      for (auto& v : p) v *= factor;
  }
}

ReconState initialize(const PtychoDataset& dataset, const SolverConfig& config) {
  validate(config);
  const std::size_t side = dataset.geometry.window;
  if (dataset.patterns.empty() || dataset.patterns.size() != dataset.positions.size()) {
    fail(ErrorKind::Data, "dataset needs one position per diffraction pattern");
  }

  ReconState state;
  std::ptrdiff_t min_row = 0, max_row = 0, min_col = 0, max_col = 0;
  for (std::size_t j = 0; j < dataset.positions.size(); ++j) {
    const CropBox box = crop_box_at(dataset.positions[j], side);
    if (j == 0) {
      min_row = max_row = box.row;
      min_col = max_col = box.col;
    }
    min_row = std::min(min_row, box.row);
    max_row = std::max(max_row, box.row);
    min_col = std::min(min_col, box.col);
    max_col = std::max(max_col, box.col);
  }
  const auto pad = static_cast<std::ptrdiff_t>(config.canvas_padding);
  state.origin_row = min_row - pad;
  state.origin_col = min_col - pad;
  state.object = ComplexField2D(static_cast<std::size_t>(max_row - min_row + 2 * pad) + side,
                                static_cast<std::size_t>(max_col - min_col + 2 * pad) + side,
                                Complex{1.0, 0.0});

  RealImage mean(side, side);
  for (const auto& pattern : dataset.patterns) {
    if (pattern.rows != side || pattern.cols != side) fail(ErrorKind::Shape, "pattern does not match window");
    for (std::size_t i = 0; i < mean.values.size(); ++i) mean.values[i] += pattern.values[i];
  }
  const double count = static_cast<double>(dataset.patterns.size());
  for (auto& v : mean.values) v = std::sqrt(std::max(v / count, 0.0));
  ComplexField2D first = propagate(to_complex(mean), Direction::Backward);
  const double total_power = squared_norm(first);
  if (!(total_power > 0.0)) fail(ErrorKind::DegenerateInput, "mean diffraction pattern is zero");

  state.probes = polynomial_modes(first, config.mode_count, static_cast<double>(side) / 4.0);
  const double minor = config.mode_count > 1 ? kInitialMinorModePower : 0.0;
  for (std::size_t p = 0; p < state.probes.size(); ++p) {
    const double target = p == 0
        ? total_power * (1.0 - minor * static_cast<double>(config.mode_count - 1))
        : total_power * minor;
    const double norm = squared_norm(state.probes[p]);
    if (norm > 0.0) {
      const double factor = std::sqrt(target / norm);
      for (auto& v : state.probes[p]) v *= factor;
    }
  }

  state.positions = dataset.positions;
  state.adam = AdamBuffers(dataset.positions.size());
  state.low_confidence.assign(dataset.positions.size(), 0);
  return state;
}

std::vector<std::size_t> visit_order(std::size_t count, const SolverConfig& config,
                                     std::size_t iteration) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (config.order == PositionOrder::Shuffled) {
    std::mt19937_64 rng(derive_seed(config.order_seed, iteration));
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

void sweep(ReconState& state, const PtychoDataset& dataset, const SolverConfig& config,
           const SweepHooks& hooks) {
  if (state.probes.size() != config.mode_count) {
    fail(ErrorKind::Parameter, "state carries " + std::to_string(state.probes.size()) +
                                   " probe modes but the config asks for " +
                                   std::to_string(config.mode_count));
  }
  if (state.positions.size() != dataset.patterns.size()) {
    fail(ErrorKind::Data, "state and dataset disagree on the number of positions");
  }
  const bool update_probes = state.iteration >= config.probe_update_start && config.alpha_probe > 0.0;
  const PosRefConfig* posref = config.posref ? &*config.posref : nullptr;
  const bool refine_positions = posref != nullptr && state.iteration >= posref->warmup_iterations;
  const PositionBounds bounds = state.position_bounds();

  double residual = 0.0;
  double measured_total = 0.0;
  for (const std::size_t j : visit_order(dataset.patterns.size(), config, state.iteration)) {
    const RealImage& measured = dataset.patterns[j];
    const CropBox box = state.box_for(state.positions[j]);
    const ComplexField2D object_crop = crop(state.object, box);

    const MagnitudeCorrection correction =
        magnitude_correct(state.probes, object_crop, measured, config.epsilon_div);
    if (hooks.observer) hooks.observer(PositionVisit{state.iteration, j, measured, correction});

    for (std::size_t i = 0; i < measured.values.size(); ++i) {
      const double diff = std::sqrt(correction.model_intensity.values[i]) - std::sqrt(measured.values[i]);
      residual += diff * diff;
      measured_total += measured.values[i];
    }

    // Both updates read the pre-visit probe and object.
    const ComplexField2D updated_crop =
        update_object(object_crop, state.probes, correction.exit_waves, config.alpha_object,
                      config.gamma, config.epsilon_div);
    if (update_probes) {
      for (std::size_t p = 0; p < state.probes.size(); ++p) {
        state.probes[p] = update_probe(state.probes[p], object_crop, correction.exit_waves[p],
                                       config.alpha_probe, config.beta, config.epsilon_div);
      }
    }
    paste_inplace(state.object, box, updated_crop);

    if (refine_positions) {
      SensedShift sensed;
      if (hooks.sensor) {
        sensed = hooks.sensor(SensorInput{j, object_crop, updated_crop, correction.model_intensity, measured});
      } else if (posref->sensor == Sensor::XcorrA) {
        sensed = sense_shift_A(object_crop, updated_crop, posref->kappa);
      } else {
        sensed = sense_shift_B(correction.model_intensity, measured, posref->kappa);
      }
      const Vec2 delta = adam_step(state.adam, j, Vec2{sensed.gx, sensed.gy}, *posref);
      const bool clamped = apply_correction(state.positions, j, delta, bounds);
      state.low_confidence[j] = (sensed.low_confidence || clamped) ? 1 : 0;
    }
  }

  if (config.orthogonalize_every > 0 && (state.iteration + 1) % config.orthogonalize_every == 0) {
    orthogonalize_modes(state.probes);
  }
  state.error_trace.push_back(measured_total > 0.0 ? residual / measured_total : 0.0);
  ++state.iteration;
}

void run(ReconState& state, const PtychoDataset& dataset, const SolverConfig& config,
         std::size_t iterations, const SweepHooks& hooks,
         const std::function<void(const ReconState&)>& on_iteration) {
  validate(config);
  for (std::size_t k = 0; k < iterations; ++k) {
    sweep(state, dataset, config, hooks);
    if (on_iteration) on_iteration(state);
  }
}

}  // namespace ptycho
