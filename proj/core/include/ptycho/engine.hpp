#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ptycho/dataset.hpp"
#include "ptycho/field.hpp"
#include "ptycho/posref.hpp"

namespace ptycho {

enum class PositionOrder { Fixed, Shuffled };

/// Multi-mode rPIE settings. beta = gamma = 1 gives multi-mode ePIE.
struct SolverConfig {
  double alpha_object = 1.0;
  double alpha_probe = 1.0;
  double beta = 0.5;              // probe-update regularization, (0, 1]
  double gamma = 0.5;             // object-update regularization, (0, 1]
  std::size_t mode_count = 1;
  std::size_t iterations = 100;
  PositionOrder order = PositionOrder::Shuffled;
  std::uint64_t order_seed = 0;
  double epsilon_div = 1e-12;     // relative to the denominator maximum
  std::size_t probe_update_start = 0;   // first iteration that updates the probe
  std::size_t orthogonalize_every = 0;  // 0 disables probe-mode Gram-Schmidt
  std::size_t canvas_padding = 0;       // extra pixels around the nominal scan
  std::optional<PosRefConfig> posref;
};

void validate(const SolverConfig& config);

struct ReconState {
  ComplexField2D object;                // canvas; (0, 0) sits at `origin_*` in scan coordinates
  std::vector<ComplexField2D> probes;
  std::vector<Position> positions;      // working copy, scan coordinates
  std::ptrdiff_t origin_row = 0;
  std::ptrdiff_t origin_col = 0;
  AdamBuffers adam;
  std::vector<double> error_trace;
  std::vector<std::uint8_t> low_confidence;  // per position, set by posref
  std::size_t iteration = 0;

  /// Canvas-frame crop box for scan position `p`.
  CropBox box_for(const Position& p) const;
  PositionBounds position_bounds() const;
};

struct MagnitudeCorrection {
  std::vector<ComplexField2D> exit_waves;   // corrected, sample plane
  std::vector<ComplexField2D> detector;     // modeled waves before correction
  RealImage model_intensity;                // sum over modes of |detector|^2
  double guard = 0.0;                       // absolute intensity guard used
};

/// Multi-mode modulus constraint: each detector-plane mode keeps its phase
/// and is rescaled so the mode intensities sum to the measurement wherever
/// the modeled total exceeds epsilon_rel * max.
MagnitudeCorrection magnitude_correct(const std::vector<ComplexField2D>& probes,
                                      const ComplexField2D& object_crop, const RealImage& measured,
                                      double epsilon_rel = 1e-12);

ComplexField2D update_object(const ComplexField2D& object_crop,
                             const std::vector<ComplexField2D>& probes,
                             const std::vector<ComplexField2D>& exit_waves, double alpha,
                             double gamma, double epsilon_rel = 1e-12);

ComplexField2D update_probe(const ComplexField2D& probe, const ComplexField2D& object_crop,
                            const ComplexField2D& exit_wave, double alpha, double beta,
                            double epsilon_rel = 1e-12);

ReconState initialize(const PtychoDataset& dataset, const SolverConfig& config);

/// Visit order for a given iteration; depends only on (count, config, iteration).
std::vector<std::size_t> visit_order(std::size_t count, const SolverConfig& config,
                                     std::size_t iteration);

/// Snapshot handed to a sweep observer after the modulus constraint at one position.
struct PositionVisit {
  std::size_t iteration = 0;
  std::size_t index = 0;
  const RealImage& measured;
  const MagnitudeCorrection& correction;
};

/// Inputs to a position sensor at one visit.
struct SensorInput {
  std::size_t index = 0;
  const ComplexField2D& object_before;
  const ComplexField2D& object_after;
  const RealImage& model_intensity;
  const RealImage& measured;
};

using SweepObserver = std::function<void(const PositionVisit&)>;
using ShiftSensor = std::function<SensedShift(const SensorInput&)>;

struct SweepHooks {
  SweepObserver observer;
  ShiftSensor sensor;  // replaces the configured XCORR sensor when set
};

/// One pass over all positions; appends the normalized intensity error.
void sweep(ReconState& state, const PtychoDataset& dataset, const SolverConfig& config,
           const SweepHooks& hooks = {});

/// Runs `iterations` sweeps; `on_iteration` is called after each.
void run(ReconState& state, const PtychoDataset& dataset, const SolverConfig& config,
         std::size_t iterations, const SweepHooks& hooks = {},
         const std::function<void(const ReconState&)>& on_iteration = {});

/// Gram-Schmidt over probe modes, strongest first; preserves total power.
void orthogonalize_modes(std::vector<ComplexField2D>& probes);

}  // namespace ptycho
