#pragma once

#include <cstdint>

#include "ptycho/simulator.hpp"

namespace ptycho::testing {

struct SceneSpec {
  std::size_t window = 32;
  std::size_t grid = 4;
  double step = 10.0;
  double jitter = 0.0;
  std::size_t modes = 1;
  std::vector<double> powers{1.0};
  double radius = 10.0;
  std::uint64_t seed = 11;
  NoiseModel noise{};
};

struct Scene {
  ScanPlan plan;
  ComplexField2D object;
  std::vector<ComplexField2D> probes;
  PtychoDataset dataset;
};

inline Scene make_scene(const SceneSpec& s) {
  Scene scene;
  const Geometry g = make_geometry(1e-9, 0.5, 20e-6, s.window);
  ScanSpec scan;
  scan.grid_rows = s.grid;
  scan.grid_cols = s.grid;
  scan.step = s.step;
  scan.jitter_amplitude = s.jitter;
  scan.seed = s.seed;
  scan.window = s.window;
  scene.plan = make_scan(scan);
  ObjectSpec ospec;
  ospec.rows = scene.plan.canvas_rows;
  ospec.cols = scene.plan.canvas_cols;
  ospec.seed = s.seed + 1;
  scene.object = make_object(ospec);
  ProbeSpec pspec;
  pspec.mode_count = s.modes;
  pspec.mode_powers = s.powers;
  pspec.radius = s.radius;
  scene.probes = make_probe(pspec, g);
  scene.dataset = synthesize(scene.object, scene.probes, scene.plan, g, s.noise);
  return scene;
}

}  // namespace ptycho::testing
