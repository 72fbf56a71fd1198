#include "ptycho/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ptycho/error.hpp"

namespace ptycho {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Unknown keys are rejected so typos do not silently fall back to defaults.
void reject_unknown(const json& doc, std::initializer_list<const char*> known, const std::string& where) {
  if (!doc.is_object()) fail(ErrorKind::Config, where + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) fail(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& doc, const char* key, T& target, const std::string& where) {
  if (!doc.contains(key)) return;
  try {
    target = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, where + "." + key + ": " + e.what());
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

ProbeBase probe_base_from(const std::string& s) {
  if (s == "disk") return ProbeBase::Disk;
  if (s == "gaussian") return ProbeBase::Gaussian;
  if (s == "from-file") return ProbeBase::FromFile;
  fail(ErrorKind::Config, "probe.base must be disk, gaussian or from-file, got '" + s + "'");
}

const char* to_string(ProbeBase b) {
  switch (b) {
    case ProbeBase::Disk: return "disk";
    case ProbeBase::Gaussian: return "gaussian";
    case ProbeBase::FromFile: return "from-file";
  }
  return "disk";
}

ObjectKind object_kind_from(const std::string& s) {
  if (s == "spokes") return ObjectKind::Spokes;
  if (s == "checker") return ObjectKind::Checker;
  if (s == "phase-screen") return ObjectKind::PhaseScreen;
  if (s == "composite") return ObjectKind::Composite;
  fail(ErrorKind::Config, "object.kind must be spokes, checker, phase-screen or composite, got '" + s + "'");
}

const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::Spokes: return "spokes";
    case ObjectKind::Checker: return "checker";
    case ObjectKind::PhaseScreen: return "phase-screen";
    case ObjectKind::Composite: return "composite";
  }
  return "composite";
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("malformed JSON config: ") + e.what());
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json posref_to_json(const PosRefConfig& p, bool enabled) {
  return {{"enabled", enabled},
          {"sensor", p.sensor == Sensor::XcorrA ? "XCORR_A" : "XCORR_B"},
          {"step_size", p.step_size},
          {"beta1", p.beta1},
          {"beta2", p.beta2},
          {"eps_adam", p.eps_adam},
          {"warmup_iterations", p.warmup_iterations},
          {"kappa", p.kappa},
          {"max_correction", p.max_correction}};
}

PosRefConfig posref_from_json(const json& doc) {
  const std::string where = "solver.posref";
  reject_unknown(doc, {"enabled", "sensor", "step_size", "beta1", "beta2", "eps_adam", "warmup_iterations",
                       "kappa", "max_correction"},
                 where);
  PosRefConfig p;
  std::string sensor = "XCORR_A";
  read(doc, "sensor", sensor, where);
  if (sensor == "XCORR_A") {
    p.sensor = Sensor::XcorrA;
  } else if (sensor == "XCORR_B") {
    p.sensor = Sensor::XcorrB;
  } else {
    fail(ErrorKind::Config, "solver.posref.sensor must be XCORR_A or XCORR_B");
  }
  read(doc, "step_size", p.step_size, where);
  read(doc, "beta1", p.beta1, where);
  read(doc, "beta2", p.beta2, where);
  read(doc, "eps_adam", p.eps_adam, where);
  read(doc, "warmup_iterations", p.warmup_iterations, where);
  read(doc, "kappa", p.kappa, where);
  read(doc, "max_correction", p.max_correction, where);
  return p;
}

json solver_to_json(const SolverConfig& s) {
  return {{"alpha_object", s.alpha_object},
          {"alpha_probe", s.alpha_probe},
          {"beta", s.beta},
          {"gamma", s.gamma},
          {"mode_count", s.mode_count},
          {"iterations", s.iterations},
          {"position_order", s.order == PositionOrder::Fixed ? "fixed" : "shuffled"},
          {"order_seed", s.order_seed},
          {"epsilon_div", s.epsilon_div},
          {"probe_update_start", s.probe_update_start},
          {"orthogonalize_every", s.orthogonalize_every},
          {"canvas_padding", s.canvas_padding},
          {"posref", posref_to_json(s.posref.value_or(PosRefConfig{}), s.posref.has_value())}};
}

SolverConfig solver_from_json(const json& doc) {
  const std::string where = "solver";
  reject_unknown(doc, {"alpha_object", "alpha_probe", "beta", "gamma", "mode_count", "iterations",
                       "position_order", "order_seed", "epsilon_div", "probe_update_start",
                       "orthogonalize_every", "canvas_padding", "posref"},
                 where);
  SolverConfig s;
  read(doc, "alpha_object", s.alpha_object, where);
  read(doc, "alpha_probe", s.alpha_probe, where);
  read(doc, "beta", s.beta, where);
  read(doc, "gamma", s.gamma, where);
  read(doc, "mode_count", s.mode_count, where);
  read(doc, "iterations", s.iterations, where);
  std::string order = "shuffled";
  read(doc, "position_order", order, where);
  if (order == "fixed") {
    s.order = PositionOrder::Fixed;
  } else if (order == "shuffled") {
    s.order = PositionOrder::Shuffled;
  } else {
    fail(ErrorKind::Config, "solver.position_order must be fixed or shuffled");
  }
  read(doc, "order_seed", s.order_seed, where);
  read(doc, "epsilon_div", s.epsilon_div, where);
  read(doc, "probe_update_start", s.probe_update_start, where);
  read(doc, "orthogonalize_every", s.orthogonalize_every, where);
  read(doc, "canvas_padding", s.canvas_padding, where);
  if (doc.contains("posref")) {
    const json& p = doc["posref"];
    bool enabled = true;
    if (p.is_object()) read(p, "enabled", enabled, "solver.posref");
    if (p.is_null() || (p.is_string() && p.get<std::string>() == "off") || !enabled) {
      s.posref.reset();
    } else {
      s.posref = posref_from_json(p);
    }
  }
  try {
    validate(s);
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return s;
}

json simulate_to_json(const SimulateConfig& c) {
  return {
      {"geometry",
       {{"wavelength_m", c.wavelength_m},
        {"distance_m", c.distance_m},
        {"detector_pixel_m", c.detector_pixel_m},
        {"window", c.window}}},
      {"scan",
       {{"grid_rows", c.scan.grid_rows},
        {"grid_cols", c.scan.grid_cols},
        {"step", c.scan.step},
        {"jitter_amplitude", c.scan.jitter_amplitude},
        {"seed", c.scan.seed},
        {"margin", c.scan.margin}}},
      {"probe",
       {{"mode_count", c.probe.mode_count},
        {"mode_powers", c.probe.mode_powers},
        {"base", to_string(c.probe.base)},
        {"radius", c.probe.radius},
        {"curvature", c.probe.curvature},
        {"total_power", c.probe.total_power},
        {"file", c.probe_file.string()}}},
      {"object",
       {{"kind", to_string(c.object.kind)},
        {"rows", c.object.rows},
        {"cols", c.object.cols},
        {"min_transmission", c.object.min_transmission},
        {"max_phase", c.object.max_phase},
        {"feature_size", c.object.feature_size},
        {"seed", c.object.seed}}},
      {"noise",
       {{"kind", c.noise.kind == NoiseKind::Poisson ? "poisson" : "none"},
        {"photon_budget", c.noise.photon_budget},
        {"seed", c.noise.seed}}},
      {"output", c.output.string()},
  };
}

}  // namespace

SimulateConfig parse_simulate_config(const std::string& json_text, const fs::path& base_dir) {
  const json doc = parse_text(json_text);
  reject_unknown(doc, {"geometry", "scan", "probe", "object", "noise", "output"}, "simulate config");
  SimulateConfig c;
  if (doc.contains("geometry")) {
    const json& g = doc["geometry"];
    reject_unknown(g, {"wavelength_m", "distance_m", "detector_pixel_m", "window"}, "geometry");
    read(g, "wavelength_m", c.wavelength_m, "geometry");
    read(g, "distance_m", c.distance_m, "geometry");
    read(g, "detector_pixel_m", c.detector_pixel_m, "geometry");
    read(g, "window", c.window, "geometry");
  }
  if (doc.contains("scan")) {
    const json& s = doc["scan"];
    reject_unknown(s, {"grid_rows", "grid_cols", "step", "jitter_amplitude", "seed", "margin"}, "scan");
    read(s, "grid_rows", c.scan.grid_rows, "scan");
    read(s, "grid_cols", c.scan.grid_cols, "scan");
    read(s, "step", c.scan.step, "scan");
    read(s, "jitter_amplitude", c.scan.jitter_amplitude, "scan");
    read(s, "seed", c.scan.seed, "scan");
    read(s, "margin", c.scan.margin, "scan");
  }
  c.scan.window = c.window;
  if (doc.contains("probe")) {
    const json& p = doc["probe"];
    reject_unknown(p, {"mode_count", "mode_powers", "base", "radius", "curvature", "total_power", "file"}, "probe");
    read(p, "mode_count", c.probe.mode_count, "probe");
    read(p, "mode_powers", c.probe.mode_powers, "probe");
    std::string base = to_string(c.probe.base);
    read(p, "base", base, "probe");
    c.probe.base = probe_base_from(base);
    read(p, "radius", c.probe.radius, "probe");
    read(p, "curvature", c.probe.curvature, "probe");
    read(p, "total_power", c.probe.total_power, "probe");
    std::string file;
    read(p, "file", file, "probe");
    c.probe_file = resolve(base_dir, file);
  }
  if (doc.contains("object")) {
    const json& o = doc["object"];
    reject_unknown(o, {"kind", "rows", "cols", "min_transmission", "max_phase", "feature_size", "seed"}, "object");
    std::string kind = to_string(c.object.kind);
    read(o, "kind", kind, "object");
    c.object.kind = object_kind_from(kind);
    read(o, "rows", c.object.rows, "object");
    read(o, "cols", c.object.cols, "object");
    read(o, "min_transmission", c.object.min_transmission, "object");
    read(o, "max_phase", c.object.max_phase, "object");
    read(o, "feature_size", c.object.feature_size, "object");
    read(o, "seed", c.object.seed, "object");
  }
  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    reject_unknown(n, {"kind", "photon_budget", "seed"}, "noise");
    std::string kind = "none";
    read(n, "kind", kind, "noise");
    if (kind == "none") {
      c.noise.kind = NoiseKind::None;
    } else if (kind == "poisson") {
      c.noise.kind = NoiseKind::Poisson;
    } else {
      fail(ErrorKind::Config, "noise.kind must be none or poisson");
    }
    read(n, "photon_budget", c.noise.photon_budget, "noise");
    read(n, "seed", c.noise.seed, "noise");
  }
  std::string output = c.output.string();
  read(doc, "output", output, "simulate config");
  c.output = resolve(base_dir, output);
  return c;
}

ReconstructConfig parse_reconstruct_config(const std::string& json_text, const fs::path& base_dir) {
  const json doc = parse_text(json_text);
  reject_unknown(doc, {"dataset", "solver", "output", "checkpoint_every", "resume_from", "render"},
                 "reconstruct config");
  ReconstructConfig c;
  std::string dataset;
  read(doc, "dataset", dataset, "reconstruct config");
  if (dataset.empty()) fail(ErrorKind::Config, "reconstruct config needs a 'dataset' manifest path");
  c.dataset = resolve(base_dir, dataset);
  if (doc.contains("solver")) c.solver = solver_from_json(doc["solver"]);
  std::string output = c.output.string();
  read(doc, "output", output, "reconstruct config");
  c.output = resolve(base_dir, output);
  read(doc, "checkpoint_every", c.checkpoint_every, "reconstruct config");
  std::string resume;
  read(doc, "resume_from", resume, "reconstruct config");
  c.resume_from = resolve(base_dir, resume);
  read(doc, "render", c.render, "reconstruct config");
  return c;
}

SimulateConfig load_simulate_config(const fs::path& path) {
  return parse_simulate_config(slurp(path), path.parent_path());
}

ReconstructConfig load_reconstruct_config(const fs::path& path) {
  return parse_reconstruct_config(slurp(path), path.parent_path());
}

std::string default_simulate_config_json() { return simulate_to_json(SimulateConfig{}).dump(2); }

std::string default_reconstruct_config_json() {
  const ReconstructConfig c;
  const json doc = {{"dataset", "dataset/manifest.json"},
                    {"solver", solver_to_json(c.solver)},
                    {"output", c.output.string()},
                    {"checkpoint_every", c.checkpoint_every},
                    {"resume_from", ""},
                    {"render", c.render}};
  return doc.dump(2);
}

}  // namespace ptycho
