#include "ptycho/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ptycho/error.hpp"

namespace ptycho::io {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

template <typename T>
void write_raw(const fs::path& path, const std::vector<T>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  for (T v : values) {
    const T le = to_little_endian(v);
    out.write(reinterpret_cast<const char*>(&le), sizeof(T));
  }
  if (!out) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

template <typename T>
std::vector<T> read_raw(const fs::path& path, std::size_t count) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) fail(ErrorKind::Io, "missing array file '" + path.string() + "'");
  const auto bytes = fs::file_size(path, ec);
  if (ec) fail(ErrorKind::Io, "cannot stat '" + path.string() + "'");
  const std::uintmax_t expected = static_cast<std::uintmax_t>(count) * sizeof(T);
  if (bytes != expected) {
    fail(ErrorKind::Shape, "array file '" + path.string() + "' holds " + std::to_string(bytes) +
                               " bytes, expected " + std::to_string(expected));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::vector<T> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(expected));
  if (!in) fail(ErrorKind::Io, "short read from '" + path.string() + "'");
  for (auto& v : values) v = to_little_endian(v);
  return values;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, "malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

template <typename T>
T field_or_fail(const json& doc, const char* key, const fs::path& where) {
  if (!doc.contains(key)) fail(ErrorKind::Io, "'" + where.string() + "' lacks required key '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, "'" + where.string() + "' key '" + key + "': " + e.what());
  }
}

void require_dtype(const json& doc, const char* key, const char* dtype, const fs::path& where) {
  const auto declared = field_or_fail<std::string>(doc, key, where);
  if (declared != dtype) {
    fail(ErrorKind::Io, "'" + where.string() + "' declares " + key + " = '" + declared +
                            "', expected '" + dtype + "'");
  }
}

std::vector<double> flatten(const std::vector<Position>& positions) {
  std::vector<double> flat;
  flat.reserve(positions.size() * 2);
  for (const auto& p : positions) {
    flat.push_back(p.x);
    flat.push_back(p.y);
  }
  return flat;
}

std::vector<Position> unflatten(const std::vector<double>& flat) {
  std::vector<Position> positions(flat.size() / 2);
  for (std::size_t j = 0; j < positions.size(); ++j) positions[j] = {flat[2 * j], flat[2 * j + 1]};
  return positions;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace

void write_complex64(const fs::path& path, const ComplexField2D& field) {
  std::vector<float> values;
  values.reserve(field.size() * 2);
  for (const auto& v : field) {
    values.push_back(static_cast<float>(v.real()));
    values.push_back(static_cast<float>(v.imag()));
  }
  write_raw(path, values);
}

ComplexField2D read_complex64(const fs::path& path, std::size_t rows, std::size_t cols) {
  const auto raw = read_raw<float>(path, rows * cols * 2);
  std::vector<Complex> values(rows * cols);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = {raw[2 * i], raw[2 * i + 1]};
  ComplexField2D field = ComplexField2D::from_values(rows, cols, std::move(values));
  if (!all_finite(field)) fail(ErrorKind::Data, "non-finite values in '" + path.string() + "'");
  return field;
}

void write_complex128(const fs::path& path, const ComplexField2D& field) {
  std::vector<double> values;
  values.reserve(field.size() * 2);
  for (const auto& v : field) {
    values.push_back(v.real());
    values.push_back(v.imag());
  }
  write_raw(path, values);
}

ComplexField2D read_complex128(const fs::path& path, std::size_t rows, std::size_t cols) {
  const auto raw = read_raw<double>(path, rows * cols * 2);
  std::vector<Complex> values(rows * cols);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = {raw[2 * i], raw[2 * i + 1]};
  ComplexField2D field = ComplexField2D::from_values(rows, cols, std::move(values));
  if (!all_finite(field)) fail(ErrorKind::Data, "non-finite values in '" + path.string() + "'");
  return field;
}

void write_float32(const fs::path& path, std::span<const double> values) {
  std::vector<float> out(values.begin(), values.end());
  write_raw(path, out);
}

std::vector<double> read_float32(const fs::path& path, std::size_t count) {
  const auto raw = read_raw<float>(path, count);
  return {raw.begin(), raw.end()};
}

void write_float64(const fs::path& path, std::span<const double> values) {
  write_raw(path, std::vector<double>(values.begin(), values.end()));
}

std::vector<double> read_float64(const fs::path& path, std::size_t count) {
  return read_raw<double>(path, count);
}

void write_dataset(const PtychoDataset& dataset, const fs::path& manifest_path) {
  const std::size_t side = dataset.geometry.window;
  if (dataset.patterns.size() != dataset.positions.size()) {
    fail(ErrorKind::Data, "dataset has mismatched pattern and position counts");
  }
  const fs::path dir = manifest_path.parent_path();
  ensure_directory(dir);

  json manifest;
  manifest["format_version"] = kDatasetFormat;
  manifest["wavelength_m"] = dataset.geometry.wavelength_m;
  manifest["distance_m"] = dataset.geometry.distance_m;
  manifest["detector_pixel_m"] = dataset.geometry.detector_pixel_m;
  manifest["window_px"] = side;
  manifest["sample_pixel_m"] = dataset.geometry.sample_pixel_m;
  manifest["position_count"] = dataset.positions.size();
  manifest["positions_file"] = "positions.f64";
  manifest["positions_dtype"] = "float64";
  manifest["patterns_file"] = "patterns.f32";
  manifest["patterns_dtype"] = "float32";
  manifest["seeds"] = {{"scan", dataset.scan_seed}, {"noise", dataset.noise_seed}};
  manifest["created_by"] = dataset.created_by;

  write_float64(dir / "positions.f64", flatten(dataset.positions));
  std::vector<double> stack;
  stack.reserve(dataset.patterns.size() * side * side);
  for (const auto& pattern : dataset.patterns) {
    if (pattern.rows != side || pattern.cols != side) fail(ErrorKind::Shape, "pattern does not match window");
    stack.insert(stack.end(), pattern.values.begin(), pattern.values.end());
  }
  write_float32(dir / "patterns.f32", stack);

  if (dataset.truth) {
    const GroundTruth& truth = *dataset.truth;
    json gt;
    gt["positions_file"] = "true_positions.f64";
    gt["positions_dtype"] = "float64";
    gt["object_file"] = "object.c64";
    gt["object_dtype"] = "complex64";
    gt["object_shape"] = {truth.object.rows(), truth.object.cols()};
    gt["mode_powers"] = truth.mode_powers;
    json probe_files = json::array();
    for (std::size_t p = 0; p < truth.probes.size(); ++p) {
      const std::string name = "probe_" + std::to_string(p) + ".c64";
      write_complex64(dir / name, truth.probes[p]);
      probe_files.push_back(name);
    }
    gt["probe_files"] = probe_files;
    gt["probe_dtype"] = "complex64";
    write_float64(dir / "true_positions.f64", flatten(truth.positions));
    write_complex64(dir / "object.c64", truth.object);
    manifest["ground_truth"] = gt;
  }
  write_json(manifest_path, manifest);
}

PtychoDataset read_dataset(const fs::path& manifest_path) {
  const json manifest = read_json(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  const auto version = field_or_fail<std::string>(manifest, "format_version", manifest_path);
  if (version != kDatasetFormat) {
    fail(ErrorKind::Io, "unsupported dataset format '" + version + "' in '" + manifest_path.string() + "'");
  }

  PtychoDataset ds;
  const auto window = field_or_fail<std::size_t>(manifest, "window_px", manifest_path);
  ds.geometry = make_geometry(field_or_fail<double>(manifest, "wavelength_m", manifest_path),
                              field_or_fail<double>(manifest, "distance_m", manifest_path),
                              field_or_fail<double>(manifest, "detector_pixel_m", manifest_path),
                              window);
  const auto count = field_or_fail<std::size_t>(manifest, "position_count", manifest_path);
  require_dtype(manifest, "positions_dtype", "float64", manifest_path);
  require_dtype(manifest, "patterns_dtype", "float32", manifest_path);
  ds.positions = unflatten(
      read_float64(dir / field_or_fail<std::string>(manifest, "positions_file", manifest_path), count * 2));
  const auto stack = read_float32(
      dir / field_or_fail<std::string>(manifest, "patterns_file", manifest_path), count * window * window);
  ds.patterns.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    RealImage pattern(window, window);
    std::copy_n(stack.begin() + static_cast<std::ptrdiff_t>(j * window * window), window * window,
                pattern.values.begin());
    for (double v : pattern.values) {
      if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::Data, "patterns file holds negative or non-finite intensities");
    }
    ds.patterns.push_back(std::move(pattern));
  }
  for (const auto& p : ds.positions) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) fail(ErrorKind::Data, "positions file holds non-finite values");
  }
  if (manifest.contains("seeds")) {
    ds.scan_seed = manifest["seeds"].value("scan", std::uint64_t{0});
    ds.noise_seed = manifest["seeds"].value("noise", std::uint64_t{0});
  }
  ds.created_by = manifest.value("created_by", std::string{});

  if (manifest.contains("ground_truth") && !manifest["ground_truth"].is_null()) {
    const json& gt = manifest["ground_truth"];
    GroundTruth truth;
    require_dtype(gt, "object_dtype", "complex64", manifest_path);
    const auto shape = field_or_fail<std::vector<std::size_t>>(gt, "object_shape", manifest_path);
    if (shape.size() != 2) fail(ErrorKind::Io, "ground_truth.object_shape must have two entries");
    truth.positions = unflatten(
        read_float64(dir / field_or_fail<std::string>(gt, "positions_file", manifest_path), count * 2));
    truth.object = read_complex64(dir / field_or_fail<std::string>(gt, "object_file", manifest_path),
                                  shape[0], shape[1]);
    for (const auto& name : field_or_fail<std::vector<std::string>>(gt, "probe_files", manifest_path)) {
      truth.probes.push_back(read_complex64(dir / name, window, window));
    }
    truth.mode_powers = field_or_fail<std::vector<double>>(gt, "mode_powers", manifest_path);
    if (truth.mode_powers.size() != truth.probes.size()) {
      fail(ErrorKind::Io, "ground_truth lists " + std::to_string(truth.mode_powers.size()) +
                              " mode powers for " + std::to_string(truth.probes.size()) + " probes");
    }
    ds.truth = std::move(truth);
  }
  return ds;
}

void write_recon(const ReconState& state, const ReconRecord& record, const fs::path& dir) {
  ensure_directory(dir);
  const std::size_t side = state.probes.empty() ? 0 : state.probes.front().rows();
  json doc;
  doc["format_version"] = kReconFormat;
  doc["iteration"] = state.iteration;
  doc["origin"] = {state.origin_row, state.origin_col};
  doc["object_shape"] = {state.object.rows(), state.object.cols()};
  doc["object_file"] = "object.c128";
  doc["field_dtype"] = "complex128";
  doc["window_px"] = side;
  doc["position_count"] = state.positions.size();
  doc["positions_file"] = "positions.f64";
  doc["error_trace"] = state.error_trace;
  doc["low_confidence"] = state.low_confidence;
  doc["timing_file"] = "timing.json";

  json probe_files = json::array();
  for (std::size_t p = 0; p < state.probes.size(); ++p) {
    const std::string name = "probe_" + std::to_string(p) + ".c128";
    write_complex128(dir / name, state.probes[p]);
    probe_files.push_back(name);
  }
  doc["probe_files"] = probe_files;
  write_complex128(dir / "object.c128", state.object);
  write_float64(dir / "positions.f64", flatten(state.positions));

  std::vector<double> adam;
  adam.reserve(state.adam.size() * 5);
  for (std::size_t j = 0; j < state.adam.size(); ++j) {
    adam.insert(adam.end(), {state.adam.m[j].x, state.adam.m[j].y, state.adam.v[j].x,
                             state.adam.v[j].y, static_cast<double>(state.adam.t[j])});
  }
  doc["adam_file"] = "adam.f64";
  write_float64(dir / "adam.f64", adam);

  std::vector<double> trace;
  for (const auto& snapshot : record.position_trace) {
    const auto flat = flatten(snapshot);
    trace.insert(trace.end(), flat.begin(), flat.end());
  }
  doc["position_trace_file"] = "positions_trace.f64";
  doc["position_trace_length"] = record.position_trace.size();
  write_float64(dir / "positions_trace.f64", trace);
  write_json(dir / "recon.json", doc);
  // Wall-clock figures live apart so every other file is reproducible.
  write_json(dir / "timing.json", json{{"seconds_per_iteration", record.seconds_per_iteration}});
}

ReconState read_recon(const fs::path& dir, ReconRecord* record) {
  const fs::path doc_path = dir / "recon.json";
  const json doc = read_json(doc_path);
  const auto version = field_or_fail<std::string>(doc, "format_version", doc_path);
  if (version != kReconFormat) fail(ErrorKind::Io, "unsupported reconstruction format '" + version + "'");

  ReconState state;
  state.iteration = field_or_fail<std::size_t>(doc, "iteration", doc_path);
  const auto origin = field_or_fail<std::vector<std::ptrdiff_t>>(doc, "origin", doc_path);
  const auto shape = field_or_fail<std::vector<std::size_t>>(doc, "object_shape", doc_path);
  if (origin.size() != 2 || shape.size() != 2) fail(ErrorKind::Io, "malformed origin/object_shape");
  state.origin_row = origin[0];
  state.origin_col = origin[1];
  const auto side = field_or_fail<std::size_t>(doc, "window_px", doc_path);
  const auto count = field_or_fail<std::size_t>(doc, "position_count", doc_path);
  require_dtype(doc, "field_dtype", "complex128", doc_path);
  state.object = read_complex128(dir / field_or_fail<std::string>(doc, "object_file", doc_path), shape[0], shape[1]);
  for (const auto& name : field_or_fail<std::vector<std::string>>(doc, "probe_files", doc_path)) {
    state.probes.push_back(read_complex128(dir / name, side, side));
  }
  state.positions = unflatten(read_float64(dir / field_or_fail<std::string>(doc, "positions_file", doc_path), count * 2));
  state.error_trace = field_or_fail<std::vector<double>>(doc, "error_trace", doc_path);
  state.low_confidence = doc.value("low_confidence", std::vector<std::uint8_t>(count, 0));
  if (state.low_confidence.size() != count) fail(ErrorKind::Io, "low_confidence length mismatch");

  const auto adam = read_float64(dir / field_or_fail<std::string>(doc, "adam_file", doc_path), count * 5);
  state.adam = AdamBuffers(count);
  for (std::size_t j = 0; j < count; ++j) {
    state.adam.m[j] = {adam[5 * j], adam[5 * j + 1]};
    state.adam.v[j] = {adam[5 * j + 2], adam[5 * j + 3]};
    state.adam.t[j] = static_cast<std::uint64_t>(adam[5 * j + 4]);
  }

  if (record != nullptr) {
    const auto length = doc.value("position_trace_length", std::size_t{0});
    const auto flat = read_float64(dir / doc.value("position_trace_file", std::string{"positions_trace.f64"}),
                                   length * count * 2);
    record->position_trace.clear();
    for (std::size_t k = 0; k < length; ++k) {
      std::vector<double> slice(flat.begin() + static_cast<std::ptrdiff_t>(k * count * 2),
                                flat.begin() + static_cast<std::ptrdiff_t>((k + 1) * count * 2));
      record->position_trace.push_back(unflatten(slice));
    }
    record->seconds_per_iteration.clear();
    const fs::path timing = dir / doc.value("timing_file", std::string{"timing.json"});
    if (fs::exists(timing)) {
      record->seconds_per_iteration =
          read_json(timing).value("seconds_per_iteration", std::vector<double>{});
    }
  }
  return state;
}

}  // namespace ptycho::io
