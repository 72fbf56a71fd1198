#include "ptycho/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ptycho/error.hpp"

namespace ptycho {

double object_error(const ComplexField2D& reconstructed, const ComplexField2D& truth, const Mask& mask) {
  if (!reconstructed.same_shape(truth)) fail(ErrorKind::Shape, "object_error: shape mismatch");
  if (mask.size() != truth.size()) fail(ErrorKind::Shape, "object_error: mask size mismatch");
  Complex cross{};
  double norm_a = 0.0;
  double norm_b = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!mask[i]) continue;
    cross += std::conj(reconstructed[i]) * truth[i];
    norm_a += std::norm(reconstructed[i]);
    norm_b += std::norm(truth[i]);
    ++used;
  }
  if (used == 0) fail(ErrorKind::DegenerateInput, "object_error: empty mask");
  if (!(norm_a > 0.0) || !(norm_b > 0.0)) return 1.0;
  return std::max(0.0, 1.0 - std::abs(cross) / std::sqrt(norm_a * norm_b));
}

namespace {

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t period = 2 * len;
  std::ptrdiff_t k = ((i % period) + period) % period;
  return static_cast<std::size_t>(k < len ? k : period - 1 - k);
}

// out(r, c) = field(r - dy, c - dx); mirror padding keeps the Fourier shift
// free of wrap-around ringing inside the original frame.
ComplexField2D translated(const ComplexField2D& field, double dy, double dx) {
  const auto pad = static_cast<std::size_t>(std::ceil(std::max(std::abs(dy), std::abs(dx)))) + 16;
  const std::size_t rows = field.rows() + 2 * pad;
  const std::size_t cols = field.cols() + 2 * pad;
  ComplexField2D padded(rows, cols);
  const auto off = static_cast<std::ptrdiff_t>(pad);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      padded(r, c) = field(reflect(static_cast<std::ptrdiff_t>(r) - off, field.rows()),
                           reflect(static_cast<std::ptrdiff_t>(c) - off, field.cols()));
  const ComplexField2D moved = subpixel_fourier_shift(padded, dx, dy);
  ComplexField2D out(field.rows(), field.cols());
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = moved(r + pad, c + pad);
  return out;
}

double integer_shift_error(const ComplexField2D& rec, const ComplexField2D& truth,
                           const std::vector<std::size_t>& support, std::ptrdiff_t dy,
                           std::ptrdiff_t dx) {
  const auto rows = static_cast<std::ptrdiff_t>(rec.rows());
  const auto cols = static_cast<std::ptrdiff_t>(rec.cols());
  Complex cross{};
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (const std::size_t i : support) {
    norm_b += std::norm(truth[i]);
    const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(i) / cols - dy;
    const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(i) % cols - dx;
    if (r < 0 || c < 0 || r >= rows || c >= cols) continue;
    const Complex a = rec(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    cross += std::conj(a) * truth[i];
    norm_a += std::norm(a);
  }
  if (!(norm_a > 0.0) || !(norm_b > 0.0)) return 1.0;
  return std::max(0.0, 1.0 - std::abs(cross) / std::sqrt(norm_a * norm_b));
}

}  // namespace

AlignedError aligned_object_error(const ComplexField2D& reconstructed, const ComplexField2D& truth,
                                  const Mask& mask, double max_shift) {
  if (!reconstructed.same_shape(truth)) fail(ErrorKind::Shape, "aligned_object_error: shape mismatch");
  if (mask.size() != truth.size()) fail(ErrorKind::Shape, "aligned_object_error: mask size mismatch");
  if (!(max_shift >= 0.0)) fail(ErrorKind::Parameter, "aligned_object_error: negative max_shift");
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) support.push_back(i);
  if (support.empty()) fail(ErrorKind::DegenerateInput, "aligned_object_error: empty mask");

  // Whole-pixel search, then parabolic refinement on shrinking steps.
  const auto reach = static_cast<std::ptrdiff_t>(std::floor(max_shift));
  AlignedError best{integer_shift_error(reconstructed, truth, support, 0, 0), 0.0, 0.0};
  for (std::ptrdiff_t dy = -reach; dy <= reach; ++dy)
    for (std::ptrdiff_t dx = -reach; dx <= reach; ++dx) {
      const double e = integer_shift_error(reconstructed, truth, support, dy, dx);
      if (e < best.error) best = {e, static_cast<double>(dy), static_cast<double>(dx)};
    }

  const auto at = [&](double dy, double dx) {
    return object_error(translated(reconstructed, dy, dx), truth, mask);
  };
  best.error = at(best.dy, best.dx);
  for (const double h : {0.5, 0.2, 0.08, 0.03, 0.01}) {
    const auto vertex = [h](double minus, double centre, double plus) {
      const double curvature = minus - 2.0 * centre + plus;
      if (!(curvature > 0.0)) return minus < plus ? -h : (plus < minus ? h : 0.0);
      return std::clamp(0.5 * h * (minus - plus) / curvature, -h, h);
    };
    const double step_y = vertex(at(best.dy - h, best.dx), best.error, at(best.dy + h, best.dx));
    const double step_x = vertex(at(best.dy, best.dx - h), best.error, at(best.dy, best.dx + h));
    const double e = at(best.dy + step_y, best.dx + step_x);
    if (e < best.error) best = {e, best.dy + step_y, best.dx + step_x};
  }
  return best;
}

Mask coverage_mask(const std::vector<ComplexField2D>& probes, const std::vector<Position>& positions,
                   std::size_t rows, std::size_t cols, std::ptrdiff_t origin_row,
                   std::ptrdiff_t origin_col, double threshold) {
  if (probes.empty()) fail(ErrorKind::Parameter, "coverage_mask needs probe modes");
  const std::size_t side = probes.front().rows();
  RealImage power(side, side);
  for (const auto& p : probes)
    for (std::size_t i = 0; i < p.size(); ++i) power.values[i] += std::norm(p[i]);

  std::vector<double> coverage(rows * cols, 0.0);
  const auto srows = static_cast<std::ptrdiff_t>(rows);
  const auto scols = static_cast<std::ptrdiff_t>(cols);
  for (const auto& pos : positions) {
    const CropBox box = crop_box_at(pos, side);
    for (std::size_t r = 0; r < side; ++r) {
      const std::ptrdiff_t cr = box.row - origin_row + static_cast<std::ptrdiff_t>(r);
      if (cr < 0 || cr >= srows) continue;
      for (std::size_t c = 0; c < side; ++c) {
        const std::ptrdiff_t cc = box.col - origin_col + static_cast<std::ptrdiff_t>(c);
        if (cc < 0 || cc >= scols) continue;
        coverage[static_cast<std::size_t>(cr * scols + cc)] += power(r, c);
      }
    }
  }
  const double peak = coverage.empty() ? 0.0 : *std::max_element(coverage.begin(), coverage.end());
  Mask mask(coverage.size(), 0);
  for (std::size_t i = 0; i < coverage.size(); ++i) mask[i] = coverage[i] > threshold * peak ? 1 : 0;
  return mask;
}

double position_rmse(const std::vector<Position>& estimated, const std::vector<Position>& truth) {
  if (estimated.size() != truth.size()) fail(ErrorKind::Shape, "position_rmse: count mismatch");
  if (estimated.empty()) return 0.0;
  const auto n = static_cast<double>(estimated.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t j = 0; j < estimated.size(); ++j) {
    mean_x += estimated[j].x - truth[j].x;
    mean_y += estimated[j].y - truth[j].y;
  }
  mean_x /= n;
  mean_y /= n;
  double acc = 0.0;
  for (std::size_t j = 0; j < estimated.size(); ++j) {
    const double ex = estimated[j].x - truth[j].x - mean_x;
    const double ey = estimated[j].y - truth[j].y - mean_y;
    acc += ex * ex + ey * ey;
  }
  return std::sqrt(acc / n);
}

ComplexField2D truth_on_canvas(const ComplexField2D& truth, std::size_t rows, std::size_t cols,
                               std::ptrdiff_t origin_row, std::ptrdiff_t origin_col, Mask& mask) {
  if (mask.size() != rows * cols) fail(ErrorKind::Shape, "truth_on_canvas: mask size mismatch");
  ComplexField2D out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::ptrdiff_t tr = origin_row + static_cast<std::ptrdiff_t>(r);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::ptrdiff_t tc = origin_col + static_cast<std::ptrdiff_t>(c);
      const bool inside = tr >= 0 && tc >= 0 && static_cast<std::size_t>(tr) < truth.rows() &&
                          static_cast<std::size_t>(tc) < truth.cols();
      if (inside) {
        out(r, c) = truth(static_cast<std::size_t>(tr), static_cast<std::size_t>(tc));
      } else {
        mask[r * cols + c] = 0;
      }
    }
  }
  return out;
}

double object_error_vs_truth(const ReconState& state, const GroundTruth& truth, double threshold) {
  const std::size_t rows = state.object.rows();
  const std::size_t cols = state.object.cols();
  Mask mask = coverage_mask(truth.probes, truth.positions, rows, cols, state.origin_row,
                            state.origin_col, threshold);
  const ComplexField2D reference =
      truth_on_canvas(truth.object, rows, cols, state.origin_row, state.origin_col, mask);
  const double reach = static_cast<double>(state.probes.empty() ? 0 : state.probes.front().rows()) / 2.0;
  return aligned_object_error(state.object, reference, mask, reach).error;
}

void validate(const MetricsReport& report) {
  const auto check = [](const std::vector<double>& values, const char* name) {
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::Data, std::string("metrics entry '") + name + "' is negative or non-finite");
    }
  };
  check(report.intensity_error, "intensity_error");
  check(report.position_rmse, "position_rmse");
  check(report.seconds_per_iteration, "seconds_per_iteration");
  check({report.initial_position_rmse}, "initial_position_rmse");
  if (report.object_error) check({*report.object_error}, "object_error");
}

std::string to_json(const MetricsReport& report) {
  nlohmann::json doc;
  doc["intensity_error"] = report.intensity_error;
  doc["position_rmse"] = report.position_rmse;
  doc["initial_position_rmse"] = report.initial_position_rmse;
  doc["object_error"] = report.object_error ? nlohmann::json(*report.object_error) : nlohmann::json();
  doc["seconds_per_iteration"] = report.seconds_per_iteration;
  return doc.dump(2);
}

}  // namespace ptycho
