#pragma once

// Plain multi-mode ePIE written straight from the textbook update rules,
// kept separate from the engine so the two can be compared.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ptycho/dataset.hpp"
#include "ptycho/field.hpp"

namespace ptycho::testing {

inline constexpr double kGuard = 1e-12;

struct EpieState {
  ComplexField2D object;
  std::vector<ComplexField2D> probes;
  std::ptrdiff_t origin_row = 0;
  std::ptrdiff_t origin_col = 0;
};

inline void epie_visit(EpieState& s, const Position& pos, const RealImage& measured,
                       bool update_probes) {
  const std::size_t w = s.probes.front().rows();
  const std::size_t r0 = static_cast<std::size_t>(std::floor(pos.y + 0.5) - s.origin_row);
  const std::size_t c0 = static_cast<std::size_t>(std::floor(pos.x + 0.5) - s.origin_col);
  const std::size_t modes = s.probes.size();

  std::vector<Complex> o(w * w);
  for (std::size_t r = 0; r < w; ++r)
    for (std::size_t c = 0; c < w; ++c) o[r * w + c] = s.object(r0 + r, c0 + c);

  std::vector<ComplexField2D> far(modes, ComplexField2D(w, w));
  std::vector<double> total(w * w, 0.0);
  for (std::size_t p = 0; p < modes; ++p) {
    for (std::size_t i = 0; i < w * w; ++i) far[p][i] = s.probes[p][i] * o[i];
    far[p] = propagate(far[p], Direction::Forward);
    for (std::size_t i = 0; i < w * w; ++i) total[i] += std::norm(far[p][i]);
  }
  const double tmax = *std::max_element(total.begin(), total.end());

  std::vector<ComplexField2D> dpsi(modes, ComplexField2D(w, w));
  for (std::size_t p = 0; p < modes; ++p) {
    ComplexField2D fixed(w, w);
    for (std::size_t i = 0; i < w * w; ++i) {
      const double amp = std::sqrt(measured.values[i]);
      const double guard = kGuard * tmax;
      const double mag = total[i] > guard ? std::sqrt(total[i]) : std::sqrt(total[i] + guard);
      fixed[i] = mag > 0.0 ? far[p][i] * (amp / mag) : Complex{};
    }
    fixed = propagate(fixed, Direction::Backward);
    for (std::size_t i = 0; i < w * w; ++i) dpsi[p][i] = fixed[i] - s.probes[p][i] * o[i];
  }

  double pmax = 0.0;
  for (std::size_t i = 0; i < w * w; ++i) {
    double sum = 0.0;
    for (std::size_t p = 0; p < modes; ++p) sum += std::norm(s.probes[p][i]);
    pmax = std::max(pmax, sum);
  }
  double omax = 0.0;
  for (const auto& v : o) omax = std::max(omax, std::norm(v));

  std::vector<ComplexField2D> next_probes = s.probes;
  for (std::size_t i = 0; i < w * w; ++i) {
    Complex step{};
    for (std::size_t p = 0; p < modes; ++p) step += std::conj(s.probes[p][i]) * dpsi[p][i];
    s.object(r0 + i / w, c0 + i % w) = o[i] + step / (pmax + kGuard * pmax);
    if (update_probes) {
      for (std::size_t p = 0; p < modes; ++p)
        next_probes[p][i] = s.probes[p][i] + std::conj(o[i]) * dpsi[p][i] / (omax + kGuard * omax);
    }
  }
  s.probes = std::move(next_probes);
}

// max |a - b| / max |b|
inline double max_relative(const ComplexField2D& a, const ComplexField2D& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace ptycho::testing
