#include "ptycho/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "ptycho/error.hpp"

namespace ptycho::fft {
namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* plan) const noexcept { fftw_destroy_plan(plan); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// FFTW's planner is not reentrant; execution of an existing plan is.
class PlanCache {
 public:
  fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
    const std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rows, cols, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second.get();

    // In-place plan on scratch storage; FFTW_ESTIMATE keeps plans (and so the
    // floating-point results) identical from run to run.
    auto* scratch = fftw_alloc_complex(rows * cols);
    fftw_plan plan = rows == 1
        ? fftw_plan_dft_1d(static_cast<int>(cols), scratch, scratch, sign,
                           FFTW_ESTIMATE | FFTW_UNALIGNED)
        : fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), scratch, scratch,
                           sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) fail(ErrorKind::Unsupported, "FFTW could not create a plan");
    auto [it, inserted] = plans_.emplace(key, PlanHandle(plan));
    return it->second.get();
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, PlanHandle> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(Complex* data, std::size_t rows, std::size_t cols, int sign) {
  if (rows == 0 || cols == 0) return;
  fftw_plan plan = cache().get(rows, cols, sign);
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, raw, raw);
}

void normalize(std::span<Complex> values) {
  const double scale = 1.0 / static_cast<double>(values.size());
  for (auto& v : values) v *= scale;
}

}  // namespace

void forward_inplace(ComplexField2D& field) {
  execute(field.data(), field.rows(), field.cols(), FFTW_FORWARD);
}

void backward_inplace(ComplexField2D& field) {
  execute(field.data(), field.rows(), field.cols(), FFTW_BACKWARD);
  normalize(field.values());
}

ComplexField2D forward(const ComplexField2D& field) {
  ComplexField2D out = field;
  forward_inplace(out);
  return out;
}

ComplexField2D backward(const ComplexField2D& field) {
  ComplexField2D out = field;
  backward_inplace(out);
  return out;
}

void forward_1d_inplace(std::span<Complex> line) {
  execute(line.data(), 1, line.size(), FFTW_FORWARD);
}

void backward_1d_inplace(std::span<Complex> line) {
  execute(line.data(), 1, line.size(), FFTW_BACKWARD);
  normalize(line);
}

}  // namespace ptycho::fft
