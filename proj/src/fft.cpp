#include "adasamp/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace adasamp {
namespace {

// FFTW planning is not thread-safe; execution on a cached plan with the
// new-array interface is.
class PlanCache {
public:
  ~PlanCache() {
    for (auto &[key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const Shape &shape, FftDirection dir) {
    const auto key = std::make_tuple(shape.rows, shape.cols, dir);
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<fftw_complex> scratch(shape.size());
    const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan plan;
    if (shape.cols == 1) {
      plan = fftw_plan_dft_1d(static_cast<int>(shape.rows), scratch.data(),
                              scratch.data(), sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    } else {
      plan = fftw_plan_dft_2d(static_cast<int>(shape.rows),
                              static_cast<int>(shape.cols), scratch.data(),
                              scratch.data(), sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, FftDirection>, fftw_plan> plans_;
};

PlanCache &plan_cache() {
  static PlanCache cache;
  return cache;
}

} // namespace

void fft_inplace(std::span<cplx> data, const Shape &shape, FftDirection dir) {
  if (data.size() != shape.size())
    throw DimensionError("fft: buffer length does not match shape " +
                         to_string(shape));
  if (data.empty()) return;
  fftw_plan plan = plan_cache().get(shape, dir);
  auto *buf = reinterpret_cast<fftw_complex *>(data.data());
  fftw_execute_dft(plan, buf, buf);
  const double scale = 1.0 / std::sqrt(static_cast<double>(shape.size()));
  for (auto &v : data) v *= scale;
}

} // namespace adasamp
