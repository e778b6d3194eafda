#include "tsparse/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace tsparse::fft {

namespace {

// FFTW plan creation is not thread safe; execution via fftw_execute_dft on
// distinct buffers is. Plans are cached per (n1, n2, sign) and created with
// FFTW_UNALIGNED so they run on any std::vector storage.
class PlanCache {
 public:
  fftw_plan get(std::size_t n1, std::size_t n2, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(n1, n2, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::vector<cxd> scratch(n1 * n2);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan;
    if (n2 == 1) {
      plan = fftw_plan_dft_1d(static_cast<int>(n1), buf, buf, sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    } else {
      // Column-major n1 x n2 grid: fastest-varying index has length n1,
      // which in FFTW's row-major convention is the last dimension.
      plan = fftw_plan_dft_2d(static_cast<int>(n2), static_cast<int>(n1), buf,
                              buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(cxd* data, std::size_t n1, std::size_t n2, int sign) {
  if (n1 * n2 == 0) throw std::invalid_argument("fft: empty transform");
  if (n1 * n2 == 1) return;
  fftw_plan plan = cache().get(n1, n2, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void forward(cxd* data, std::size_t n1, std::size_t n2) {
  run(data, n1, n2, FFTW_FORWARD);
}

void inverse(cxd* data, std::size_t n1, std::size_t n2) {
  run(data, n1, n2, FFTW_BACKWARD);
}

}  // namespace tsparse::fft
