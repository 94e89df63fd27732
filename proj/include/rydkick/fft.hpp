#ifndef RYDKICK_FFT_HPP
#define RYDKICK_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rydkick {

// The FFTW planner is not re-entrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place 1D complex transforms of a fixed length. Backward is unnormalized.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(fftw_planner_mutex());
    forward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, flags);
    if (!forward_ || !backward_) throw std::runtime_error("FftPlan: FFTW planning failed");
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& o) noexcept
      : n_(o.n_), forward_(std::exchange(o.forward_, nullptr)),
        backward_(std::exchange(o.backward_, nullptr)) {}
  FftPlan& operator=(FftPlan&& o) noexcept {
    if (this != &o) {
      release();
      n_ = o.n_;
      forward_ = std::exchange(o.forward_, nullptr);
      backward_ = std::exchange(o.backward_, nullptr);
    }
    return *this;
  }
  ~FftPlan() { release(); }

  std::size_t size() const { return n_; }

  void forward(std::span<std::complex<double>> data) const { execute(forward_, data); }
  void backward(std::span<std::complex<double>> data) const { execute(backward_, data); }

 private:
  void execute(fftw_plan plan, std::span<std::complex<double>> data) const {
    if (data.size() != n_) throw std::invalid_argument("FftPlan: length mismatch");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
  }

  void release() {
    if (!forward_ && !backward_) return;
    std::lock_guard lock(fftw_planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (backward_) fftw_destroy_plan(backward_);
    forward_ = backward_ = nullptr;
  }

  std::size_t n_ = 0;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace rydkick

#endif  // RYDKICK_FFT_HPP
