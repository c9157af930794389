#pragma once

#include <fftw3.h>

#include <Eigen/Core>
#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace b4nls::detail {

/// Process-wide cache of FFTW plans keyed by grid shape. Planning is
/// serialized; execution goes through the new-array interface, which FFTW
/// documents as thread safe, so callers own their buffers.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  /// Unnormalized transform with kernel exp(sign * i k.x), sign = -1 forward.
  void execute(std::vector<int> shape, int sign, const std::complex<double>* in,
               std::complex<double>* out) {
    fftw_plan plan = lookup(std::move(shape), sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan lookup(std::vector<int> shape, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(shape, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int n : shape) total *= static_cast<std::size_t>(n);
    std::vector<std::complex<double>> a(total), b(total);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(),
                                   reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()),
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::move(key), plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

inline void fft(const std::vector<int>& shape, int sign, const Eigen::VectorXcd& in,
                Eigen::VectorXcd& out) {
  out.resize(in.size());
  FftPlans::instance().execute(shape, sign, in.data(), out.data());
}

}  // namespace b4nls::detail
