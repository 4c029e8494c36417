#pragma once

#include <cmath>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace swdgp {

namespace detail {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Unnormalized sine transform of length M:
///   out[j] = sum_{k=1..M} sin(j k pi / (M+1)) * in[k],   j = 1..M
/// (0-based arrays hold index j-1). The matrix is symmetric and satisfies
/// T^2 = ((M+1)/2) I, so the same transform performs analysis and synthesis.
///
/// The fast path evaluates the transform through a DST-I, i.e. the odd
/// extension of the input to length 2(M+1) transformed by a real FFT.
/// Plan creation is serialized internally; execution is thread-safe on
/// caller-provided buffers.
class SineTransform {
public:
  explicit SineTransform(int size) : size_(size) {
    if (size < 1) throw std::invalid_argument("SineTransform: size must be >= 1");
    std::vector<double> in(static_cast<std::size_t>(size));
    std::vector<double> out(static_cast<std::size_t>(size));
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    plan_ = fftw_plan_r2r_1d(size, in.data(), out.data(), FFTW_RODFT00,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_) throw std::runtime_error("SineTransform: FFTW plan creation failed");
  }

  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  SineTransform(SineTransform&& other) noexcept : size_(other.size_), plan_(other.plan_) {
    other.plan_ = nullptr;
  }
  SineTransform& operator=(SineTransform&& other) noexcept {
    if (this != &other) {
      destroy();
      size_ = other.size_;
      plan_ = other.plan_;
      other.plan_ = nullptr;
    }
    return *this;
  }

  ~SineTransform() { destroy(); }

  int size() const noexcept { return size_; }

  /// Fast path; in and out must not alias.
  void forward(std::span<const double> in, std::span<double> out) const {
    if (static_cast<int>(in.size()) != size_ || static_cast<int>(out.size()) != size_)
      throw std::invalid_argument("SineTransform: length mismatch");
    // FFTW's RODFT00 computes 2 * sum sin(...) terms.
    fftw_execute_r2r(plan_, const_cast<double*>(in.data()), out.data());
    for (double& v : out) v *= 0.5;
  }

private:
  void destroy() {
    if (plan_) {
      std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
      fftw_destroy_plan(plan_);
      plan_ = nullptr;
    }
  }

  int size_ = 0;
  fftw_plan plan_ = nullptr;
};

/// O(M^2) reference evaluation of the same transform.
inline std::vector<double> sine_transform_direct(std::span<const double> in) {
  const int m = static_cast<int>(in.size());
  std::vector<double> out(in.size(), 0.0);
  const double step = M_PI / (m + 1);
  for (int j = 1; j <= m; ++j) {
    double acc = 0.0;
    for (int k = 1; k <= m; ++k) acc += std::sin(step * j * k) * in[k - 1];
    out[j - 1] = acc;
  }
  return out;
}

}  // namespace swdgp
