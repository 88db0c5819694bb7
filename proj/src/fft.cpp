#include "aebss/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <utility>

#include "aebss/error.hpp"

namespace aebss {
namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw ParameterError("FFT length must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spec_ = spec;
  plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec,
                                   FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real_,
                                   FFTW_ESTIMATE);
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      real_(std::exchange(other.real_, nullptr)),
      spec_(std::exchange(other.spec_, nullptr)),
      plan_fwd_(std::exchange(other.plan_fwd_, nullptr)),
      plan_inv_(std::exchange(other.plan_inv_, nullptr)) {}

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    real_ = std::exchange(other.real_, nullptr);
    spec_ = std::exchange(other.spec_, nullptr);
    plan_fwd_ = std::exchange(other.plan_fwd_, nullptr);
    plan_inv_ = std::exchange(other.plan_inv_, nullptr);
  }
  return *this;
}

void RealFft::release() noexcept {
  if (plan_fwd_ == nullptr && real_ == nullptr) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_);
  fftw_free(spec_);
  plan_fwd_ = plan_inv_ = nullptr;
  real_ = nullptr;
  spec_ = nullptr;
}

void RealFft::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != n_ || out.size() != bins())
    throw DimensionError("RealFft::forward: buffer size mismatch");
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  auto* spec = static_cast<fftw_complex*>(spec_);
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec[k][0], spec[k][1]};
}

void RealFft::inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != bins() || out.size() != n_)
    throw DimensionError("RealFft::inverse: buffer size mismatch");
  auto* spec = static_cast<fftw_complex*>(spec_);
  for (std::size_t k = 0; k < bins(); ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  // c2r ignores the imaginary part of DC and Nyquist; zero them explicitly
  // so the result does not depend on FFTW internals.
  spec[0][1] = 0.0;
  if (n_ % 2 == 0) spec[n_ / 2][1] = 0.0;
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t t = 0; t < n_; ++t) out[t] = real_[t] * scale;
}

std::vector<Complex> RealFft::forward(std::span<const double> in) {
  std::vector<Complex> out(bins());
  forward(in, out);
  return out;
}

std::vector<double> RealFft::inverse(std::span<const Complex> in) {
  std::vector<double> out(n_);
  inverse(in, out);
  return out;
}

}  // namespace aebss
