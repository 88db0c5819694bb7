#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace aebss {

using Complex = std::complex<double>;

// Real-input DFT of a fixed length backed by FFTW.  Forward output holds the
// n/2+1 non-redundant bins, unnormalized.  Inverse divides by n so that
// inverse(forward(x)) == x.
//
// An instance owns its scratch buffers and must not be used from two threads
// at once; create one per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<Complex> out);
  void inverse(std::span<const Complex> in, std::span<double> out);

  std::vector<Complex> forward(std::span<const double> in);
  std::vector<double> inverse(std::span<const Complex> in);

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

bool is_power_of_two(std::size_t n);

}  // namespace aebss
