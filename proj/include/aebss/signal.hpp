#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aebss/fft.hpp"

namespace aebss {

// A sampled real signal.  Non-empty, finite, positive sample rate.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> samples, double sample_rate);

  std::span<const double> samples() const { return samples_; }
  double sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  double mean() const;
  double variance() const;  // population variance

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> samples_;
  double sample_rate_;
};

// n >= 2 aligned channels sharing one length and rate.  Channel i is sensor i.
class MultichannelRecord {
 public:
  explicit MultichannelRecord(std::vector<TimeSeries> channels);

  std::size_t n_channels() const { return channels_.size(); }
  std::size_t length() const { return channels_.front().size(); }
  double sample_rate() const { return channels_.front().sample_rate(); }
  const TimeSeries& channel(std::size_t i) const { return channels_.at(i); }
  const std::vector<TimeSeries>& channels() const { return channels_; }

  friend bool operator==(const MultichannelRecord&,
                         const MultichannelRecord&) = default;

 private:
  std::vector<TimeSeries> channels_;
};

// Correlation values at integer lags -L..+L.
struct CorrelationFunction {
  std::vector<int> lags;
  std::vector<double> values;

  int max_lag() const { return lags.empty() ? 0 : lags.back(); }
  double at(int lag) const;
};

struct PeakResult {
  // Index into the searched sequence, or the lag when taken from a
  // CorrelationFunction.
  long position = 0;
  double value = 0.0;       // signed value at the peak
  double magnitude = 0.0;   // |value|, the maximum of the searched magnitudes
  // Highest over second-highest local-maximum magnitude.  1 on ties and for
  // degenerate input, +inf when there is no competing local maximum.
  double prominence = 1.0;
  bool degenerate = false;  // all-zero input
};

TimeSeries remove_mean(const TimeSeries& x);
MultichannelRecord remove_mean(const MultichannelRecord& x);

// Biased-by-overlap correlation: value(tau) = sum_t a(t) b(t+tau) / (T-|tau|).
CorrelationFunction cross_correlation(const TimeSeries& a, const TimeSeries& b,
                                      int max_lag);

// Global maximum of |values|; ties go to the smallest index.
PeakResult find_highest_peak(std::span<const double> values);
PeakResult find_highest_peak(const CorrelationFunction& ccf);

// Spectra of one block: channels x (block_size/2 + 1) bins.
using BlockSpectrum = std::vector<std::vector<Complex>>;

std::size_t block_count(std::size_t length, std::size_t block_size,
                        std::size_t hop);

// Rectangular-window DFT of consecutive blocks; trailing partial block is
// dropped.
std::vector<BlockSpectrum> block_spectra(const MultichannelRecord& record,
                                         std::size_t block_size,
                                         std::size_t hop);

std::vector<double> inverse_spectrum(std::span<const Complex> bins,
                                     std::size_t block_size);

}  // namespace aebss
