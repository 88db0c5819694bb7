#include "aebss/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "aebss/error.hpp"

namespace aebss {

TimeSeries::TimeSeries(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (samples_.empty()) throw ParameterError("TimeSeries: no samples");
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
    throw ParameterError("TimeSeries: sample_rate must be positive");
  for (double v : samples_)
    if (!std::isfinite(v)) throw ParameterError("TimeSeries: non-finite sample");
}

double TimeSeries::mean() const {
  return std::accumulate(samples_.begin(), samples_.end(), 0.0) /
         static_cast<double>(samples_.size());
}

double TimeSeries::variance() const {
  const double m = mean();
  double acc = 0.0;
  for (double v : samples_) acc += (v - m) * (v - m);
  return acc / static_cast<double>(samples_.size());
}

MultichannelRecord::MultichannelRecord(std::vector<TimeSeries> channels)
    : channels_(std::move(channels)) {
  if (channels_.size() < 2)
    throw DimensionError("MultichannelRecord: need at least 2 channels, got " +
                         std::to_string(channels_.size()));
  for (const auto& c : channels_) {
    if (c.size() != channels_.front().size())
      throw DimensionError("MultichannelRecord: channel lengths differ");
    if (c.sample_rate() != channels_.front().sample_rate())
      throw DimensionError("MultichannelRecord: channel sample rates differ");
  }
}

double CorrelationFunction::at(int lag) const {
  const int L = max_lag();
  if (lag < -L || lag > L) throw ParameterError("lag outside correlation range");
  return values[static_cast<std::size_t>(lag + L)];
}

TimeSeries remove_mean(const TimeSeries& x) {
  const double m = x.mean();
  std::vector<double> out(x.samples().begin(), x.samples().end());
  for (double& v : out) v -= m;
  return TimeSeries(std::move(out), x.sample_rate());
}

MultichannelRecord remove_mean(const MultichannelRecord& x) {
  std::vector<TimeSeries> out;
  out.reserve(x.n_channels());
  for (const auto& c : x.channels()) out.push_back(remove_mean(c));
  return MultichannelRecord(std::move(out));
}

CorrelationFunction cross_correlation(const TimeSeries& a, const TimeSeries& b,
                                      int max_lag) {
  if (a.size() != b.size())
    throw DimensionError("cross_correlation: lengths differ");
  if (a.sample_rate() != b.sample_rate())
    throw DimensionError("cross_correlation: sample rates differ");
  const auto T = static_cast<long>(a.size());
  if (max_lag <= 0 || max_lag >= T)
    throw ParameterError("cross_correlation: max_lag must be in (0, length)");

  const auto sa = a.samples();
  const auto sb = b.samples();
  CorrelationFunction r;
  r.lags.reserve(2 * max_lag + 1);
  r.values.reserve(2 * max_lag + 1);
  for (int tau = -max_lag; tau <= max_lag; ++tau) {
    // Iterate over the index into `a` in increasing order so that R_ab(tau)
    // and R_ba(-tau) sum identical products in identical order.
    const long t0 = std::max(0L, -static_cast<long>(tau));
    const long t1 = std::min(T, T - tau);
    double acc = 0.0;
    for (long t = t0; t < t1; ++t) acc += sa[t] * sb[t + tau];
    r.lags.push_back(tau);
    r.values.push_back(acc / static_cast<double>(t1 - t0));
  }
  return r;
}

PeakResult find_highest_peak(std::span<const double> values) {
  if (values.empty()) throw ParameterError("find_highest_peak: empty sequence");
  PeakResult p;
  const std::size_t n = values.size();
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(values[i]) > std::abs(values[best])) best = i;
  p.position = static_cast<long>(best);
  p.value = values[best];
  p.magnitude = std::abs(values[best]);
  if (p.magnitude == 0.0) {
    p.degenerate = true;
    p.prominence = 1.0;
    return p;
  }
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == best) continue;
    const double m = std::abs(values[i]);
    const bool left_ok = i == 0 || m >= std::abs(values[i - 1]);
    const bool right_ok = i + 1 == n || m >= std::abs(values[i + 1]);
    if (left_ok && right_ok) second = std::max(second, m);
  }
  p.prominence = second > 0.0 ? p.magnitude / second
                              : std::numeric_limits<double>::infinity();
  return p;
}

PeakResult find_highest_peak(const CorrelationFunction& ccf) {
  PeakResult p = find_highest_peak(std::span<const double>(ccf.values));
  p.position = ccf.lags[static_cast<std::size_t>(p.position)];
  return p;
}

std::size_t block_count(std::size_t length, std::size_t block_size,
                        std::size_t hop) {
  if (!is_power_of_two(block_size))
    throw ParameterError("block size must be a power of two");
  if (hop == 0 || hop > block_size)
    throw ParameterError("hop must satisfy 0 < hop <= block size");
  if (length < block_size)
    throw ParameterError("record of " + std::to_string(length) +
                         " samples is shorter than one block of " +
                         std::to_string(block_size));
  return (length - block_size) / hop + 1;
}

std::vector<BlockSpectrum> block_spectra(const MultichannelRecord& record,
                                         std::size_t block_size,
                                         std::size_t hop) {
  const std::size_t nb = block_count(record.length(), block_size, hop);
  RealFft fft(block_size);
  std::vector<BlockSpectrum> out(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    out[b].reserve(record.n_channels());
    for (const auto& ch : record.channels())
      out[b].push_back(fft.forward(ch.samples().subspan(b * hop, block_size)));
  }
  return out;
}

std::vector<double> inverse_spectrum(std::span<const Complex> bins,
                                     std::size_t block_size) {
  RealFft fft(block_size);
  return fft.inverse(bins);
}

}  // namespace aebss
