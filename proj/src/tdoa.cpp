#include "aebss/tdoa.hpp"

#include <algorithm>
#include <string>

#include "aebss/error.hpp"

namespace aebss {

DelayEstimate delay_from_ccf(const MultichannelRecord& record, int max_lag) {
  if (record.n_channels() != 2)
    throw DimensionError("delay_from_ccf: expected a 2-channel record, got " +
                         std::to_string(record.n_channels()));
  const auto x = remove_mean(record);
  const auto r12 = cross_correlation(x.channel(0), x.channel(1), max_lag);
  const auto peak = find_highest_peak(r12);
  DelayEstimate d;
  d.delay_samples = peak.position;
  d.delay_seconds = static_cast<double>(peak.position) / record.sample_rate();
  d.confidence = peak.prominence;
  d.degenerate = peak.degenerate;
  return d;
}

std::vector<DelayEstimate> delays_from_mixing(const FilterMatrix& a,
                                              double sample_rate) {
  if (a.role() != FilterRole::Mixing)
    throw ParameterError("delays_from_mixing: expected mixing filters");
  if (!(sample_rate > 0.0)) throw ParameterError("sample_rate must be positive");
  const auto L = static_cast<long>(a.tap_length());
  std::vector<DelayEstimate> out;
  out.reserve(a.n());
  for (std::size_t j = 0; j < a.n(); ++j) {
    const auto p1 = find_highest_peak(a.at(0, j).taps());
    const auto p2 = find_highest_peak(a.at(1, j).taps());
    if (p1.degenerate && p2.degenerate)
      throw MissingSourceError("mixing column " + std::to_string(j) +
                                   " has no nonzero filter taps",
                               j);
    long d = p2.position - p1.position;
    // Filters are circular; fold into [-L/2, L/2).
    d = ((d + L / 2) % L + L) % L - L / 2;
    DelayEstimate e;
    e.source_index = j;
    e.delay_samples = d;
    e.delay_seconds = static_cast<double>(d) / sample_rate;
    e.confidence = std::min(p1.prominence, p2.prominence);
    e.degenerate = p1.degenerate || p2.degenerate;
    out.push_back(e);
  }
  return out;
}

}  // namespace aebss
