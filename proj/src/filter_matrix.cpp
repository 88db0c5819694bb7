#include "aebss/filter_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "aebss/error.hpp"

namespace aebss {

FirFilter::FirFilter(std::vector<double> taps) : taps_(std::move(taps)) {
  if (taps_.empty()) throw ParameterError("FirFilter: no taps");
  for (double v : taps_)
    if (!std::isfinite(v)) throw ParameterError("FirFilter: non-finite tap");
}

std::string to_string(FilterRole role) {
  return role == FilterRole::Mixing ? "mixing" : "unmixing";
}

FilterRole filter_role_from_string(const std::string& s) {
  if (s == "mixing") return FilterRole::Mixing;
  if (s == "unmixing") return FilterRole::Unmixing;
  throw FormatError("unknown filter role '" + s + "'");
}

FilterMatrix::FilterMatrix(std::size_t n, std::vector<FirFilter> row_major,
                           FilterRole role, std::size_t zero_delay_tap)
    : n_(n),
      entries_(std::move(row_major)),
      role_(role),
      zero_delay_tap_(zero_delay_tap) {
  if (n_ < 2) throw DimensionError("FilterMatrix: n must be >= 2");
  if (entries_.size() != n_ * n_)
    throw DimensionError("FilterMatrix: expected n*n entries");
  for (const auto& e : entries_)
    if (e.size() != entries_.front().size())
      throw DimensionError("FilterMatrix: entries differ in tap length");
  if (zero_delay_tap_ >= tap_length())
    throw ParameterError("FilterMatrix: zero_delay_tap outside the filter");
}

FilterMatrix FilterMatrix::identity(std::size_t n, std::size_t tap_length,
                                    FilterRole role,
                                    std::size_t zero_delay_tap) {
  std::vector<FirFilter> entries;
  entries.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> taps(tap_length, 0.0);
      if (i == j) taps.at(zero_delay_tap) = 1.0;
      entries.emplace_back(std::move(taps));
    }
  return FilterMatrix(n, std::move(entries), role, zero_delay_tap);
}

MultichannelRecord apply_filter_matrix(const FilterMatrix& f,
                                       const MultichannelRecord& x) {
  if (f.n() != x.n_channels())
    throw DimensionError("apply_filter_matrix: filter matrix is " +
                         std::to_string(f.n()) + "x" + std::to_string(f.n()) +
                         " but record has " + std::to_string(x.n_channels()) +
                         " channels");
  const auto T = static_cast<long>(x.length());
  const auto z = static_cast<long>(f.zero_delay_tap());
  const auto L = static_cast<long>(f.tap_length());
  std::vector<TimeSeries> out;
  out.reserve(f.n());
  for (std::size_t i = 0; i < f.n(); ++i) {
    std::vector<double> y(static_cast<std::size_t>(T), 0.0);
    for (std::size_t j = 0; j < f.n(); ++j) {
      const auto h = f.at(i, j).taps();
      const auto xj = x.channel(j).samples();
      for (long k = 0; k < L; ++k) {
        const double hk = h[k];
        if (hk == 0.0) continue;
        // y[t] += hk * x[t + z - k] for the t where the index is valid.
        const long shift = z - k;
        const long t0 = std::max(0L, -shift);
        const long t1 = std::min(T, T - shift);
        for (long t = t0; t < t1; ++t) y[t] += hk * xj[t + shift];
      }
    }
    out.emplace_back(std::move(y), x.sample_rate());
  }
  return MultichannelRecord(std::move(out));
}

}  // namespace aebss
