#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aebss/signal.hpp"

namespace aebss {

// Tap index k of a filter stored with zero-delay tap z acts as a delay of
// k - z samples.
class FirFilter {
 public:
  explicit FirFilter(std::vector<double> taps);

  std::span<const double> taps() const { return taps_; }
  std::size_t size() const { return taps_.size(); }
  double operator[](std::size_t k) const { return taps_[k]; }

  friend bool operator==(const FirFilter&, const FirFilter&) = default;

 private:
  std::vector<double> taps_;
};

enum class FilterRole { Mixing, Unmixing };

std::string to_string(FilterRole role);
FilterRole filter_role_from_string(const std::string& s);

// Square n x n grid of equal-length FIR filters.  For the mixing role entry
// (i, j) is the path from source j to sensor i.
class FilterMatrix {
 public:
  FilterMatrix(std::size_t n, std::vector<FirFilter> row_major, FilterRole role,
               std::size_t zero_delay_tap = 0);

  static FilterMatrix identity(std::size_t n, std::size_t tap_length,
                               FilterRole role, std::size_t zero_delay_tap);

  std::size_t n() const { return n_; }
  std::size_t tap_length() const { return entries_.front().size(); }
  FilterRole role() const { return role_; }
  std::size_t zero_delay_tap() const { return zero_delay_tap_; }
  const FirFilter& at(std::size_t i, std::size_t j) const {
    return entries_.at(i * n_ + j);
  }
  const std::vector<FirFilter>& entries() const { return entries_; }

  friend bool operator==(const FilterMatrix&, const FilterMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<FirFilter> entries_;
  FilterRole role_;
  std::size_t zero_delay_tap_;
};

// out_i(t) = sum_j (F_ij * x_j)(t + zero_delay_tap), t in [0, T).  For
// zero_delay_tap = 0 this is the causal full convolution truncated to the
// input length.
MultichannelRecord apply_filter_matrix(const FilterMatrix& f,
                                       const MultichannelRecord& x);

}  // namespace aebss
