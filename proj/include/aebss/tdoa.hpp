#pragma once

#include <cstddef>
#include <vector>

#include "aebss/filter_matrix.hpp"
#include "aebss/signal.hpp"

namespace aebss {

// Inter-sensor delay of one source.  Positive means the wave reaches sensor 2
// later than sensor 1.
struct DelayEstimate {
  std::size_t source_index = 0;
  long delay_samples = 0;
  double delay_seconds = 0.0;
  // Peak prominence ratio (>= 1).  Diagnostic only.
  double confidence = 1.0;
  bool degenerate = false;
};

// Single delay from the highest |R12| peak between channels 0 and 1.
DelayEstimate delay_from_ccf(const MultichannelRecord& record, int max_lag);

// One delay per mixing column: peak(a_2j) - peak(a_1j), wrapped into
// [-L/2, L/2).  The result is ordered by column but should be treated as a
// set; ICA does not fix the source order.
std::vector<DelayEstimate> delays_from_mixing(const FilterMatrix& a,
                                              double sample_rate);

}  // namespace aebss
