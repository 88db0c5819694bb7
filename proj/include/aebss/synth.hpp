#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aebss/filter_matrix.hpp"
#include "aebss/locator.hpp"
#include "aebss/signal.hpp"

namespace aebss {

enum class SourceKind { White, Bandpass, Ar1 };

std::string to_string(SourceKind k);
SourceKind source_kind_from_string(const std::string& s);

// A continuous emission source.  The carrier (white, band-pass or AR(1)
// noise) is multiplied by a log-normal intermittency envelope
// exp(depth * g(t)), g a unit-variance Gaussian process with correlation
// length `modulation_correlation` samples.  depth = 0 gives a stationary
// source.
struct SourceSpec {
  SourceKind kind = SourceKind::Bandpass;
  double low_hz = 50e3;
  double high_hz = 400e3;
  double ar_coefficient = 0.9;
  double power = 1.0;  // variance of the generated signal
  double position = 0.0;
  std::uint64_t seed = 0;
  double modulation_depth = 1.0;
  double modulation_correlation = 4096.0;
  bool active = true;  // an inactive source contributes silence

  void validate(double sample_rate) const;
};

// Zero-mean, variance exactly `power`, reproducible from the seed.
TimeSeries generate_source(const SourceSpec& spec, std::size_t duration_samples,
                           double sample_rate);

struct ScenarioTruth {
  std::vector<double> true_positions;
  std::vector<long> true_delays_samples;
  FilterMatrix mixing;
};

struct MixingOptions {
  std::size_t tap_length = 1024;
  double attenuation_per_meter = 0.0;
  std::optional<std::size_t> zero_delay_tap;  // default tap_length / 2
  bool dispersion = false;  // 3-tap [1/4, 1/2, 1/4] smear around each arrival
};

// Delay-and-attenuate impulse filters for sources at `positions`.
ScenarioTruth build_mixing_filters(const BandGeometry& g,
                                   const std::vector<double>& positions,
                                   const MixingOptions& options);

// x = A * s, plus white sensor noise at the given per-channel SNR.
MultichannelRecord simulate_record(const std::vector<TimeSeries>& sources,
                                   const FilterMatrix& a,
                                   std::optional<double> noise_snr_db,
                                   std::uint64_t noise_seed = 0);

// Seeds derived from one scenario seed, distinct per stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace aebss
