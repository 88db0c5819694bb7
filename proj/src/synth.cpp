#include "aebss/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "aebss/error.hpp"
#include "aebss/fft.hpp"

namespace aebss {
namespace {

std::vector<double> normals(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// Multiplies the spectrum of x by gain(f), f in cycles per sample.
template <typename Gain>
void shape_spectrum(std::vector<double>& x, Gain gain) {
  const std::size_t n = x.size();
  RealFft fft(n);
  auto spec = fft.forward(x);
  for (std::size_t k = 0; k < spec.size(); ++k)
    spec[k] *= gain(static_cast<double>(k) / static_cast<double>(n));
  fft.inverse(spec, x);
}

void standardize(std::vector<double>& x, double variance) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double& v : x) {
    v -= mean;
    var += v * v;
  }
  var /= n;
  if (var <= 0.0) return;
  const double scale = std::sqrt(variance / var);
  for (double& v : x) v *= scale;
}

}  // namespace

std::string to_string(SourceKind k) {
  switch (k) {
    case SourceKind::White: return "white";
    case SourceKind::Bandpass: return "bandpass";
    case SourceKind::Ar1: return "ar1";
  }
  return "white";
}

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "white") return SourceKind::White;
  if (s == "bandpass" || s == "bandpass-noise") return SourceKind::Bandpass;
  if (s == "ar1") return SourceKind::Ar1;
  throw FormatError("unknown source kind '" + s + "'");
}

void SourceSpec::validate(double sample_rate) const {
  if (!(power > 0.0)) throw ParameterError("source power must be > 0");
  if (kind == SourceKind::Bandpass) {
    if (!(low_hz >= 0.0) || !(low_hz < high_hz))
      throw ParameterError("band edges must satisfy 0 <= low_hz < high_hz");
    if (high_hz >= sample_rate / 2.0)
      throw ParameterError("high_hz must be below the Nyquist frequency");
  }
  if (kind == SourceKind::Ar1 && !(std::abs(ar_coefficient) < 1.0))
    throw ParameterError("ar_coefficient must satisfy |a| < 1");
  if (!(modulation_depth >= 0.0))
    throw ParameterError("modulation_depth must be >= 0");
  if (modulation_depth > 0.0 && !(modulation_correlation > 0.0))
    throw ParameterError("modulation_correlation must be > 0");
}

TimeSeries generate_source(const SourceSpec& spec, std::size_t duration_samples,
                           double sample_rate) {
  if (duration_samples < 1) throw ParameterError("duration must be >= 1 sample");
  spec.validate(sample_rate);
  std::mt19937_64 rng(spec.seed);
  std::vector<double> x = normals(rng, duration_samples);

  switch (spec.kind) {
    case SourceKind::White:
      break;
    case SourceKind::Bandpass: {
      const double lo = spec.low_hz / sample_rate;
      const double hi = spec.high_hz / sample_rate;
      shape_spectrum(x, [&](double f) { return f >= lo && f <= hi ? 1.0 : 0.0; });
      break;
    }
    case SourceKind::Ar1: {
      const double a = spec.ar_coefficient;
      x[0] /= std::sqrt(1.0 - a * a);
      for (std::size_t t = 1; t < x.size(); ++t) x[t] += a * x[t - 1];
      break;
    }
  }

  if (spec.modulation_depth > 0.0 && duration_samples > 1) {
    std::vector<double> g = normals(rng, duration_samples);
    const double corr = spec.modulation_correlation;
    shape_spectrum(g, [&](double f) { return std::exp(-(f * corr) * (f * corr)); });
    standardize(g, 1.0);
    for (std::size_t t = 0; t < x.size(); ++t)
      x[t] *= std::exp(spec.modulation_depth * g[t]);
  }

  standardize(x, spec.power);
  return TimeSeries(std::move(x), sample_rate);
}

ScenarioTruth build_mixing_filters(const BandGeometry& g,
                                   const std::vector<double>& positions,
                                   const MixingOptions& options) {
  g.validate();
  if (positions.size() != 2)
    throw DimensionError("build_mixing_filters: expected 2 source positions");
  const std::size_t L = options.tap_length;
  if (L < 2) throw ParameterError("tap_length must be >= 2");
  const std::size_t z = options.zero_delay_tap.value_or(L / 2);
  if (z >= L) throw ParameterError("zero_delay_tap must be < tap_length");

  const std::size_t n = 2;
  std::vector<std::vector<double>> taps(n * n, std::vector<double>(L, 0.0));
  ScenarioTruth truth{positions, {}, FilterMatrix::identity(n, L, FilterRole::Mixing, z)};
  const double sensors[2] = {g.sensor_1_pos, g.sensor_2_pos};
  const double smear[3] = {0.25, 0.5, 0.25};

  for (std::size_t j = 0; j < positions.size(); ++j) {
    const double y = positions[j];
    const long rel = std::lround(delay_for_position(g, y) * g.sample_rate);
    truth.true_delays_samples.push_back(rel);
    // Sensor 2's arrival is pinned to sensor 1's plus the rounded relative
    // delay so that the impulse filters reproduce the truth exactly.
    const long arrival_1 =
        std::lround(std::abs(y - sensors[0]) / g.wave_speed * g.sample_rate);
    const long arrivals[2] = {arrival_1, arrival_1 + rel};
    for (std::size_t i = 0; i < n; ++i) {
      const long tap = static_cast<long>(z) + arrivals[i];
      const long reach = options.dispersion ? 1 : 0;
      if (tap - reach < 0 || tap + reach >= static_cast<long>(L))
        throw ParameterError(
            "arrival delay of " + std::to_string(arrivals[i]) +
            " samples does not fit the filter; tap_length must be at least " +
            std::to_string(tap + reach + 1));
      const double amp =
          std::exp(-options.attenuation_per_meter * std::abs(y - sensors[i]));
      auto& h = taps[i * n + j];
      if (options.dispersion) {
        for (long d = -1; d <= 1; ++d) h[tap + d] += amp * smear[d + 1];
      } else {
        h[tap] = amp;
      }
    }
  }
  std::vector<FirFilter> entries;
  for (auto& t : taps) entries.emplace_back(std::move(t));
  truth.mixing = FilterMatrix(n, std::move(entries), FilterRole::Mixing, z);
  return truth;
}

MultichannelRecord simulate_record(const std::vector<TimeSeries>& sources,
                                   const FilterMatrix& a,
                                   std::optional<double> noise_snr_db,
                                   std::uint64_t noise_seed) {
  if (sources.size() != a.n())
    throw DimensionError("simulate_record: " + std::to_string(sources.size()) +
                         " sources for a " + std::to_string(a.n()) + "-column mixing matrix");
  MultichannelRecord clean = apply_filter_matrix(a, MultichannelRecord(sources));
  if (!noise_snr_db) return clean;

  const double snr = std::pow(10.0, *noise_snr_db / 10.0);
  std::vector<TimeSeries> noisy;
  for (std::size_t i = 0; i < clean.n_channels(); ++i) {
    const auto& ch = clean.channel(i);
    std::mt19937_64 rng(derive_seed(noise_seed, i));
    std::normal_distribution<double> dist(0.0, std::sqrt(ch.variance() / snr));
    std::vector<double> v(ch.samples().begin(), ch.samples().end());
    for (double& s : v) s += dist(rng);
    noisy.emplace_back(std::move(v), ch.sample_rate());
  }
  return MultichannelRecord(std::move(noisy));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over (base, stream).
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace aebss
