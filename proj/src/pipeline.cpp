#include "aebss/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "aebss/error.hpp"
#include "aebss/tdoa.hpp"

namespace aebss {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Error of each true source under the assignment of estimates that
// minimizes the summed error.  Missing estimates leave the error null.
Json matched_errors_mm(const std::vector<double>& estimates,
                       const std::vector<double>& truth) {
  std::vector<std::size_t> perm(estimates.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_total = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < std::min(perm.size(), truth.size()); ++i)
      total += std::abs(estimates[perm[i]] - truth[i]);
    if (total < best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  Json errs = Json::array();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (i < best.size())
      errs.push_back(1000.0 * std::abs(estimates[best[i]] - truth[i]));
    else
      errs.push_back(nullptr);
  }
  return errs;
}

}  // namespace

BandGeometry geometry_from_document(const Json& j) {
  if (j.is_object() && j.contains("geometry"))
    return geometry_from_json(JsonReader(j, "scenario").child("geometry"));
  return geometry_from_json(JsonReader(j, "geometry"));
}

Scenario scenario_from_json(const Json& j) {
  const JsonReader r(j, "scenario");
  r.only({"name", "geometry", "sources", "duration_samples", "tap_length",
          "zero_delay_tap", "attenuation_per_m", "dispersion", "noise_snr_db",
          "seed", "prototypes", "ica"});
  Scenario s;
  s.geometry = geometry_from_json(r.child("geometry"));
  for (const auto& src : r.array("sources")) s.sources.push_back(source_spec_from_json(src));
  if (s.sources.size() != 2)
    throw FormatError("field 'scenario.sources' must list exactly 2 sources");
  if (!s.sources[0].active && !s.sources[1].active)
    throw FormatError("field 'scenario.sources': at least one source must be active");
  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    const double y = s.sources[i].position;
    if (y < s.geometry.range_min || y > s.geometry.range_max)
      throw FormatError("field 'scenario.sources[" + std::to_string(i) +
                        "].position_m' lies outside the testing range");
    try {
      s.sources[i].validate(s.geometry.sample_rate);
    } catch (const ParameterError& e) {
      throw FormatError("scenario.sources[" + std::to_string(i) + "]: " + e.what());
    }
  }
  const long duration = r.integer_or("duration_samples", static_cast<long>(s.duration_samples));
  if (duration < 1) throw FormatError("field 'scenario.duration_samples' must be >= 1");
  s.duration_samples = static_cast<std::size_t>(duration);
  const long taps = r.integer_or("tap_length", static_cast<long>(s.mixing.tap_length));
  if (taps < 2) throw FormatError("field 'scenario.tap_length' must be >= 2");
  s.mixing.tap_length = static_cast<std::size_t>(taps);
  if (r.has("zero_delay_tap"))
    s.mixing.zero_delay_tap = static_cast<std::size_t>(r.integer("zero_delay_tap"));
  s.mixing.attenuation_per_meter = r.number_or("attenuation_per_m", 0.0);
  s.mixing.dispersion = r.boolean_or("dispersion", false);
  s.noise_snr_db = r.optional_number("noise_snr_db");
  const long seed = r.integer_or("seed", 1);
  if (seed < 0) throw FormatError("field 'scenario.seed' must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  if (r.has("prototypes")) {
    const auto p = r.child("prototypes");
    p.only({"spacing_m", "sigma_s"});
    s.locator.spacing = p.number_or("spacing_m", s.locator.spacing);
    s.locator.sigma = p.optional_number("sigma_s");
  }
  if (r.has("ica")) s.ica = ica_config_from_json(r.json().at("ica"));
  return s;
}

Json to_json(const Scenario& s) {
  Json j;
  j["geometry"] = to_json(s.geometry);
  Json sources = Json::array();
  for (const auto& src : s.sources) sources.push_back(to_json(src));
  j["sources"] = std::move(sources);
  j["duration_samples"] = s.duration_samples;
  j["tap_length"] = s.mixing.tap_length;
  j["zero_delay_tap"] = s.mixing.zero_delay_tap.value_or(s.mixing.tap_length / 2);
  j["attenuation_per_m"] = s.mixing.attenuation_per_meter;
  j["dispersion"] = s.mixing.dispersion;
  j["noise_snr_db"] = s.noise_snr_db ? Json(*s.noise_snr_db) : Json(nullptr);
  j["seed"] = s.seed;
  j["prototypes"] = {{"spacing_m", s.locator.spacing},
                     {"sigma_s", s.locator.sigma ? Json(*s.locator.sigma) : Json(nullptr)}};
  if (s.ica) j["ica"] = to_json(*s.ica);
  return j;
}

SynthOutput synthesize(const Scenario& s) {
  std::vector<TimeSeries> sources;
  std::vector<double> positions;
  for (std::size_t j = 0; j < s.sources.size(); ++j) {
    SourceSpec spec = s.sources[j];
    spec.seed = derive_seed(derive_seed(s.seed, j), spec.seed);
    if (spec.active)
      sources.push_back(generate_source(spec, s.duration_samples, s.geometry.sample_rate));
    else
      sources.emplace_back(std::vector<double>(s.duration_samples, 0.0), s.geometry.sample_rate);
    positions.push_back(spec.position);
  }
  ScenarioTruth truth = build_mixing_filters(s.geometry, positions, s.mixing);
  MultichannelRecord record = simulate_record(sources, truth.mixing, s.noise_snr_db,
                                              derive_seed(s.seed, 1000));
  return {std::move(sources), std::move(truth), std::move(record)};
}

Json cmd_synth(const Scenario& s, const fs::path& out_dir) {
  const SynthOutput out = synthesize(s);
  write_record(out.record, out_dir / "record.json");
  Json truth = to_json(out.truth, s.geometry.sample_rate);
  truth["geometry"] = to_json(s.geometry);
  Json active = Json::array();
  for (const auto& src : s.sources) active.push_back(src.active);
  truth["active"] = std::move(active);
  write_text_file(out_dir / "truth.json", truth.dump(2) + "\n");
  Json summary;
  summary["record"] = (out_dir / "record.json").string();
  summary["truth"] = (out_dir / "truth.json").string();
  summary["n_channels"] = out.record.n_channels();
  summary["length"] = out.record.length();
  summary["sample_rate_hz"] = out.record.sample_rate();
  summary["positions_m"] = out.truth.true_positions;
  summary["delays_samples"] = out.truth.true_delays_samples;
  return summary;
}

int default_max_lag(const BandGeometry& g, std::size_t record_length) {
  const auto from_geometry =
      static_cast<long>(std::ceil(g.sensor_spacing() / g.wave_speed * g.sample_rate)) + 8;
  const long cap = static_cast<long>(record_length) - 1;
  return static_cast<int>(std::max(1L, std::min(from_geometry, cap)));
}

Json cmd_ccf(const MultichannelRecord& record, const std::optional<BandGeometry>& geometry,
             const LocatorOptions& locator, std::optional<int> max_lag,
             const std::optional<fs::path>& out_dir) {
  if (record.n_channels() != 2)
    throw DimensionError("ccf: expected a 2-channel record");
  const int lag = max_lag.value_or(
      geometry ? default_max_lag(*geometry, record.length())
               : static_cast<int>(std::max<std::size_t>(1, record.length() / 2)));
  const DelayEstimate d = delay_from_ccf(record, lag);

  if (out_dir) {
    const auto x = remove_mean(record);
    const auto& a = x.channel(0);
    const auto& b = x.channel(1);
    write_text_file(*out_dir / "R11.csv", correlation_csv(cross_correlation(a, a, lag)));
    write_text_file(*out_dir / "R22.csv", correlation_csv(cross_correlation(b, b, lag)));
    write_text_file(*out_dir / "R12.csv", correlation_csv(cross_correlation(a, b, lag)));
    write_text_file(*out_dir / "R21.csv", correlation_csv(cross_correlation(b, a, lag)));
  }

  Json j;
  j["max_lag_samples"] = lag;
  j["delay"] = to_json(d);
  j["degenerate"] = d.degenerate;
  if (geometry) {
    const auto protos = build_prototypes(*geometry, locator.spacing, locator.sigma);
    j["location"] = to_json(grnn_locate(d.delay_seconds, protos));
  }
  return j;
}

std::string convergence_csv(const std::vector<double>& pass_norms) {
  std::ostringstream out;
  out.precision(17);
  out << "pass,mean_update_norm\n";
  for (std::size_t p = 0; p < pass_norms.size(); ++p)
    out << (p + 1) << "," << pass_norms[p] << "\n";
  return out.str();
}

SeparateOutput cmd_separate(const MultichannelRecord& record, const IcaConfig& config,
                            const std::optional<fs::path>& out_dir) {
  IcaResult result = run_ica(record, config);
  std::vector<DelayEstimate> delays;
  if (result.mixing_time.n() == 2) delays = delays_from_mixing(result.mixing_time, record.sample_rate());

  if (out_dir) {
    write_text_file(*out_dir / "unmixing.json", to_json(result.unmixing_time).dump() + "\n");
    write_text_file(*out_dir / "mixing.json", to_json(result.mixing_time).dump() + "\n");
    write_record(result.sources_estimated, *out_dir / "sources.json");
    write_text_file(*out_dir / "convergence.csv", convergence_csv(result.pass_update_norms));
  }

  Json j;
  j["passes_used"] = result.passes_used;
  j["final_update_norm"] = result.final_update_norm;
  j["first_update_norm"] =
      result.pass_update_norms.empty() ? 0.0 : result.pass_update_norms.front();
  j["converged"] = result.converged;
  j["delays"] = to_json(delays);
  j["config"] = to_json(config);
  return {std::move(result), std::move(delays), std::move(j)};
}

Json cmd_locate(const std::vector<DelayEstimate>& delays, const BandGeometry& g,
                const LocatorOptions& locator) {
  const auto protos = build_prototypes(g, locator.spacing, locator.sigma);
  Json arr = Json::array();
  for (const auto& d : delays) {
    Json e = to_json(grnn_locate(d.delay_seconds, protos));
    e["source_index"] = d.source_index;
    e["confidence"] = finite_or_null(d.confidence);
    arr.push_back(std::move(e));
  }
  return arr;
}

Json cmd_pipeline(const Scenario& s, const IcaConfig& config,
                  const std::optional<fs::path>& out_dir, bool include_timings) {
  Json timings;
  auto stage = [&](const char* name, auto&& fn) {
    const auto t0 = Clock::now();
    try {
      auto v = fn();
      timings[name] = seconds_since(t0);
      return v;
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(name) + ": " + e.what(), e.bin(), e.pass());
    } catch (const IllConditionedError& e) {
      throw IllConditionedError(std::string(name) + ": " + e.what(), e.bin());
    } catch (const ParameterError& e) {
      throw ParameterError(std::string(name) + ": " + e.what());
    } catch (const DimensionError& e) {
      throw DimensionError(std::string(name) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(std::string(name) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(std::string(name) + ": " + e.what());
    }
  };

  const SynthOutput synth = stage("synth", [&] {
    if (out_dir) cmd_synth(s, *out_dir / "synth");
    return synthesize(s);
  });
  const auto& truth = synth.truth;

  const Json ccf = stage("ccf", [&] {
    return cmd_ccf(synth.record, s.geometry, s.locator, std::nullopt,
                   out_dir ? std::optional<fs::path>(*out_dir / "ccf") : std::nullopt);
  });

  SeparateOutput sep = stage("separate", [&] {
    return cmd_separate(synth.record, config,
                        out_dir ? std::optional<fs::path>(*out_dir / "separate") : std::nullopt);
  });

  const Json located = stage("locate", [&] { return cmd_locate(sep.delays, s.geometry, s.locator); });

  Json report;
  report["config"] = {{"scenario", to_json(s)}, {"ica", to_json(config)}};
  std::vector<double> active_positions;
  std::vector<bool> active;
  for (std::size_t j = 0; j < s.sources.size(); ++j) {
    active.push_back(s.sources[j].active);
    if (s.sources[j].active) active_positions.push_back(truth.true_positions[j]);
  }
  report["truth"] = {{"positions_m", truth.true_positions},
                     {"delays_samples", truth.true_delays_samples},
                     {"active", active}};

  Json ccf_part;
  ccf_part["delay"] = ccf["delay"];
  ccf_part["location"] = ccf["location"];
  const double ccf_y = ccf["location"]["coordinate_m"].get<double>();
  Json ccf_err = Json::array();
  for (double y : active_positions) ccf_err.push_back(1000.0 * std::abs(ccf_y - y));
  ccf_part["error_mm"] = std::move(ccf_err);
  ccf_part["sources_found"] = 1;
  report["ccf"] = std::move(ccf_part);

  Json ica_part;
  ica_part["delays"] = to_json(sep.delays);
  ica_part["locations"] = located;
  std::vector<double> ica_y;
  for (const auto& l : located) ica_y.push_back(l["coordinate_m"].get<double>());
  ica_part["error_mm"] = matched_errors_mm(ica_y, active_positions);
  ica_part["sources_found"] = located.size();
  ica_part["passes_used"] = sep.result.passes_used;
  ica_part["final_update_norm"] = sep.result.final_update_norm;
  ica_part["converged"] = sep.result.converged;
  report["ica"] = std::move(ica_part);

  double worst = 0.0;
  for (const auto& e : report["ica"]["error_mm"])
    worst = e.is_null() ? std::numeric_limits<double>::infinity()
                        : std::max(worst, e.get<double>());
  const double limit_mm = 0.03 * s.geometry.sensor_spacing() * 1000.0;
  report["summary"] = {{"ica_max_error_mm", finite_or_null(worst)},
                       {"error_limit_mm", limit_mm},
                       {"ica_within_limit", worst <= limit_mm}};
  if (include_timings) report["timings_s"] = timings;
  return report;
}

}  // namespace aebss
