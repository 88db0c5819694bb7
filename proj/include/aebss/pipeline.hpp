#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "aebss/ica.hpp"
#include "aebss/io.hpp"
#include "aebss/locator.hpp"
#include "aebss/synth.hpp"

namespace aebss {

struct LocatorOptions {
  double spacing = 0.1;
  std::optional<double> sigma;
};

// Everything needed to regenerate one synthetic experiment.
struct Scenario {
  BandGeometry geometry;
  std::vector<SourceSpec> sources;
  std::size_t duration_samples = 1 << 16;
  MixingOptions mixing;
  std::optional<double> noise_snr_db;
  std::uint64_t seed = 1;
  LocatorOptions locator;
  std::optional<IcaConfig> ica;
};

Scenario scenario_from_json(const Json& j);
Json to_json(const Scenario& s);

// The geometry block of either a scenario document or a bare geometry
// document.
BandGeometry geometry_from_document(const Json& j);

struct SynthOutput {
  std::vector<TimeSeries> sources;
  ScenarioTruth truth;
  MultichannelRecord record;
};

// Source j draws from derive_seed(derive_seed(scenario.seed, j), spec.seed).
SynthOutput synthesize(const Scenario& s);

// Writes record.json, record.f64 and truth.json into out_dir.
Json cmd_synth(const Scenario& s, const std::filesystem::path& out_dir);

// Default CCF lag window: the geometry's largest admissible delay plus a few
// samples of margin.
int default_max_lag(const BandGeometry& g, std::size_t record_length);

// Writes R11.csv, R22.csv, R12.csv and R21.csv when out_dir is given.
Json cmd_ccf(const MultichannelRecord& record,
             const std::optional<BandGeometry>& geometry,
             const LocatorOptions& locator, std::optional<int> max_lag,
             const std::optional<std::filesystem::path>& out_dir);

// Writes unmixing.json, mixing.json, sources.json/.f64 and convergence.csv
// when out_dir is given.
struct SeparateOutput {
  IcaResult result;
  std::vector<DelayEstimate> delays;
  Json summary;
};
SeparateOutput cmd_separate(const MultichannelRecord& record,
                            const IcaConfig& config,
                            const std::optional<std::filesystem::path>& out_dir);

Json cmd_locate(const std::vector<DelayEstimate>& delays, const BandGeometry& g,
                const LocatorOptions& locator);

// Synthesis, CCF, separation and location, compared against the truth.
Json cmd_pipeline(const Scenario& s, const IcaConfig& config,
                  const std::optional<std::filesystem::path>& out_dir,
                  bool include_timings = false);

std::string convergence_csv(const std::vector<double>& pass_norms);

}  // namespace aebss
