// Command-line front end: synth, ccf, separate, locate, pipeline.
//
// Exit codes: 0 success, 2 input error, 3 numerical divergence.  JSON results
// go to stdout, diagnostics to stderr.  AEBSS_LOG=0|1|2 sets verbosity.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "aebss/error.hpp"
#include "aebss/io.hpp"
#include "aebss/pipeline.hpp"

namespace fs = std::filesystem;
using namespace aebss;

namespace {

int log_level() {
  const char* v = std::getenv("AEBSS_LOG");
  if (v == nullptr) return 1;
  const std::string s(v);
  if (s == "0" || s == "quiet") return 0;
  if (s == "2" || s == "debug") return 2;
  return 1;
}

void log(int level, const std::string& msg) {
  if (level <= log_level()) std::cerr << "aebss: " << msg << "\n";
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

IcaConfig load_config(const std::string& path, const std::optional<Scenario>& scenario) {
  if (!path.empty()) {
    const Json j = parse_json_file(path);
    // A scenario document carries its config in an "ica" block.
    if (j.is_object() && j.contains("sources")) {
      if (!j.contains("ica")) throw FormatError(path + ": scenario has no 'ica' block");
      return ica_config_from_json(j.at("ica"));
    }
    return ica_config_from_json(j);
  }
  if (scenario && scenario->ica) return *scenario->ica;
  return IcaConfig{};
}

MultichannelRecord load_record(const std::string& path, double csv_rate) {
  if (fs::path(path).extension() == ".csv") return read_record_csv(path, csv_rate);
  return read_record(path);
}

Scenario load_scenario(const std::string& path, std::optional<long> seed) {
  Scenario s = scenario_from_json(parse_json_file(path));
  if (seed) {
    if (*seed < 0) throw FormatError("--seed must be >= 0");
    s.seed = static_cast<std::uint64_t>(*seed);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic-emission blind source separation and location"};
  app.require_subcommand(1);

  std::string scenario_path, record_path, config_path, geometry_path, filters_path,
      delays_path, out_dir;
  std::optional<double> spacing, sigma;
  std::optional<long> seed;
  std::optional<int> max_lag;
  double csv_rate = 1e6;
  bool timings = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic record and its ground truth");
  synth->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  synth->add_option("--seed", seed, "Override the scenario seed");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* ccf = app.add_subcommand("ccf", "Single-delay estimate from the cross-correlation peak");
  ccf->add_option("--record", record_path, "Record header JSON or CSV")->required();
  ccf->add_option("--geometry", geometry_path, "Geometry or scenario JSON");
  ccf->add_option("--prototypes-spacing", spacing, "Prototype spacing in meters");
  ccf->add_option("--sigma", sigma, "Kernel width in seconds");
  ccf->add_option("--max-lag", max_lag, "Correlation lag window in samples");
  ccf->add_option("--sample-rate", csv_rate, "Sample rate for CSV records");
  ccf->add_option("--out-dir", out_dir, "Directory for R11/R22/R12/R21 CSVs");

  auto* separate = app.add_subcommand("separate", "Frequency-domain ICA separation");
  separate->add_option("--record", record_path, "Record header JSON or CSV")->required();
  separate->add_option("--config", config_path, "ICA config JSON");
  separate->add_option("--sample-rate", csv_rate, "Sample rate for CSV records");
  separate->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* locate = app.add_subcommand("locate", "Locate sources from mixing filters or delays");
  auto* filters_opt = locate->add_option("--filters", filters_path, "Mixing filters JSON");
  auto* delays_opt = locate->add_option("--delays", delays_path, "Delay estimates JSON");
  filters_opt->excludes(delays_opt);
  locate->add_option("--geometry", geometry_path, "Geometry or scenario JSON")->required();
  locate->add_option("--prototypes-spacing", spacing, "Prototype spacing in meters");
  locate->add_option("--sigma", sigma, "Kernel width in seconds");

  auto* pipeline = app.add_subcommand("pipeline", "Synthesize, correlate, separate and locate");
  pipeline->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  pipeline->add_option("--config", config_path, "ICA config JSON");
  pipeline->add_option("--seed", seed, "Override the scenario seed");
  pipeline->add_option("--prototypes-spacing", spacing, "Prototype spacing in meters");
  pipeline->add_option("--sigma", sigma, "Kernel width in seconds");
  pipeline->add_option("--out-dir", out_dir, "Keep intermediate files here");
  pipeline->add_flag("--timings", timings, "Include stage timings in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto locator_options = [&](LocatorOptions base) {
    if (spacing) base.spacing = *spacing;
    if (sigma) base.sigma = *sigma;
    return base;
  };

  try {
    if (synth->parsed()) {
      emit(cmd_synth(load_scenario(scenario_path, seed), out_dir));
    } else if (ccf->parsed()) {
      std::optional<BandGeometry> g;
      if (!geometry_path.empty()) g = geometry_from_document(parse_json_file(geometry_path));
      emit(cmd_ccf(load_record(record_path, csv_rate), g, locator_options({}), max_lag,
                   out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir)));
    } else if (separate->parsed()) {
      const IcaConfig config = load_config(config_path, std::nullopt);
      if (config.learning_rate == 0.0)
        log(1, "warning: learning_rate is 0; filters stay at their initialization");
      auto out = cmd_separate(load_record(record_path, csv_rate), config, fs::path(out_dir));
      log(2, "separation used " + std::to_string(out.result.passes_used) + " passes");
      emit(out.summary);
    } else if (locate->parsed()) {
      const BandGeometry g = geometry_from_document(parse_json_file(geometry_path));
      std::vector<DelayEstimate> delays;
      if (!filters_path.empty()) {
        delays = delays_from_mixing(filter_matrix_from_json(parse_json_file(filters_path)),
                                    g.sample_rate);
      } else if (!delays_path.empty()) {
        delays = delays_from_json(parse_json_file(delays_path), g.sample_rate);
      } else {
        throw FormatError("locate needs --filters or --delays");
      }
      emit(cmd_locate(delays, g, locator_options({})));
    } else if (pipeline->parsed()) {
      Scenario s = load_scenario(scenario_path, seed);
      s.locator = locator_options(s.locator);
      const IcaConfig config = load_config(config_path, s);
      const Json report = cmd_pipeline(
          s, config, out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir), timings);
      emit(report);
    }
  } catch (const DivergenceError& e) {
    log(0, std::string("error: ") + e.what());
    return 3;
  } catch (const IllConditionedError& e) {
    log(0, std::string("error: ") + e.what());
    return 3;
  } catch (const Error& e) {
    log(0, std::string("error: ") + e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    log(0, std::string("error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log(0, std::string("error: ") + e.what());
    return 2;
  }
  return 0;
}
