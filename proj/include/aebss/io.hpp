#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aebss/filter_matrix.hpp"
#include "aebss/ica.hpp"
#include "aebss/locator.hpp"
#include "aebss/signal.hpp"
#include "aebss/synth.hpp"
#include "aebss/tdoa.hpp"

namespace aebss {

using Json = nlohmann::ordered_json;

// Typed access to a JSON object that reports missing or mistyped fields by
// their dotted path.
class JsonReader {
 public:
  JsonReader(const Json& j, std::string path);

  bool has(const std::string& key) const;
  JsonReader child(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::optional<double> optional_number(const std::string& key) const;
  long integer(const std::string& key) const;
  long integer_or(const std::string& key, long fallback) const;
  std::string string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<JsonReader> array(const std::string& key) const;
  // Rejects keys outside `allowed`.
  void only(const std::vector<std::string>& allowed) const;

  const Json& json() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  const Json& at(const std::string& key) const;
  std::string field(const std::string& key) const;

  const Json& j_;
  std::string path_;
};

Json parse_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Record files: a JSON header plus channel-major little-endian float64 data.
void write_record(const MultichannelRecord& record,
                  const std::filesystem::path& header_path);
MultichannelRecord read_record(const std::filesystem::path& header_path);
// One column per channel, one header row.
MultichannelRecord read_record_csv(const std::filesystem::path& path,
                                   double sample_rate);
void write_record_csv(const MultichannelRecord& record,
                      const std::filesystem::path& path);

std::string correlation_csv(const CorrelationFunction& cf);

Json to_json(const FilterMatrix& f);
FilterMatrix filter_matrix_from_json(const Json& j);

Json to_json(const IcaConfig& c);
IcaConfig ica_config_from_json(const Json& j);

Json to_json(const DelayEstimate& d);
Json to_json(const std::vector<DelayEstimate>& d);
std::vector<DelayEstimate> delays_from_json(const Json& j, double sample_rate);

Json to_json(const BandGeometry& g);
BandGeometry geometry_from_json(const JsonReader& r);

Json to_json(const PrototypeSet& p);
Json to_json(const LocateResult& r);

Json to_json(const SourceSpec& s);
SourceSpec source_spec_from_json(const JsonReader& r);

Json to_json(const ScenarioTruth& t, double sample_rate);

// Finite numbers pass through; inf and nan become null.
Json finite_or_null(double v);

}  // namespace aebss
