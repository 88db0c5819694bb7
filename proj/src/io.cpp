#include "aebss/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "aebss/error.hpp"

namespace aebss {
namespace fs = std::filesystem;

JsonReader::JsonReader(const Json& j, std::string path)
    : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw FormatError(path_ + ": expected a JSON object");
}

std::string JsonReader::field(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool JsonReader::has(const std::string& key) const {
  return j_.contains(key) && !j_.at(key).is_null();
}

const Json& JsonReader::at(const std::string& key) const {
  if (!j_.contains(key)) throw FormatError("missing field '" + field(key) + "'");
  return j_.at(key);
}

JsonReader JsonReader::child(const std::string& key) const {
  return JsonReader(at(key), field(key));
}

double JsonReader::number(const std::string& key) const {
  const Json& v = at(key);
  if (!v.is_number()) throw FormatError("field '" + field(key) + "' must be a number");
  return v.get<double>();
}

double JsonReader::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::optional<double> JsonReader::optional_number(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

long JsonReader::integer(const std::string& key) const {
  const Json& v = at(key);
  if (v.is_number_integer()) return v.get<long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d) return static_cast<long>(d);
  }
  throw FormatError("field '" + field(key) + "' must be an integer");
}

long JsonReader::integer_or(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::string JsonReader::string(const std::string& key) const {
  const Json& v = at(key);
  if (!v.is_string()) throw FormatError("field '" + field(key) + "' must be a string");
  return v.get<std::string>();
}

std::string JsonReader::string_or(const std::string& key,
                                  const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

bool JsonReader::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_boolean()) throw FormatError("field '" + field(key) + "' must be a boolean");
  return v.get<bool>();
}

std::vector<double> JsonReader::numbers(const std::string& key) const {
  const Json& v = at(key);
  if (!v.is_array()) throw FormatError("field '" + field(key) + "' must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw FormatError("field '" + field(key) + "[" + std::to_string(i) +
                        "]' must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<JsonReader> JsonReader::array(const std::string& key) const {
  const Json& v = at(key);
  if (!v.is_array()) throw FormatError("field '" + field(key) + "' must be an array");
  std::vector<JsonReader> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.emplace_back(v[i], field(key) + "[" + std::to_string(i) + "]");
  return out;
}

void JsonReader::only(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : j_.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw FormatError("unknown field '" + field(key) + "'");
  }
}

Json parse_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

namespace {

void put_f64_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  out.write(bytes, 8);
}

double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_record(const MultichannelRecord& record, const fs::path& header_path) {
  fs::path data_path = header_path;
  data_path.replace_extension(".f64");
  if (header_path.has_parent_path()) fs::create_directories(header_path.parent_path());
  {
    std::ofstream out(data_path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + data_path.string());
    for (const auto& ch : record.channels())
      for (double v : ch.samples()) put_f64_le(out, v);
  }
  Json h;
  h["n_channels"] = record.n_channels();
  h["sample_rate"] = record.sample_rate();
  h["length"] = record.length();
  h["sample_format"] = "f64-le";
  h["data_file"] = data_path.filename().string();
  write_text_file(header_path, h.dump(2) + "\n");
}

MultichannelRecord read_record(const fs::path& header_path) {
  if (header_path.extension() == ".csv")
    throw FormatError(header_path.string() +
                      ": CSV records need a sample rate; use read_record_csv");
  const Json j = parse_json_file(header_path);
  const JsonReader r(j, "record");
  const long n = r.integer("n_channels");
  const double rate = r.number("sample_rate");
  const long length = r.integer("length");
  const std::string format = r.string("sample_format");
  if (format != "f64-le")
    throw FormatError("record.sample_format: unsupported format '" + format + "'");
  if (n < 2) throw FormatError("record.n_channels must be >= 2");
  if (length < 1) throw FormatError("record.length must be >= 1");
  const fs::path data_path = header_path.parent_path() / r.string("data_file");

  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw FormatError("cannot open data file " + data_path.string());
  const std::size_t count = static_cast<std::size_t>(n) * static_cast<std::size_t>(length);
  std::vector<unsigned char> bytes(count * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw FormatError(data_path.string() + ": expected " + std::to_string(bytes.size()) +
                      " bytes of sample data");
  std::vector<TimeSeries> channels;
  for (long c = 0; c < n; ++c) {
    std::vector<double> v(static_cast<std::size_t>(length));
    for (long t = 0; t < length; ++t)
      v[t] = get_f64_le(bytes.data() + 8 * (c * length + t));
    channels.emplace_back(std::move(v), rate);
  }
  return MultichannelRecord(std::move(channels));
}

MultichannelRecord read_record_csv(const fs::path& path, double sample_rate) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<std::vector<double>> data(columns);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= columns)
        throw FormatError(path.string() + ": line " + std::to_string(row) +
                          " has more columns than the header");
      try {
        std::size_t used = 0;
        data[c].push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw FormatError(path.string() + ": line " + std::to_string(row) +
                          ", column " + std::to_string(c + 1) + ": not a number");
      }
      ++c;
    }
    if (c != columns)
      throw FormatError(path.string() + ": line " + std::to_string(row) +
                        " has " + std::to_string(c) + " columns, expected " +
                        std::to_string(columns));
  }
  std::vector<TimeSeries> channels;
  for (auto& d : data) channels.emplace_back(std::move(d), sample_rate);
  return MultichannelRecord(std::move(channels));
}

void write_record_csv(const MultichannelRecord& record, const fs::path& path) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t c = 0; c < record.n_channels(); ++c)
    out << (c ? "," : "") << "ch" << (c + 1);
  out << "\n";
  for (std::size_t t = 0; t < record.length(); ++t) {
    for (std::size_t c = 0; c < record.n_channels(); ++c)
      out << (c ? "," : "") << record.channel(c)[t];
    out << "\n";
  }
  write_text_file(path, out.str());
}

std::string correlation_csv(const CorrelationFunction& cf) {
  std::ostringstream out;
  out.precision(17);
  out << "lag,value\n";
  for (std::size_t i = 0; i < cf.lags.size(); ++i)
    out << cf.lags[i] << "," << cf.values[i] << "\n";
  return out.str();
}

Json finite_or_null(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json to_json(const FilterMatrix& f) {
  Json j;
  j["n"] = f.n();
  j["tap_length"] = f.tap_length();
  j["role"] = to_string(f.role());
  j["zero_delay_tap"] = f.zero_delay_tap();
  Json entries = Json::array();
  for (const auto& e : f.entries())
    entries.push_back(std::vector<double>(e.taps().begin(), e.taps().end()));
  j["entries"] = std::move(entries);
  return j;
}

FilterMatrix filter_matrix_from_json(const Json& j) {
  const JsonReader r(j, "filters");
  const long n = r.integer("n");
  const long L = r.integer("tap_length");
  if (n < 2 || L < 1) throw FormatError("filters: n must be >= 2 and tap_length >= 1");
  const auto entries = r.json().at("entries");
  if (!entries.is_array() || entries.size() != static_cast<std::size_t>(n * n))
    throw FormatError("filters.entries must hold n*n tap arrays");
  std::vector<FirFilter> filters;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& taps = entries[e];
    if (!taps.is_array() || taps.size() != static_cast<std::size_t>(L))
      throw FormatError("filters.entries[" + std::to_string(e) +
                        "] must hold tap_length numbers");
    filters.emplace_back(taps.get<std::vector<double>>());
  }
  return FilterMatrix(static_cast<std::size_t>(n), std::move(filters),
                      filter_role_from_string(r.string("role")),
                      static_cast<std::size_t>(r.integer_or("zero_delay_tap", 0)));
}

Json to_json(const IcaConfig& c) {
  Json j;
  j["fft_size"] = c.fft_size;
  j["hop"] = c.effective_hop();
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["max_passes"] = c.max_passes;
  j["convergence_tol"] = c.convergence_tol;
  j["seed"] = c.seed;
  j["permutation"] = to_string(c.permutation);
  j["phase_normalization"] = c.phase_normalization;
  if (c.ridge >= 0.0)
    j["ridge"] = c.ridge;
  else
    j["ridge"] = nullptr;
  return j;
}

IcaConfig ica_config_from_json(const Json& j) {
  const JsonReader r(j, "ica_config");
  r.only({"fft_size", "hop", "learning_rate", "momentum", "max_passes",
          "convergence_tol", "seed", "permutation", "phase_normalization", "ridge"});
  IcaConfig c;
  auto non_negative = [&](const std::string& key, long fallback) {
    const long v = r.integer_or(key, fallback);
    if (v < 0) throw FormatError("field 'ica_config." + key + "' must be >= 0");
    return static_cast<std::size_t>(v);
  };
  c.fft_size = non_negative("fft_size", static_cast<long>(c.fft_size));
  c.hop = non_negative("hop", 0);
  c.learning_rate = r.number_or("learning_rate", c.learning_rate);
  c.momentum = r.number_or("momentum", c.momentum);
  c.max_passes = non_negative("max_passes", static_cast<long>(c.max_passes));
  c.convergence_tol = r.number_or("convergence_tol", c.convergence_tol);
  c.seed = non_negative("seed", 0);
  c.permutation = permutation_alignment_from_string(
      r.string_or("permutation", to_string(c.permutation)));
  c.phase_normalization = r.boolean_or("phase_normalization", c.phase_normalization);
  c.ridge = r.number_or("ridge", -1.0);
  c.validate();
  return c;
}

Json to_json(const DelayEstimate& d) {
  Json j;
  j["source_index"] = d.source_index;
  j["delay_samples"] = d.delay_samples;
  j["delay_seconds"] = d.delay_seconds;
  j["confidence"] = finite_or_null(d.confidence);
  return j;
}

Json to_json(const std::vector<DelayEstimate>& d) {
  Json arr = Json::array();
  for (const auto& e : d) arr.push_back(to_json(e));
  return arr;
}

std::vector<DelayEstimate> delays_from_json(const Json& j, double sample_rate) {
  if (!j.is_array()) throw FormatError("delays: expected a JSON array");
  std::vector<DelayEstimate> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const JsonReader r(j[i], "delays[" + std::to_string(i) + "]");
    DelayEstimate d;
    d.source_index = static_cast<std::size_t>(r.integer_or("source_index", static_cast<long>(i)));
    if (r.has("delay_seconds")) {
      d.delay_seconds = r.number("delay_seconds");
      d.delay_samples = std::lround(d.delay_seconds * sample_rate);
    } else {
      d.delay_samples = r.integer("delay_samples");
      d.delay_seconds = static_cast<double>(d.delay_samples) / sample_rate;
    }
    d.confidence = r.number_or("confidence", 1.0);
    out.push_back(d);
  }
  return out;
}

Json to_json(const BandGeometry& g) {
  Json j;
  j["sensor_1_pos_m"] = g.sensor_1_pos;
  j["sensor_2_pos_m"] = g.sensor_2_pos;
  j["testing_range_m"] = {g.range_min, g.range_max};
  j["wave_speed_m_per_s"] = g.wave_speed;
  j["sample_rate_hz"] = g.sample_rate;
  return j;
}

BandGeometry geometry_from_json(const JsonReader& r) {
  r.only({"sensor_1_pos_m", "sensor_2_pos_m", "testing_range_m",
          "wave_speed_m_per_s", "sample_rate_hz"});
  BandGeometry g;
  g.sensor_1_pos = r.number("sensor_1_pos_m");
  g.sensor_2_pos = r.number("sensor_2_pos_m");
  const auto range = r.numbers("testing_range_m");
  if (range.size() != 2)
    throw FormatError("field '" + r.path() + ".testing_range_m' must hold [min, max]");
  g.range_min = range[0];
  g.range_max = range[1];
  g.wave_speed = r.number_or("wave_speed_m_per_s", g.wave_speed);
  g.sample_rate = r.number_or("sample_rate_hz", g.sample_rate);
  try {
    g.validate();
  } catch (const ParameterError& e) {
    throw FormatError(r.path() + ": " + e.what());
  }
  return g;
}

Json to_json(const PrototypeSet& p) {
  Json j;
  j["sigma_s"] = p.sigma();
  Json arr = Json::array();
  for (const auto& proto : p.prototypes())
    arr.push_back({{"delay_s", proto.delay_seconds}, {"coordinate_m", proto.coordinate}});
  j["prototypes"] = std::move(arr);
  return j;
}

Json to_json(const LocateResult& r) {
  Json j;
  j["coordinate_m"] = r.coordinate;
  j["delay_s"] = r.delay_seconds;
  Json flags = Json::array();
  if (r.nearest_fallback) flags.push_back("nearest_fallback");
  if (r.out_of_range) flags.push_back("out_of_range");
  j["flags"] = std::move(flags);
  return j;
}

Json to_json(const SourceSpec& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == SourceKind::Bandpass) {
    j["low_hz"] = s.low_hz;
    j["high_hz"] = s.high_hz;
  }
  if (s.kind == SourceKind::Ar1) j["ar_coefficient"] = s.ar_coefficient;
  j["power"] = s.power;
  j["position_m"] = s.position;
  j["seed"] = s.seed;
  j["modulation_depth"] = s.modulation_depth;
  j["modulation_correlation_samples"] = s.modulation_correlation;
  j["active"] = s.active;
  return j;
}

SourceSpec source_spec_from_json(const JsonReader& r) {
  r.only({"kind", "low_hz", "high_hz", "ar_coefficient", "power", "position_m",
          "seed", "modulation_depth", "modulation_correlation_samples", "active"});
  SourceSpec s;
  s.kind = source_kind_from_string(r.string_or("kind", to_string(s.kind)));
  s.low_hz = r.number_or("low_hz", s.low_hz);
  s.high_hz = r.number_or("high_hz", s.high_hz);
  s.ar_coefficient = r.number_or("ar_coefficient", s.ar_coefficient);
  s.power = r.number_or("power", s.power);
  s.position = r.number("position_m");
  if (r.has("seed")) {
    const long seed = r.integer("seed");
    if (seed < 0) throw FormatError("field '" + r.path() + ".seed' must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  s.modulation_depth = r.number_or("modulation_depth", s.modulation_depth);
  s.modulation_correlation =
      r.number_or("modulation_correlation_samples", s.modulation_correlation);
  s.active = r.boolean_or("active", true);
  return s;
}

Json to_json(const ScenarioTruth& t, double sample_rate) {
  Json j;
  j["positions_m"] = t.true_positions;
  j["delays_samples"] = t.true_delays_samples;
  std::vector<double> secs;
  for (long d : t.true_delays_samples) secs.push_back(static_cast<double>(d) / sample_rate);
  j["delays_s"] = secs;
  j["mixing"] = to_json(t.mixing);
  return j;
}

}  // namespace aebss
