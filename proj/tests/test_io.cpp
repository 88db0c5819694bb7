#include <filesystem>
#include <fstream>
#include <string>

#include "aebss/error.hpp"
#include "aebss/io.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace aebss;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aebss_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("binary record round trip") {
  const auto dir = scratch("binary");
  const auto rec = oracle::record_of({oracle::white_noise(777, 1), oracle::white_noise(777, 2)}, 2.5e5);
  write_record(rec, dir / "rec.json");
  CHECK(fs::exists(dir / "rec.f64"));
  CHECK(fs::file_size(dir / "rec.f64") == 2 * 777 * 8);
  const auto back = read_record(dir / "rec.json");
  CHECK(back == rec);
  const Json h = parse_json_file(dir / "rec.json");
  CHECK(h["sample_format"] == "f64-le");
  CHECK(h["n_channels"] == 2);
  CHECK(h["length"] == 777);
  CHECK(h["data_file"] == "rec.f64");
}

TEST_CASE("record header problems are reported") {
  const auto dir = scratch("bad");
  write_text_file(dir / "missing.json", R"({"n_channels": 2, "sample_rate": 1.0})");
  CHECK(error_of([&] { read_record(dir / "missing.json"); }).find("record.length") !=
        std::string::npos);
  write_text_file(dir / "fmt.json",
                  R"({"n_channels": 2, "sample_rate": 1, "length": 4, "sample_format": "i16", "data_file": "x"})");
  CHECK_THROWS_AS(read_record(dir / "fmt.json"), FormatError);
  write_text_file(dir / "short.json",
                  R"({"n_channels": 2, "sample_rate": 1, "length": 4, "sample_format": "f64-le", "data_file": "short.f64"})");
  write_text_file(dir / "short.f64", std::string(40, '\0'));
  CHECK_THROWS_AS(read_record(dir / "short.json"), FormatError);
  write_text_file(dir / "syntax.json", "{\"n_channels\": 2,\n  oops}");
  const auto msg = error_of([&] { parse_json_file(dir / "syntax.json"); });
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK_THROWS_AS(read_record(dir / "nope.json"), FormatError);
}

TEST_CASE("CSV record round trip and errors") {
  const auto dir = scratch("csv");
  const auto rec = oracle::record_of({{1.5, -2.0, 3.25}, {0.0, 1e-300, -7.0}}, 10.0);
  write_record_csv(rec, dir / "r.csv");
  CHECK(read_record_csv(dir / "r.csv", 10.0) == rec);
  write_text_file(dir / "bad.csv", "a,b\n1,2\n3,x\n");
  CHECK(error_of([&] { read_record_csv(dir / "bad.csv", 1.0); }).find("line 3") != std::string::npos);
  write_text_file(dir / "ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_record_csv(dir / "ragged.csv", 1.0), FormatError);
}

TEST_CASE("correlation CSV") {
  CorrelationFunction cf{{-1, 0, 1}, {0.5, 1.0, 0.25}};
  CHECK(correlation_csv(cf) == "lag,value\n-1,0.5\n0,1\n1,0.25\n");
}

TEST_CASE("filter matrix JSON round trip") {
  const std::size_t taps[2][2] = {{1, 2}, {3, 0}};
  const auto A = oracle::impulse_mixing(8, 4, taps);
  const Json j = to_json(A);
  CHECK(j["n"] == 2);
  CHECK(j["tap_length"] == 8);
  CHECK(j["role"] == "mixing");
  CHECK(j["zero_delay_tap"] == 4);
  CHECK(j["entries"].size() == 4);
  CHECK(filter_matrix_from_json(j) == A);
  Json bad = j;
  bad["entries"][3] = Json::array({1.0});
  CHECK_THROWS_AS(filter_matrix_from_json(bad), Error);
}

TEST_CASE("ICA config JSON") {
  IcaConfig c;
  c.fft_size = 512;
  c.learning_rate = 2e-3;
  c.permutation = PermutationAlignment::None;
  c.ridge = 0.0;
  const IcaConfig back = ica_config_from_json(to_json(c));
  CHECK(back.fft_size == 512);
  CHECK(back.hop == 512);
  CHECK(back.learning_rate == 2e-3);
  CHECK(back.permutation == PermutationAlignment::None);
  CHECK(back.ridge == 0.0);
  CHECK(ica_config_from_json(Json::object()).ridge < 0.0);
  const auto msg = error_of([] { ica_config_from_json(Json{{"learning_rte", 0.1}}); });
  CHECK(msg.find("ica_config.learning_rte") != std::string::npos);
  CHECK_THROWS_AS(ica_config_from_json(Json{{"fft_size", "big"}}), FormatError);
  CHECK_THROWS_AS(ica_config_from_json(Json{{"momentum", 1.5}}), ParameterError);
}

TEST_CASE("delay estimates JSON") {
  DelayEstimate d;
  d.source_index = 1;
  d.delay_samples = -40;
  d.delay_seconds = -4e-5;
  d.confidence = std::numeric_limits<double>::infinity();
  const Json j = to_json(std::vector<DelayEstimate>{d});
  CHECK(j[0]["confidence"].is_null());
  const auto back = delays_from_json(j, 1e6);
  CHECK(back[0].delay_samples == -40);
  CHECK(back[0].source_index == 1);
  const auto by_samples = delays_from_json(Json::parse(R"([{"delay_samples": 12}])"), 1e6);
  CHECK(by_samples[0].delay_seconds == doctest::Approx(12e-6));
  CHECK_THROWS_AS(delays_from_json(Json::object(), 1.0), FormatError);
}

TEST_CASE("geometry, prototypes and locate results") {
  const BandGeometry g;
  const Json j = to_json(g);
  CHECK(j["testing_range_m"] == Json::array({-1.1, 1.1}));
  const auto back = geometry_from_json(JsonReader(j, "geometry"));
  CHECK(back.sensor_2_pos == 1.2);
  CHECK(back.wave_speed == 5000.0);
  Json bad = j;
  bad.erase("sensor_1_pos_m");
  CHECK(error_of([&] { geometry_from_json(JsonReader(bad, "geometry")); })
            .find("geometry.sensor_1_pos_m") != std::string::npos);

  const Json p = to_json(build_prototypes(g, 0.1));
  CHECK(p["prototypes"].size() == 23);
  LocateResult r;
  r.coordinate = 0.5;
  r.out_of_range = true;
  const Json lj = to_json(r);
  CHECK(lj["coordinate_m"] == 0.5);
  CHECK(lj["flags"] == Json::array({"out_of_range"}));
}

TEST_CASE("source spec JSON") {
  const Json j = Json::parse(R"({"kind": "ar1", "ar_coefficient": 0.5, "position_m": 0.3, "seed": 9})");
  const auto s = source_spec_from_json(JsonReader(j, "src"));
  CHECK(s.kind == SourceKind::Ar1);
  CHECK(s.ar_coefficient == 0.5);
  CHECK(s.seed == 9);
  CHECK(s.active);
  const auto again = source_spec_from_json(JsonReader(to_json(s), "src"));
  CHECK(again.position == 0.3);
  CHECK_THROWS_AS(source_spec_from_json(JsonReader(Json{{"kind", "white"}}, "src")), FormatError);
  CHECK_THROWS_AS(source_spec_from_json(JsonReader(Json{{"position_m", 0.0}, {"colour", 1}}, "src")),
                  FormatError);
}

TEST_CASE("finite_or_null") {
  CHECK(finite_or_null(2.0) == 2.0);
  CHECK(finite_or_null(std::numeric_limits<double>::infinity()).is_null());
  CHECK(finite_or_null(std::nan("")).is_null());
}
