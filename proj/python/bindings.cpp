#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aebss/error.hpp"
#include "aebss/ica.hpp"
#include "aebss/io.hpp"
#include "aebss/locator.hpp"
#include "aebss/pipeline.hpp"
#include "aebss/signal.hpp"
#include "aebss/synth.hpp"
#include "aebss/tdoa.hpp"

namespace py = pybind11;
using namespace aebss;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

TimeSeries to_series(const Array& a, double rate) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
  return TimeSeries(std::vector<double>(a.data(), a.data() + a.size()), rate);
}

MultichannelRecord to_record(const Array& a, double rate) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-D array (channels, samples)");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto t = static_cast<std::size_t>(a.shape(1));
  std::vector<TimeSeries> ch;
  for (std::size_t i = 0; i < n; ++i)
    ch.emplace_back(std::vector<double>(a.data() + i * t, a.data() + (i + 1) * t), rate);
  return MultichannelRecord(std::move(ch));
}

// The (count, ptr) constructor can yield zero strides; go through a shape.
template <typename T>
py::array_t<T> vector_array(std::span<const T> v) {
  py::array_t<T> out(py::array::ShapeContainer{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array from_series(const TimeSeries& s) { return vector_array(s.samples()); }

Array from_record(const MultichannelRecord& r) {
  Array out({static_cast<py::ssize_t>(r.n_channels()), static_cast<py::ssize_t>(r.length())});
  double* p = out.mutable_data();
  for (const auto& c : r.channels()) p = std::copy(c.samples().begin(), c.samples().end(), p);
  return out;
}

// (n, n, L) tap array.
Array from_filters(const FilterMatrix& f) {
  const auto n = static_cast<py::ssize_t>(f.n());
  const auto L = static_cast<py::ssize_t>(f.tap_length());
  Array out({n, n, L});
  double* p = out.mutable_data();
  for (const auto& e : f.entries()) p = std::copy(e.taps().begin(), e.taps().end(), p);
  return out;
}

FilterMatrix to_filters(const Array& a, std::size_t zero_delay_tap, FilterRole role) {
  if (a.ndim() != 3 || a.shape(0) != a.shape(1))
    throw DimensionError("expected an (n, n, L) tap array");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto L = static_cast<std::size_t>(a.shape(2));
  std::vector<FirFilter> entries;
  for (std::size_t e = 0; e < n * n; ++e)
    entries.emplace_back(std::vector<double>(a.data() + e * L, a.data() + (e + 1) * L));
  return FilterMatrix(n, std::move(entries), role, zero_delay_tap);
}

py::dict delay_dict(const DelayEstimate& d) {
  py::dict out;
  out["source_index"] = d.source_index;
  out["delay_samples"] = d.delay_samples;
  out["delay_seconds"] = d.delay_seconds;
  out["confidence"] = d.confidence;
  out["degenerate"] = d.degenerate;
  return out;
}

}  // namespace

PYBIND11_MODULE(_aebss, m) {
  m.doc() = "Acoustic-emission blind source separation, delay estimation and location";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());
  py::register_exception<MissingSourceError>(m, "MissingSourceError", base.ptr());
  py::register_exception<IllConditionedError>(m, "IllConditionedError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

  m.def("remove_mean", [](const Array& x) { return from_series(remove_mean(to_series(x, 1.0))); },
        py::arg("x"));

  m.def(
      "cross_correlation",
      [](const Array& a, const Array& b, int max_lag) {
        const auto r = cross_correlation(to_series(a, 1.0), to_series(b, 1.0), max_lag);
        return py::make_tuple(vector_array(std::span<const int>(r.lags)),
                              vector_array(std::span<const double>(r.values)));
      },
      py::arg("a"), py::arg("b"), py::arg("max_lag"),
      "Returns (lags, values) of sum_t a(t) b(t+lag) / overlap.");

  m.def(
      "find_highest_peak",
      [](const Array& v) {
        const auto p = find_highest_peak(std::span<const double>(v.data(), v.size()));
        py::dict out;
        out["position"] = p.position;
        out["value"] = p.value;
        out["prominence"] = p.prominence;
        out["degenerate"] = p.degenerate;
        return out;
      },
      py::arg("values"));

  m.def(
      "delay_from_ccf",
      [](const Array& x, double sample_rate, int max_lag) {
        return delay_dict(delay_from_ccf(to_record(x, sample_rate), max_lag));
      },
      py::arg("x"), py::arg("sample_rate"), py::arg("max_lag"));

  m.def(
      "delays_from_mixing",
      [](const Array& taps, std::size_t zero_delay_tap, double sample_rate) {
        py::list out;
        for (const auto& d :
             delays_from_mixing(to_filters(taps, zero_delay_tap, FilterRole::Mixing), sample_rate))
          out.append(delay_dict(d));
        return out;
      },
      py::arg("taps"), py::arg("zero_delay_tap"), py::arg("sample_rate"));

  m.def(
      "apply_filter_matrix",
      [](const Array& taps, const Array& x, std::size_t zero_delay_tap) {
        return from_record(apply_filter_matrix(
            to_filters(taps, zero_delay_tap, FilterRole::Mixing), to_record(x, 1.0)));
      },
      py::arg("taps"), py::arg("x"), py::arg("zero_delay_tap") = 0);

  m.def(
      "run_ica",
      [](const Array& x, double sample_rate, const std::string& config_json) {
        const IcaConfig cfg = config_json.empty()
                                  ? IcaConfig{}
                                  : ica_config_from_json(Json::parse(config_json));
        const MultichannelRecord record = to_record(x, sample_rate);
        std::optional<IcaResult> result;
        {
          py::gil_scoped_release release;
          result.emplace(run_ica(record, cfg));
        }
        const IcaResult& r = *result;
        py::dict out;
        out["mixing"] = from_filters(r.mixing_time);
        out["unmixing"] = from_filters(r.unmixing_time);
        out["zero_delay_tap"] = r.mixing_time.zero_delay_tap();
        out["sources"] = from_record(r.sources_estimated);
        out["passes_used"] = r.passes_used;
        out["final_update_norm"] = r.final_update_norm;
        out["converged"] = r.converged;
        out["pass_update_norms"] = r.pass_update_norms;
        return out;
      },
      py::arg("x"), py::arg("sample_rate"), py::arg("config_json") = "");

  py::class_<BandGeometry>(m, "BandGeometry")
      .def(py::init<>())
      .def_readwrite("sensor_1_pos", &BandGeometry::sensor_1_pos)
      .def_readwrite("sensor_2_pos", &BandGeometry::sensor_2_pos)
      .def_readwrite("range_min", &BandGeometry::range_min)
      .def_readwrite("range_max", &BandGeometry::range_max)
      .def_readwrite("wave_speed", &BandGeometry::wave_speed)
      .def_readwrite("sample_rate", &BandGeometry::sample_rate);

  m.def("delay_for_position", &delay_for_position, py::arg("geometry"), py::arg("y"));

  py::class_<PrototypeSet>(m, "PrototypeSet")
      .def_property_readonly("sigma", &PrototypeSet::sigma)
      .def_property_readonly("coordinates",
                             [](const PrototypeSet& p) {
                               std::vector<double> v;
                               for (const auto& x : p.prototypes()) v.push_back(x.coordinate);
                               return v;
                             })
      .def_property_readonly("delays", [](const PrototypeSet& p) {
        std::vector<double> v;
        for (const auto& x : p.prototypes()) v.push_back(x.delay_seconds);
        return v;
      });

  m.def("build_prototypes", &build_prototypes, py::arg("geometry"), py::arg("spacing"),
        py::arg("sigma") = std::nullopt);

  m.def(
      "grnn_locate",
      [](double delay, const PrototypeSet& p) {
        const auto r = grnn_locate(delay, p);
        py::dict out;
        out["coordinate_m"] = r.coordinate;
        out["nearest_fallback"] = r.nearest_fallback;
        out["out_of_range"] = r.out_of_range;
        return out;
      },
      py::arg("delay_seconds"), py::arg("prototypes"));

  m.def(
      "generate_source",
      [](const std::string& kind, std::size_t duration, double sample_rate, std::uint64_t seed,
         double power, double modulation_depth) {
        SourceSpec s;
        s.kind = source_kind_from_string(kind);
        s.seed = seed;
        s.power = power;
        s.modulation_depth = modulation_depth;
        return from_series(generate_source(s, duration, sample_rate));
      },
      py::arg("kind"), py::arg("duration"), py::arg("sample_rate"), py::arg("seed"),
      py::arg("power") = 1.0, py::arg("modulation_depth") = 1.0);

  m.def(
      "run_pipeline",
      [](const std::string& scenario_json, std::optional<std::uint64_t> seed) {
        Scenario s = scenario_from_json(Json::parse(scenario_json));
        if (seed) s.seed = *seed;
        const IcaConfig cfg = s.ica.value_or(IcaConfig{});
        Json report;
        {
          py::gil_scoped_release release;
          report = cmd_pipeline(s, cfg, std::nullopt);
        }
        return report.dump();
      },
      py::arg("scenario_json"), py::arg("seed") = std::nullopt,
      "Runs the full pipeline and returns the report as a JSON string.");
}
