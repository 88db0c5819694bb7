#include <algorithm>
#include <cmath>
#include <vector>

#include "aebss/error.hpp"
#include "aebss/locator.hpp"
#include "doctest.h"

using namespace aebss;

namespace {

// Worst |locate(delay(y)) - y| over interior points of the testing range.
double worst_interior_error(const BandGeometry& g, double spacing) {
  const auto p = build_prototypes(g, spacing);
  double worst = 0.0;
  for (int i = 0; i <= 1600; ++i) {
    const double y = -0.8 + 1.6 * i / 1600.0;
    worst = std::max(worst, std::abs(grnn_locate(delay_for_position(g, y), p).coordinate - y));
  }
  return worst;
}

}  // namespace

TEST_CASE("geometry validation") {
  BandGeometry g;
  CHECK_NOTHROW(g.validate());
  CHECK(g.sensor_spacing() == doctest::Approx(2.4));
  CHECK(g.max_delay_seconds() == doctest::Approx(2.2 / 5000.0));
  g.sensor_1_pos = 2.0;
  CHECK_THROWS_AS(g.validate(), ParameterError);
  g = {};
  g.range_max = 1.3;
  CHECK_THROWS_AS(g.validate(), ParameterError);
  g = {};
  g.wave_speed = 0.0;
  CHECK_THROWS_AS(g.validate(), ParameterError);
  g = {};
  g.range_min = 0.5;
  g.range_max = 0.5;
  CHECK_THROWS_AS(g.validate(), ParameterError);
}

TEST_CASE("delay_for_position examples") {
  const BandGeometry g;
  CHECK(delay_for_position(g, 0.0) == 0.0);
  CHECK(delay_for_position(g, -1.1) == doctest::Approx(4.4e-4).epsilon(1e-12));
  CHECK(delay_for_position(g, 0.1) == doctest::Approx(-40e-6).epsilon(1e-12));
  CHECK(delay_for_position(g, 0.8) == doctest::Approx(-320e-6).epsilon(1e-12));
  for (double y : {0.05, 0.3, 0.77, 1.1})
    CHECK(delay_for_position(g, -y) == doctest::Approx(-delay_for_position(g, y)));
  CHECK_THROWS_AS(delay_for_position(g, 1.15), ParameterError);
  CHECK_THROWS_AS(delay_for_position(g, -1.2), ParameterError);
}

TEST_CASE("build_prototypes grid") {
  const BandGeometry g;
  const auto p = build_prototypes(g, 0.1);
  REQUIRE(p.size() == 23);
  CHECK(p.prototypes().front().coordinate == doctest::Approx(-1.1));
  CHECK(p.prototypes().back().coordinate == doctest::Approx(1.1));
  for (std::size_t i = 1; i < p.size(); ++i)
    CHECK(p.prototypes()[i].delay_seconds < p.prototypes()[i - 1].delay_seconds);
  CHECK(p.sigma() == doctest::Approx(40e-6));
  CHECK(p.min_delay() == doctest::Approx(-4.4e-4));
  CHECK(p.max_delay() == doctest::Approx(4.4e-4));

  const auto two = build_prototypes(g, 2.2);
  CHECK(two.size() == 2);
  CHECK(two.prototypes()[0].coordinate == doctest::Approx(-1.1));
  CHECK(two.prototypes()[1].coordinate == doctest::Approx(1.1));

  CHECK(build_prototypes(g, 0.1, 1e-5).sigma() == 1e-5);
  CHECK_THROWS_AS(build_prototypes(g, 2.5), ParameterError);
  CHECK_THROWS_AS(build_prototypes(g, 0.0), ParameterError);
}

TEST_CASE("PrototypeSet validation") {
  CHECK_THROWS_AS(PrototypeSet({{0.0, 0.0}}, 1.0), ParameterError);
  CHECK_THROWS_AS(PrototypeSet({{0.0, 0.0}, {1.0, 1.0}}, 0.0), ParameterError);
  CHECK_THROWS_AS(PrototypeSet({{0.0, 0.0}, {0.0, 1.0}}, 1.0), ParameterError);
  CHECK_NOTHROW(PrototypeSet({{1.0, 0.0}, {0.0, 1.0}}, 1.0));
}

TEST_CASE("grnn_locate on prototype delays with a narrow kernel") {
  const BandGeometry g;
  const auto wide = build_prototypes(g, 0.1);
  const auto p = build_prototypes(g, 0.1, wide.sigma() / 100.0);
  for (const auto& proto : p.prototypes()) {
    const auto r = grnn_locate(proto.delay_seconds, p);
    CHECK(std::abs(r.coordinate - proto.coordinate) < 1e-9);
    CHECK_FALSE(r.out_of_range);
  }
}

TEST_CASE("grnn_locate midway between prototypes") {
  const BandGeometry g;
  const auto p = build_prototypes(g, 0.1);
  for (std::size_t i = 3; i + 4 < p.size(); ++i) {
    const auto& a = p.prototypes()[i];
    const auto& b = p.prototypes()[i + 1];
    const auto r = grnn_locate(0.5 * (a.delay_seconds + b.delay_seconds), p);
    CHECK(std::abs(r.coordinate - 0.5 * (a.coordinate + b.coordinate)) < 0.01 * 0.1);
  }
  CHECK(std::abs(grnn_locate(0.0, p).coordinate) < 1e-12);
}

TEST_CASE("grnn_locate stays in the hull and is monotone") {
  const BandGeometry g;
  const auto p = build_prototypes(g, 0.1);
  const double lo = p.prototypes().front().coordinate, hi = p.prototypes().back().coordinate;
  double prev = hi + 1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double d = -6e-4 + 1.2e-3 * i / 10000.0;
    const auto r = grnn_locate(d, p);
    CHECK(r.coordinate >= lo);
    CHECK(r.coordinate <= hi);
    CHECK(r.coordinate <= prev);
    prev = r.coordinate;
    CHECK(r.out_of_range == (d < p.min_delay() || d > p.max_delay()));
  }
}

TEST_CASE("grnn_locate falls back to the nearest prototype when weights underflow") {
  const BandGeometry g;
  const auto p = build_prototypes(g, 0.1, 1e-9);
  const auto r = grnn_locate(1.0, p);
  CHECK(r.nearest_fallback);
  CHECK(r.out_of_range);
  CHECK(r.coordinate == doctest::Approx(-1.1));
  CHECK_THROWS_AS(grnn_locate(std::nan(""), p), ParameterError);
}

TEST_CASE("halving the prototype spacing halves the interior error") {
  const BandGeometry g;
  const double e1 = worst_interior_error(g, 0.1);
  const double e2 = worst_interior_error(g, 0.05);
  CHECK(e2 < e1);
  CHECK(e2 <= 1.5 * 0.5 * e1);
  const double e4 = worst_interior_error(g, 0.025);
  CHECK(e4 <= 1.5 * 0.5 * e2);
}
