#include "aebss/locator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aebss/error.hpp"

namespace aebss {
namespace {

// Grid endpoints computed as min + i * spacing can overshoot by an ulp.
constexpr double kRangeSlack = 1e-9;

}  // namespace

void BandGeometry::validate() const {
  if (!(sensor_1_pos < sensor_2_pos))
    throw ParameterError("geometry: sensor_1_pos must be < sensor_2_pos");
  if (!(range_min < range_max))
    throw ParameterError("geometry: testing range is empty");
  if (!(range_min > sensor_1_pos && range_max < sensor_2_pos))
    throw ParameterError("geometry: testing range must lie between the sensors");
  if (!(wave_speed > 0.0)) throw ParameterError("geometry: wave_speed must be > 0");
  if (!(sample_rate > 0.0)) throw ParameterError("geometry: sample_rate must be > 0");
}

double BandGeometry::max_delay_seconds() const {
  return std::max(std::abs(delay_for_position(*this, range_min)),
                  std::abs(delay_for_position(*this, range_max)));
}

double delay_for_position(const BandGeometry& g, double y) {
  if (y < g.range_min - kRangeSlack || y > g.range_max + kRangeSlack)
    throw ParameterError("position " + std::to_string(y) +
                         " m is outside the testing range");
  return (std::abs(y - g.sensor_2_pos) - std::abs(y - g.sensor_1_pos)) /
         g.wave_speed;
}

PrototypeSet::PrototypeSet(std::vector<Prototype> prototypes, double sigma)
    : prototypes_(std::move(prototypes)), sigma_(sigma) {
  if (prototypes_.size() < 2)
    throw ParameterError("PrototypeSet: need at least 2 prototypes");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_))
    throw ParameterError("PrototypeSet: sigma must be positive");
  std::sort(prototypes_.begin(), prototypes_.end(),
            [](const Prototype& a, const Prototype& b) {
              return a.coordinate < b.coordinate;
            });
  for (std::size_t i = 1; i < prototypes_.size(); ++i) {
    const double a = prototypes_[i - 1].delay_seconds;
    const double b = prototypes_[i].delay_seconds;
    const bool rising = prototypes_[1].delay_seconds > prototypes_[0].delay_seconds;
    if (prototypes_[i].coordinate == prototypes_[i - 1].coordinate ||
        (rising ? !(b > a) : !(b < a)))
      throw ParameterError(
          "PrototypeSet: delays must be strictly monotone in coordinate");
  }
}

double PrototypeSet::min_delay() const {
  return std::min(prototypes_.front().delay_seconds,
                  prototypes_.back().delay_seconds);
}

double PrototypeSet::max_delay() const {
  return std::max(prototypes_.front().delay_seconds,
                  prototypes_.back().delay_seconds);
}

double median_delay_gap(const std::vector<Prototype>& prototypes) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < prototypes.size(); ++i)
    gaps.push_back(
        std::abs(prototypes[i].delay_seconds - prototypes[i - 1].delay_seconds));
  if (gaps.empty()) throw ParameterError("median_delay_gap: need 2 prototypes");
  std::sort(gaps.begin(), gaps.end());
  const std::size_t m = gaps.size() / 2;
  return gaps.size() % 2 == 1 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
}

PrototypeSet build_prototypes(const BandGeometry& g, double spacing,
                              std::optional<double> sigma) {
  g.validate();
  if (!(spacing > 0.0)) throw ParameterError("prototype spacing must be > 0");
  const double range = g.range_max - g.range_min;
  if (spacing > range * (1.0 + kRangeSlack))
    throw ParameterError("prototype spacing exceeds the testing range");
  const auto steps = static_cast<std::size_t>(std::floor(range / spacing + 1e-9));
  std::vector<Prototype> protos;
  protos.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double y =
        std::min(g.range_min + static_cast<double>(i) * spacing, g.range_max);
    protos.push_back({delay_for_position(g, y), y});
  }
  const double s = sigma.value_or(median_delay_gap(protos));
  return PrototypeSet(std::move(protos), s);
}

LocateResult grnn_locate(double delay_seconds, const PrototypeSet& p) {
  if (!std::isfinite(delay_seconds)) throw ParameterError("delay must be finite");
  LocateResult r;
  r.delay_seconds = delay_seconds;
  r.out_of_range = delay_seconds < p.min_delay() || delay_seconds > p.max_delay();
  const double two_sigma2 = 2.0 * p.sigma() * p.sigma();
  double num = 0.0;
  double den = 0.0;
  for (const auto& proto : p.prototypes()) {
    const double d = delay_seconds - proto.delay_seconds;
    const double w = std::exp(-(d * d) / two_sigma2);
    num += w * proto.coordinate;
    den += w;
  }
  if (den > 0.0) {
    // A convex combination; clamp away rounding at the hull edges.
    r.coordinate = std::clamp(num / den, p.prototypes().front().coordinate,
                              p.prototypes().back().coordinate);
    return r;
  }
  r.nearest_fallback = true;
  const auto nearest = std::min_element(
      p.prototypes().begin(), p.prototypes().end(),
      [&](const Prototype& a, const Prototype& b) {
        return std::abs(a.delay_seconds - delay_seconds) <
               std::abs(b.delay_seconds - delay_seconds);
      });
  r.coordinate = nearest->coordinate;
  return r;
}

}  // namespace aebss
