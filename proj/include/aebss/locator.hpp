#pragma once

#include <optional>
#include <vector>

namespace aebss {

// 1-D band with two sensors; coordinates in meters from mid-band.
struct BandGeometry {
  double sensor_1_pos = -1.2;
  double sensor_2_pos = 1.2;
  double range_min = -1.1;
  double range_max = 1.1;
  double wave_speed = 5000.0;  // m/s
  double sample_rate = 1e6;    // Hz

  void validate() const;
  double sensor_spacing() const { return sensor_2_pos - sensor_1_pos; }
  // Largest |delay| any in-range source can produce, in seconds.
  double max_delay_seconds() const;
};

// (|y - s2| - |y - s1|) / c.  Decreasing in y.
double delay_for_position(const BandGeometry& g, double y);

struct Prototype {
  double delay_seconds;
  double coordinate;
};

class PrototypeSet {
 public:
  PrototypeSet(std::vector<Prototype> prototypes, double sigma);

  const std::vector<Prototype>& prototypes() const { return prototypes_; }
  double sigma() const { return sigma_; }
  std::size_t size() const { return prototypes_.size(); }
  double min_delay() const;
  double max_delay() const;

 private:
  std::vector<Prototype> prototypes_;
  double sigma_;
};

// Median gap between adjacent prototype delays.
double median_delay_gap(const std::vector<Prototype>& prototypes);

// Prototypes at range_min, range_min + spacing, ... up to range_max.  Without
// a sigma the kernel width is the median adjacent delay gap.
PrototypeSet build_prototypes(const BandGeometry& g, double spacing,
                              std::optional<double> sigma = std::nullopt);

struct LocateResult {
  double coordinate = 0.0;
  double delay_seconds = 0.0;
  bool nearest_fallback = false;  // every kernel weight underflowed
  bool out_of_range = false;      // delay outside the prototype delay span
};

// Gaussian-kernel general regression of coordinate on delay.
LocateResult grnn_locate(double delay_seconds, const PrototypeSet& p);

}  // namespace aebss
