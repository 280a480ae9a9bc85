#pragma once

// Hydroelectric production physics.
//
// Units: volume hm³, water flow hm³ per dispatch period, power MW, heights
// in metres. The efficiency factor κ absorbs ρ·g, turbine efficiency and the
// hm³-per-period to MW conversion.

#include <string>
#include <utility>
#include <vector>

namespace hydrofsr::hydro {

enum class ReservoirShape { trapezoidal, cuboidal, planar };

const char* to_string(ReservoirShape shape) noexcept;
ReservoirShape shape_from_string(const std::string& name);

// Volume-to-height map φ(v) over an operating range. All three shapes share
// the parameterization h = c0 + c1·f(v):
//   planar       f(v) = 0      (constant forebay)
//   cuboidal     f(v) = v      (c1 = 1 / base area)
//   trapezoidal  f(v) = √v     (concave, fitted to waypoints)
class ReservoirGeometry {
 public:
  static ReservoirGeometry planar(double height, double min_volume, double max_volume);
  static ReservoirGeometry cuboidal(double floor_height, double base_area, double min_volume,
                                    double max_volume);
  // Least-squares fit of h = c0 + c1·√v through (volume, height) waypoints.
  static ReservoirGeometry fit_trapezoidal(std::vector<std::pair<double, double>> waypoints,
                                           double min_volume, double max_volume);

  ReservoirShape shape() const { return shape_; }
  double intercept() const { return c0_; }
  double slope() const { return c1_; }
  double base_area() const { return base_area_; }  // cuboidal only
  double min_volume() const { return min_volume_; }
  double max_volume() const { return max_volume_; }
  const std::vector<std::pair<double, double>>& waypoints() const { return waypoints_; }

  friend bool operator==(const ReservoirGeometry&, const ReservoirGeometry&) = default;

 private:
  ReservoirGeometry(ReservoirShape shape, double c0, double c1, double min_volume, double max_volume);
  void validate() const;

  ReservoirShape shape_ = ReservoirShape::planar;
  double c0_ = 0.0;
  double c1_ = 0.0;
  double min_volume_ = 0.0;
  double max_volume_ = 0.0;
  double base_area_ = 0.0;
  std::vector<std::pair<double, double>> waypoints_;

  friend double forebay_height(const ReservoirGeometry& geom, double volume);
};

// φ(v); throws Error(domain) outside the operating range.
double forebay_height(const ReservoirGeometry& geom, double volume);

struct PhysicalPlant {
  double efficiency = 0.0;          // κ, MW per (hm³/period · m)
  double forebay_height = 0.0;      // φ̃, m
  double tailrace_intercept = 0.0;  // θ0, m
  double tailrace_slope = 0.0;      // θ1, m per hm³/period
  double penstock_loss = 0.0;       // ς̃, m
  double capacity = 0.0;            // declared power cap, MW

  friend bool operator==(const PhysicalPlant&, const PhysicalPlant&) = default;
};

// Coefficients of u(q) = −αq² + βq and of its Taylor inverse q(u) = a·u² + b·u.
struct Calibration {
  double alpha = 0.0;
  double beta = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

// Throws Error(calibration) naming the violated inequality.
Calibration calibrate(const PhysicalPlant& physical);

struct PlantParameters {
  PhysicalPlant physical;
  Calibration coefficients;
  double max_power = 0.0;  // ū = min(capacity, vertex of u(q))

  static PlantParameters from_physical(const PhysicalPlant& physical);

  friend bool operator==(const PlantParameters&, const PlantParameters&) = default;
};

double tailrace_height(const PlantParameters& pp, double flow);
double power_from_discharge(const PlantParameters& pp, double flow);
// Smaller root of −αq² + βq = u.
double discharge_from_power_exact(const PlantParameters& pp, double power);
double discharge_from_power_quadratic(const PlantParameters& pp, double power);
double max_power(const PlantParameters& pp);

// β²/(4α), or +∞ for impulse turbines.
double vertex_power(const Calibration& c);

}  // namespace hydrofsr::hydro
