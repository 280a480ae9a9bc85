#include "hydro.hpp"

#include "error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hydrofsr::hydro {

namespace {

// Slack for values produced by floating point round trips at range ends.
constexpr double kEdge = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(ReservoirShape shape) noexcept {
  switch (shape) {
    case ReservoirShape::trapezoidal: return "trapezoidal";
    case ReservoirShape::cuboidal: return "cuboidal";
    case ReservoirShape::planar: return "planar";
  }
  return "unknown";
}

ReservoirShape shape_from_string(const std::string& name) {
  if (name == "trapezoidal") return ReservoirShape::trapezoidal;
  if (name == "cuboidal") return ReservoirShape::cuboidal;
  if (name == "planar") return ReservoirShape::planar;
  fail(ErrorKind::domain, "unknown reservoir shape '" + name + "'");
}

ReservoirGeometry::ReservoirGeometry(ReservoirShape shape, double c0, double c1, double min_volume,
                                     double max_volume)
    : shape_(shape), c0_(c0), c1_(c1), min_volume_(min_volume), max_volume_(max_volume) {}

ReservoirGeometry ReservoirGeometry::planar(double height, double min_volume, double max_volume) {
  ReservoirGeometry g(ReservoirShape::planar, height, 0.0, min_volume, max_volume);
  g.validate();
  return g;
}

ReservoirGeometry ReservoirGeometry::cuboidal(double floor_height, double base_area, double min_volume,
                                              double max_volume) {
  require(base_area > 0.0, ErrorKind::domain, "cuboidal base area must be positive");
  ReservoirGeometry g(ReservoirShape::cuboidal, floor_height, 1.0 / base_area, min_volume, max_volume);
  g.base_area_ = base_area;
  g.validate();
  return g;
}

ReservoirGeometry ReservoirGeometry::fit_trapezoidal(std::vector<std::pair<double, double>> waypoints,
                                                     double min_volume, double max_volume) {
  require(waypoints.size() >= 2, ErrorKind::domain, "trapezoidal fit needs at least two waypoints");
  const auto n = static_cast<Eigen::Index>(waypoints.size());
  Eigen::MatrixXd basis(n, 2);
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [v, height] = waypoints[static_cast<std::size_t>(i)];
    require(v >= 0.0, ErrorKind::domain, "waypoint volume must be nonnegative");
    basis(i, 0) = 1.0;
    basis(i, 1) = std::sqrt(v);
    h[i] = height;
  }
  const Eigen::Vector2d coef = basis.colPivHouseholderQr().solve(h);
  require(coef[1] > 0.0, ErrorKind::domain, "trapezoidal fit is not increasing in volume");
  ReservoirGeometry g(ReservoirShape::trapezoidal, coef[0], coef[1], min_volume, max_volume);
  g.waypoints_ = std::move(waypoints);
  g.validate();
  return g;
}

void ReservoirGeometry::validate() const {
  require(std::isfinite(min_volume_) && std::isfinite(max_volume_) && min_volume_ >= 0.0 &&
              min_volume_ <= max_volume_,
          ErrorKind::domain, "geometry volume range must satisfy 0 <= min <= max");
  require(c1_ >= 0.0, ErrorKind::domain, "volume-to-height map must be nondecreasing");
  require(forebay_height(*this, min_volume_) >= 0.0 && forebay_height(*this, max_volume_) > 0.0,
          ErrorKind::domain, "volume-to-height map must be positive over the operating range");
}

double forebay_height(const ReservoirGeometry& geom, double volume) {
  const double span = std::max(1.0, geom.max_volume_);
  require(volume >= geom.min_volume_ - kEdge * span && volume <= geom.max_volume_ + kEdge * span,
          ErrorKind::domain,
          "volume " + fmt(volume) + " outside operating range [" + fmt(geom.min_volume_) + ", " +
              fmt(geom.max_volume_) + "]");
  const double v = std::clamp(volume, geom.min_volume_, geom.max_volume_);
  switch (geom.shape_) {
    case ReservoirShape::planar: return geom.c0_;
    case ReservoirShape::cuboidal: return geom.c0_ + geom.c1_ * v;
    case ReservoirShape::trapezoidal: return geom.c0_ + geom.c1_ * std::sqrt(v);
  }
  return geom.c0_;
}

Calibration calibrate(const PhysicalPlant& p) {
  require(p.efficiency > 0.0, ErrorKind::calibration, "efficiency factor must satisfy kappa > 0");
  require(p.forebay_height > p.tailrace_intercept, ErrorKind::calibration,
          "forebay_height > tailrace_intercept violated (" + fmt(p.forebay_height) + " <= " +
              fmt(p.tailrace_intercept) + ")");
  require(p.tailrace_intercept > p.penstock_loss, ErrorKind::calibration,
          "tailrace_intercept > penstock_loss violated (" + fmt(p.tailrace_intercept) + " <= " +
              fmt(p.penstock_loss) + ")");
  require(p.penstock_loss >= 0.0, ErrorKind::calibration, "penstock_loss >= 0 violated");
  // The ordering alone does not keep the net head positive.
  require(p.forebay_height > p.tailrace_intercept + p.penstock_loss, ErrorKind::calibration,
          "forebay_height > tailrace_intercept + penstock_loss violated (" + fmt(p.forebay_height) + " <= " +
              fmt(p.tailrace_intercept + p.penstock_loss) + ")");
  require(p.tailrace_slope >= 0.0, ErrorKind::calibration,
          "tailrace_slope >= 0 violated (negative slopes are not physical)");

  Calibration c;
  c.alpha = p.efficiency * p.tailrace_slope;
  c.beta = p.efficiency * (p.forebay_height - p.tailrace_intercept - p.penstock_loss);
  // β > 0 here, so α·√(β²)/β⁴ = α/β³ and 1/√(β²) = 1/β.
  c.a = c.alpha / (c.beta * c.beta * c.beta);
  c.b = 1.0 / c.beta;
  return c;
}

double vertex_power(const Calibration& c) {
  if (c.alpha <= 0.0) return std::numeric_limits<double>::infinity();
  return c.beta * c.beta / (4.0 * c.alpha);
}

PlantParameters PlantParameters::from_physical(const PhysicalPlant& physical) {
  require(physical.capacity > 0.0, ErrorKind::calibration, "plant capacity must be positive");
  PlantParameters pp;
  pp.physical = physical;
  pp.coefficients = calibrate(physical);
  pp.max_power = std::min(physical.capacity, vertex_power(pp.coefficients));
  return pp;
}

double tailrace_height(const PlantParameters& pp, double flow) {
  require(flow >= 0.0, ErrorKind::domain, "discharge must be nonnegative");
  return pp.physical.tailrace_intercept + pp.physical.tailrace_slope * flow;
}

double power_from_discharge(const PlantParameters& pp, double flow) {
  const auto& c = pp.coefficients;
  require(flow >= 0.0, ErrorKind::domain, "discharge must be nonnegative");
  if (c.alpha > 0.0) {
    const double turning = c.beta / (2.0 * c.alpha);
    require(flow <= turning * (1.0 + kEdge), ErrorKind::domain,
            "discharge " + fmt(flow) + " beyond the increasing branch (q <= " + fmt(turning) + ")");
  }
  return -c.alpha * flow * flow + c.beta * flow;
}

double discharge_from_power_exact(const PlantParameters& pp, double power) {
  const auto& c = pp.coefficients;
  require(power >= 0.0, ErrorKind::domain, "power must be nonnegative");
  if (c.alpha <= 0.0) return power / c.beta;
  const double vertex = vertex_power(c);
  require(power <= vertex * (1.0 + kEdge), ErrorKind::domain,
          "power " + fmt(power) + " above the production vertex " + fmt(vertex));
  const double disc = std::max(0.0, c.beta * c.beta - 4.0 * c.alpha * power);
  // Rationalized smaller root; no cancellation near u = 0.
  return 2.0 * power / (c.beta + std::sqrt(disc));
}

double discharge_from_power_quadratic(const PlantParameters& pp, double power) {
  require(power >= 0.0, ErrorKind::domain, "power must be nonnegative");
  const auto& c = pp.coefficients;
  return c.a * power * power + c.b * power;
}

double max_power(const PlantParameters& pp) {
  return std::min(pp.physical.capacity, vertex_power(pp.coefficients));
}

}  // namespace hydrofsr::hydro
