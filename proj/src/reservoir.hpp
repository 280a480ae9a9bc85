#pragma once

// Storage dynamics shared by batteries (ESS) and cascaded hydro reservoirs.
//
// Water balance of node i with upstream set Ω(i):
//   z_t = z0 + Σ_{τ≤t} ( y_τ + Σ_{j∈Ω} q_{j,τ−lag_j} − q_{i,τ} )
// Releases from before the horizon (τ − lag < 0) are taken as zero.

#include "hydro.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace hydrofsr::reservoir {

enum class StorageKind { hydro, ess };

const char* to_string(StorageKind kind) noexcept;

struct UpstreamLink {
  int node = 0;
  int lag = 0;  // whole periods

  friend bool operator==(const UpstreamLink&, const UpstreamLink&) = default;
};

struct CascadeTopology {
  std::vector<StorageKind> kinds;
  std::vector<std::vector<UpstreamLink>> upstream;  // Ω(i)
  std::vector<std::string> names;                   // optional, for messages
};

struct ReservoirSpec {
  double initial = 0.0;        // z0
  std::vector<double> lower;   // ž, length T
  std::vector<double> upper;   // ẑ, length T
  std::vector<double> inflow;  // y, length T

  void validate(StorageKind kind, const std::string& name) const;

  friend bool operator==(const ReservoirSpec&, const ReservoirSpec&) = default;
};

// T×T lower-triangular matrix whose nonzeros are −1, so (L·q)_t = −Σ_{τ≤t} q_τ.
struct CumulativeMatrix {
  int horizon = 0;
  Eigen::MatrixXd matrix;
};

CumulativeMatrix build_cumulative_matrix(int horizon);

// Topological order, upstream nodes first (ties by index). Throws
// Error(validation) naming one cycle, or an ESS node inside a cascade.
std::vector<int> validate_cascade(const CascadeTopology& topo);

// Per-period water (or energy) released for a power schedule: q = a·u² + b·u.
// Hydro plants use their Taylor coefficients and require 0 ≤ u ≤ ū; batteries
// use a = 0, b = period length, and accept charging (u < 0) within limits.
struct Conversion {
  double a = 0.0;
  double b = 1.0;
  double min_power = 0.0;
  double max_power = 0.0;

  static Conversion of_plant(const hydro::PlantParameters& pp);
  static Conversion identity(double charge_max, double discharge_max, double period_hours = 1.0);

  double operator()(double u) const { return a * u * u + b * u; }
};

std::vector<double> conversion_series(const Conversion& conv, std::span<const double> power);

// Storage levels z_1..z_T of `node` given release schedules for every node
// in the topology (only the node itself and its upstream set are read).
std::vector<double> storage_trajectory(const ReservoirSpec& spec, const CascadeTopology& topo, int node,
                                       const std::vector<std::vector<double>>& releases);

}  // namespace hydrofsr::reservoir
