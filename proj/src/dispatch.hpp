#pragma once

// Multi-period energy-constrained economic dispatch over a DC network with
// batteries and hydro reservoirs, solved as one convex program. Prices and
// storage shadow prices are read from the multipliers.

#include "grid.hpp"
#include "hydro.hpp"
#include "qp_engine.hpp"
#include "reservoir.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace hydrofsr {

enum class BidKind { offer, bid, fixed_load };

const char* to_string(BidKind kind) noexcept;

// Per-period cost c(P) = quadratic·P² + linear·P in $/h, P in MW.
// Offers have P ≥ 0; bids (elastic demand) P ≤ 0; fixed loads pin P = −load.
struct CostFunction {
  BidKind kind = BidKind::offer;
  std::vector<double> quadratic;
  std::vector<double> linear;
  std::vector<double> min_power;
  std::vector<double> max_power;

  static CostFunction offer(int periods, double quadratic, double linear, double min_power, double max_power);
  static CostFunction bid(int periods, double quadratic, double price, double max_consumption);
  static CostFunction fixed_load(std::vector<double> load);

  friend bool operator==(const CostFunction&, const CostFunction&) = default;
};

struct Participant {
  std::string id;
  int bus = 0;
  CostFunction cost;

  friend bool operator==(const Participant&, const Participant&) = default;
};

struct StorageUnit {
  std::string id;
  reservoir::StorageKind kind = reservoir::StorageKind::ess;
  int bus = 0;
  reservoir::ReservoirSpec reservoir;
  // Hydro only.
  std::optional<hydro::PlantParameters> plant;
  std::optional<hydro::ReservoirGeometry> geometry;
  std::vector<reservoir::UpstreamLink> upstream;
  // Battery power limits, MW.
  double charge_max = 0.0;
  double discharge_max = 0.0;

  reservoir::Conversion conversion(double period_hours) const;

  friend bool operator==(const StorageUnit&, const StorageUnit&) = default;
};

struct SolverSettings {
  double tolerance = 1e-8;
  int max_iterations = 200;
  double adequacy_tolerance = 1e-5;  // relative, on settlement sums
  double feasibility_tolerance = 1e-6;

  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct MpedCase {
  std::string name;
  grid::GridModel grid;
  std::vector<Participant> participants;
  std::vector<StorageUnit> storage;
  int periods = 1;
  double period_hours = 1.0;
  SolverSettings solver;

  int num_buses() const { return grid.num_buses(); }
  int num_storage() const { return static_cast<int>(storage.size()); }
  int storage_index(const std::string& id) const;
  int participant_index(const std::string& id) const;
  reservoir::CascadeTopology topology() const;
  // Structural checks plus cascade validation; throws Error.
  void validate() const;

  friend bool operator==(const MpedCase&, const MpedCase&) = default;
};

// Extra rows used by the storage valuation: pinned power schedules and
// total-energy targets for selected storage units.
struct DispatchOverrides {
  struct Schedule {
    int storage = 0;
    std::vector<double> power;
  };
  struct EnergyTarget {
    int storage = 0;
    double energy = 0.0;  // MWh over the horizon
  };
  std::vector<Schedule> fixed_power;
  std::vector<EnergyTarget> energy_targets;
};

// Index bookkeeping from (entity, period) to QP variables and rows.
struct VariableMap {
  std::vector<std::vector<Eigen::Index>> participant;   // [participant][t]
  std::vector<std::vector<Eigen::Index>> storage_power; // [storage][t]
  std::vector<Eigen::Index> balance_rows;               // [t], equality
  std::vector<std::vector<Eigen::Index>> flow_rows;     // [directed line][t], inequality
  std::vector<std::vector<Eigen::Index>> storage_upper_rows;  // [storage][t]
  std::vector<std::vector<Eigen::Index>> storage_lower_rows;  // [storage][t]
  std::vector<Eigen::Index> energy_rows;                // equality, per target
  std::vector<std::string> eq_names;
  std::vector<std::string> ineq_names;
  std::vector<std::string> variable_names;
  // Rows and bounds that belong to the storage subsystem; used to rebuild the
  // storage marginal values from multipliers.
  std::vector<Eigen::Index> storage_eq_rows;
  std::vector<Eigen::Index> storage_ineq_rows;
};

struct AssembledProblem {
  qp::QuadraticProgram program;
  VariableMap map;

  std::string row_name(const qp::RowViolation& v) const;
};

AssembledProblem assemble_mped(const MpedCase& c, const DispatchOverrides& overrides = {});

struct DispatchSolution {
  qp::SolveStatus status = qp::SolveStatus::max_iterations;
  qp::KktResiduals residuals;
  double objective = 0.0;  // $
  double period_hours = 1.0;

  Eigen::MatrixXd bus_generation;     // P, n×T (MW, consumption negative)
  Eigen::MatrixXd bus_storage;        // U, n×T
  Eigen::MatrixXd participant_power;  // per participant, ×T
  Eigen::MatrixXd storage_power;      // per storage unit, ×T
  Eigen::MatrixXd discharge;          // Q = q(u), per storage unit (hm³ or MWh per period)
  Eigen::MatrixXd storage_level;      // z, per storage unit
  Eigen::MatrixXd line_flow;          // G(p+u), 2m×T

  Eigen::VectorXd energy_price;       // γ, $/MWh
  Eigen::MatrixXd congestion_price;   // μ, 2m×T, $/MWh
  Eigen::MatrixXd storage_upper_price;  // η̂, per storage ×T, $ per storage unit
  Eigen::MatrixXd storage_lower_price;  // η̌
  Eigen::MatrixXd lmp;                // Λ, n×T, $/MWh
  // Marginal value of storage power rebuilt from the storage-subsystem
  // multipliers only ($ per MW-period); equals Δt·λ at the storage bus.
  Eigen::MatrixXd storage_marginal_value;
};

// Throws Error(infeasible) naming the most violated row in case terms when
// the program has no solution, Error(solver) on numerical failure.
DispatchSolution solve_mped(const MpedCase& c, const DispatchOverrides& overrides = {});

// Λ[:, t] = γ_t·1 − Gᵀμ[:, t], recomputed from the multipliers.
Eigen::MatrixXd lmps(const DispatchSolution& sol, const grid::GridModel& grid);

struct SurplusBreakdown {
  double total = 0.0;         // −Σ Δt·λᵀp
  double flow_term = 0.0;     // Σ Δt·μᵀG(p+u)
  double storage_term = 0.0;  // Σ u·(storage marginal value)
};

// Throws Error(consistency) when the two routes disagree by more than
// 1e−5·(1 + |MS|).
SurplusBreakdown merchandising_surplus(const DispatchSolution& sol);

}  // namespace hydrofsr
