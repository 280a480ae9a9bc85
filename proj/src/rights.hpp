#pragma once

// Financial transmission and storage rights: settlement against a solved
// dispatch, the simultaneous feasibility test that gates issuance, revenue
// adequacy and the flat-bid storage valuation.
//
// Rents are in $ over the horizon. Price-based rents carry the period
// length (λ in $/MWh times MW times h); storage rents are η̂ ($ per unit of
// stored volume) times the reserved volume.

#include "dispatch.hpp"

#include <Eigen/Dense>

#include <mutex>
#include <string>
#include <vector>

namespace hydrofsr {

enum class RightKind { ftr, fgr, fsr, ecr };

const char* to_string(RightKind kind) noexcept;  // "FTR", "FGR", "FSR", "ECR"
RightKind right_kind_from_string(const std::string& name);

struct Right {
  RightKind kind = RightKind::ftr;
  std::string holder;
  std::vector<double> profile;  // length T; MW, or storage volume for ECR
  int from_bus = -1;            // FTR injection bus
  int to_bus = -1;              // FTR and FSR withdrawal bus
  int line = -1;                // FGR directed line row
  int storage = -1;             // FSR target and ECR storage

  static Right ftr(std::string holder, int from_bus, int to_bus, std::vector<double> profile);
  static Right fgr(std::string holder, int directed_line, std::vector<double> profile);
  static Right fsr(std::string holder, int storage, int to_bus, std::vector<double> profile);
  static Right ecr(std::string holder, int storage, std::vector<double> profile);

  friend bool operator==(const Right&, const Right&) = default;
};

// Throws Error(validation) for dangling references, wrong lengths or
// negative FGR/ECR profiles.
void validate_right(const Right& right, const MpedCase& c);

struct Portfolio {
  std::vector<Right> rights;

  friend bool operator==(const Portfolio&, const Portfolio&) = default;
};

struct PortfolioAggregates {
  Eigen::MatrixXd injection;   // R, n×T: +r at the FTR source, −r at the sink
  Eigen::MatrixXd line;        // F, 2m×T
  Eigen::MatrixXd withdrawal;  // S, n×T
  Eigen::MatrixXd storage;     // E, storage×T
};

PortfolioAggregates aggregate(const Portfolio& portfolio, const MpedCase& c);

double ftr_rent(const Right& right, const DispatchSolution& sol);
double fgr_rent(const Right& right, const DispatchSolution& sol);
double fsr_rent(const Right& right, const DispatchSolution& sol);
double ecr_rent(const Right& right, const DispatchSolution& sol);
double rent(const Right& right, const DispatchSolution& sol);

struct SftResult {
  bool feasible = false;
  double max_violation = 0.0;
  std::string violated_row;     // empty when feasible
  Eigen::MatrixXd witness;      // storage power, storage×T
  std::string certificate;
};

SftResult simultaneous_feasibility_test(const Portfolio& portfolio, const MpedCase& c);

struct SettlementLine {
  RightKind kind = RightKind::ftr;
  std::string holder;
  double rent = 0.0;
};

struct SettlementReport {
  std::vector<SettlementLine> lines;
  double total_ftr = 0.0;
  double total_fgr = 0.0;
  double total_fsr = 0.0;
  double total_ecr = 0.0;
  double total = 0.0;
  double merchandising_surplus = 0.0;
  // Σ Δt·λᵀu: what the storage schedule is worth at market prices. Part of
  // the surplus, reported for information only.
  double storage_dispatch_value = 0.0;
  double slack = 0.0;  // MS − total
  bool adequate = true;
};

// Settles every right and checks total ≤ MS + tol·(1 + |MS|).
SettlementReport revenue_adequacy_check(const DispatchSolution& sol, const Portfolio& portfolio,
                                        double tolerance = 1e-5);

// Serialized issuance: a right is registered only if the enlarged portfolio
// still passes the feasibility test. Reads return snapshots.
class RightsRegistry {
 public:
  explicit RightsRegistry(MpedCase c);

  SftResult issue(const Right& right);
  Portfolio snapshot() const;

 private:
  MpedCase case_;
  Portfolio portfolio_;
  mutable std::mutex mutex_;
};

struct FsrValuation {
  double valuation = 0.0;  // objective_flat − objective_free
  double objective_flat = 0.0;
  double objective_free = 0.0;
  std::vector<double> flat_schedule;  // MW
  std::vector<double> free_schedule;
  Eigen::MatrixXd lmp_flat;
  Eigen::MatrixXd lmp_free;
};

// Step 1 pins the unit to E/(T·Δt) MW every period, step 2 frees it subject
// to Σ u·Δt = E. Throws Error(contract) when the flat schedule cannot run.
FsrValuation value_fsr_flat_bid_reallocation(const MpedCase& c, int storage, double energy);

}  // namespace hydrofsr
