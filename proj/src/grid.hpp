#pragma once

// Lossless DC network: shift factors and directed line capacities.
//
// Rows 0..m-1 of the shift-factor matrix give from→to flows of each line,
// rows m..2m-1 their negatives, so every thermal limit is one-sided.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hydrofsr::grid {

struct Line {
  std::string id;
  int from = 0;
  int to = 0;
  double reactance = 0.0;         // p.u.
  double capacity = 0.0;          // MW, from→to
  double capacity_reverse = 0.0;  // MW, to→from

  friend bool operator==(const Line&, const Line&) = default;
};

Eigen::MatrixXd build_shift_factors(int buses, const std::vector<Line>& lines, int slack);

// G·x for a balanced injection vector; throws Error(contract) if
// |1ᵀx| > balance_tolerance.
Eigen::VectorXd line_flows(const Eigen::MatrixXd& shift_factors, const Eigen::VectorXd& injection,
                           double balance_tolerance = 1e-6);

class GridModel {
 public:
  GridModel() = default;
  GridModel(std::vector<std::string> bus_names, std::vector<Line> lines, int slack);

  int num_buses() const { return static_cast<int>(bus_names_.size()); }
  int num_lines() const { return static_cast<int>(lines_.size()); }
  int num_directed() const { return 2 * num_lines(); }
  int slack() const { return slack_; }
  const std::vector<std::string>& bus_names() const { return bus_names_; }
  const std::vector<Line>& lines() const { return lines_; }
  const Eigen::MatrixXd& shift_factors() const { return shift_factors_; }
  const Eigen::VectorXd& capacities() const { return capacities_; }

  int bus_index(const std::string& name) const;  // -1 if absent
  int line_index(const std::string& id) const;   // -1 if absent
  // "l1:fwd" / "l1:rev"
  std::string directed_name(int row) const;
  int directed_index(const std::string& name) const;

  Eigen::VectorXd flows(const Eigen::VectorXd& injection, double balance_tolerance = 1e-6) const {
    return line_flows(shift_factors_, injection, balance_tolerance);
  }

  // Compares the defining data; derived matrices follow from it.
  friend bool operator==(const GridModel& a, const GridModel& b) {
    return a.bus_names_ == b.bus_names_ && a.lines_ == b.lines_ && a.slack_ == b.slack_;
  }

 private:
  std::vector<std::string> bus_names_;
  std::vector<Line> lines_;
  int slack_ = 0;
  Eigen::MatrixXd shift_factors_;
  Eigen::VectorXd capacities_;
};

}  // namespace hydrofsr::grid
