#pragma once

// Incremental construction of a QuadraticProgram with named rows. Row
// coefficients are collected sparsely and densified once at the end.

#include "qp_engine.hpp"

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hydrofsr::detail {

enum class RowBlock { balance, flow, storage, energy };

struct SparseRow {
  std::vector<std::pair<Eigen::Index, double>> terms;
  double rhs = 0.0;
  qp::RowCurvature curvature;
  std::string name;
  RowBlock block = RowBlock::storage;
};

class ProgramBuilder {
 public:
  Eigen::Index add_variable(std::string name, double lower = -kInf, double upper = kInf,
                            double linear_cost = 0.0, double quadratic_cost = 0.0) {
    names_.push_back(std::move(name));
    lower_.push_back(lower);
    upper_.push_back(upper);
    linear_.push_back(linear_cost);
    quadratic_.push_back(quadratic_cost);
    return static_cast<Eigen::Index>(names_.size() - 1);
  }

  Eigen::Index add_equality(SparseRow row) {
    eq_.push_back(std::move(row));
    return static_cast<Eigen::Index>(eq_.size() - 1);
  }

  Eigen::Index add_inequality(SparseRow row) {
    in_.push_back(std::move(row));
    return static_cast<Eigen::Index>(in_.size() - 1);
  }

  void set_bounds(Eigen::Index var, double lower, double upper) {
    lower_[static_cast<std::size_t>(var)] = lower;
    upper_[static_cast<std::size_t>(var)] = upper;
  }

  const std::vector<SparseRow>& equalities() const { return eq_; }
  const std::vector<SparseRow>& inequalities() const { return in_; }
  const std::vector<std::string>& variable_names() const { return names_; }

  qp::QuadraticProgram build() const {
    const auto n = static_cast<Eigen::Index>(names_.size());
    qp::QuadraticProgram p;
    p.objective_matrix = Eigen::MatrixXd::Zero(n, n);
    p.objective_vector = Eigen::VectorXd::Zero(n);
    p.lower_bounds = Eigen::VectorXd(n);
    p.upper_bounds = Eigen::VectorXd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p.objective_matrix(i, i) = 2.0 * quadratic_[i];
      p.objective_vector[i] = linear_[i];
      p.lower_bounds[i] = lower_[i];
      p.upper_bounds[i] = upper_[i];
    }
    auto dense = [n](const std::vector<SparseRow>& rows, Eigen::MatrixXd& a, Eigen::VectorXd& b) {
      const auto r = static_cast<Eigen::Index>(rows.size());
      a = Eigen::MatrixXd::Zero(r, n);
      b = Eigen::VectorXd::Zero(r);
      for (Eigen::Index k = 0; k < r; ++k) {
        for (const auto& [col, v] : rows[k].terms) a(k, col) += v;
        b[k] = rows[k].rhs;
      }
    };
    dense(eq_, p.eq_matrix, p.eq_rhs);
    dense(in_, p.ineq_matrix, p.ineq_rhs);
    bool curved = false;
    for (const auto& row : in_) curved = curved || !row.curvature.empty();
    if (curved) {
      p.ineq_curvature.reserve(in_.size());
      for (const auto& row : in_) p.ineq_curvature.push_back(row.curvature);
    }
    return p;
  }

  std::string describe(const qp::RowViolation& v) const {
    switch (v.kind) {
      case qp::RowKind::equality: return v.index >= 0 ? eq_[v.index].name : "none";
      case qp::RowKind::inequality: return v.index >= 0 ? in_[v.index].name : "none";
      case qp::RowKind::lower_bound: return "lower bound of " + names_[v.index];
      case qp::RowKind::upper_bound: return "upper bound of " + names_[v.index];
    }
    return "unknown";
  }

  static constexpr double kInf = std::numeric_limits<double>::infinity();

 private:
  std::vector<std::string> names_;
  std::vector<double> lower_, upper_, linear_, quadratic_;
  std::vector<SparseRow> eq_, in_;
};

}  // namespace hydrofsr::detail
