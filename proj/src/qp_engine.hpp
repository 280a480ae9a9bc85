#pragma once

// Dense primal-dual interior point solver for convex quadratic programs
//
//   minimize    ½ xᵀQx + cᵀx
//   subject to  A_eq x  = b_eq                       (duals ν, free)
//               A_in x + ½ xᵀH_k x ≤ b_in  for row k (duals μ ≥ 0)
//               lower ≤ x ≤ upper                    (duals ≥ 0)
//
// Inequality rows may carry a convex quadratic term H_k (PSD, sparse).
// Lagrangian sign convention: L = f − νᵀ(A_eq x − b_eq) + μᵀ g(x), so the
// stationarity residual is Qx + c − A_eqᵀν + Σ μ_k ∇g_k + z_up − z_lo.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hydrofsr::qp {

struct HessianEntry {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double value = 0.0;
};

// Sparse symmetric curvature of one inequality row. Entries list the full
// matrix (both triangles for off-diagonal terms).
using RowCurvature = std::vector<HessianEntry>;

struct QuadraticProgram {
  Eigen::MatrixXd objective_matrix;
  Eigen::VectorXd objective_vector;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  // Empty, or one entry per inequality row.
  std::vector<RowCurvature> ineq_curvature;
  // Empty means unbounded; otherwise ±infinity entries are ignored.
  Eigen::VectorXd lower_bounds;
  Eigen::VectorXd upper_bounds;

  Eigen::Index num_variables() const { return objective_vector.size(); }
  Eigen::Index num_equalities() const { return eq_matrix.rows(); }
  Eigen::Index num_inequalities() const { return ineq_matrix.rows(); }
  bool has_curvature() const { return !ineq_curvature.empty(); }

  // Throws Error(structural) on dimension mismatch, Error(domain) when the
  // objective or a row curvature is not symmetric PSD.
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iterations };

const char* to_string(SolveStatus status) noexcept;

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;

  double max() const;
};

enum class RowKind { equality, inequality, lower_bound, upper_bound };

struct RowViolation {
  RowKind kind = RowKind::inequality;
  Eigen::Index index = -1;
  double amount = 0.0;
};

struct QpSolution {
  SolveStatus status = SolveStatus::max_iterations;
  Eigen::VectorXd primal;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;
  Eigen::VectorXd lower_bound_duals;
  Eigen::VectorXd upper_bound_duals;
  KktResiduals residuals;
  double objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  // Populated when status != optimal: the most violated row at the final
  // iterate, plus a human-readable summary.
  RowViolation worst_violation;
  std::string certificate;
};

struct SolverOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
};

QpSolution solve_qp(const QuadraticProgram& qp, const SolverOptions& options = {});
QpSolution solve_qp(const QuadraticProgram& qp, double tolerance);

// Independent re-evaluation from (primal, duals); does not read solver state.
KktResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol);

double objective_value(const QuadraticProgram& qp, const Eigen::VectorXd& x);

// Value of A_in x + ½ xᵀH x − b_in for every inequality row.
Eigen::VectorXd inequality_values(const QuadraticProgram& qp, const Eigen::VectorXd& x);

// Per-row violations of x against every constraint (all entries ≥ 0).
struct Violations {
  Eigen::VectorXd equality;
  Eigen::VectorXd inequality;
  Eigen::VectorXd lower_bound;
  Eigen::VectorXd upper_bound;

  RowViolation worst() const;
};

Violations violations(const QuadraticProgram& qp, const Eigen::VectorXd& x);

// Phase-one program: minimizes the total constraint violation with the
// original objective dropped and bounds kept hard. The returned point is
// the least-violating x found.
struct ElasticResult {
  bool feasible = false;
  double total_violation = 0.0;
  Eigen::VectorXd point;
  Violations row_violations;
  RowViolation worst;
};

ElasticResult elastic_feasibility(const QuadraticProgram& qp,
                                  const SolverOptions& options = {},
                                  double feasibility_tolerance = 1e-6);

}  // namespace hydrofsr::qp
