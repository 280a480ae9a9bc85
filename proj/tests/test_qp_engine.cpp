#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "error.hpp"
#include "qp_engine.hpp"
#include "qp_oracle.hpp"

#include <cmath>
#include <random>

using namespace hydrofsr;
using qp::QuadraticProgram;
using qp::SolveStatus;

namespace {

QuadraticProgram square_above_one() {
  // minimize x² s.t. x ≥ 1, written as −x ≤ −1.
  QuadraticProgram p;
  p.objective_matrix = Eigen::MatrixXd::Constant(1, 1, 2.0);
  p.objective_vector = Eigen::VectorXd::Zero(1);
  p.eq_matrix = Eigen::MatrixXd(0, 1);
  p.eq_rhs = Eigen::VectorXd(0);
  p.ineq_matrix = Eigen::MatrixXd::Constant(1, 1, -1.0);
  p.ineq_rhs = Eigen::VectorXd::Constant(1, -1.0);
  return p;
}

}  // namespace

TEST_CASE("x squared above one") {
  const auto p = square_above_one();
  const auto sol = qp::solve_qp(p, 1e-8);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.ineq_duals[0] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(sol.residuals.max() <= 1e-8);
}

TEST_CASE("symmetric equality split") {
  QuadraticProgram p;
  p.objective_matrix = Eigen::MatrixXd::Identity(2, 2);
  p.objective_vector = Eigen::VectorXd::Zero(2);
  p.eq_matrix = Eigen::MatrixXd::Ones(1, 2);
  p.eq_rhs = Eigen::VectorXd::Constant(1, 2.0);
  p.ineq_matrix = Eigen::MatrixXd(0, 2);
  p.ineq_rhs = Eigen::VectorXd(0);
  const auto sol = qp::solve_qp(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0));
  CHECK(sol.primal[1] == doctest::Approx(1.0));
  CHECK(sol.eq_duals[0] == doctest::Approx(1.0));
}

TEST_CASE("kkt residuals of exact and perturbed points") {
  const auto p = square_above_one();
  qp::QpSolution exact;
  exact.primal = Eigen::VectorXd::Constant(1, 1.0);
  exact.eq_duals = Eigen::VectorXd(0);
  exact.ineq_duals = Eigen::VectorXd::Constant(1, 2.0);
  auto r = qp::kkt_residuals(p, exact);
  CHECK(r.stationarity == 0.0);
  CHECK(r.primal == 0.0);
  CHECK(r.complementarity == 0.0);

  auto moved = exact;
  moved.primal[0] += 1e-3;
  r = qp::kkt_residuals(p, moved);
  CHECK(r.primal == 0.0);
  CHECK(r.stationarity == doctest::Approx(2e-3).epsilon(1e-9));
}

TEST_CASE("random n=6 problem matches active-set enumeration") {
  std::mt19937_64 rng(6);
  const auto p = testing::random_qp(rng, 6, 0, 3);
  const auto oracle = testing::active_set_optimum(p);
  REQUIRE(oracle.has_value());
  const auto sol = qp::solve_qp(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(*oracle).epsilon(1e-8));
  const auto r = qp::kkt_residuals(p, sol);
  CHECK(r.max() <= 1e-6);
}

TEST_CASE("strong duality and dual scaling") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = testing::random_qp(rng, 5, 1, 4);
    const auto sol = qp::solve_qp(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(std::abs(sol.objective - sol.dual_objective) <= 1e-6 * (1.0 + std::abs(sol.objective)));

    auto scaled = p;
    scaled.objective_matrix *= 3.0;
    scaled.objective_vector *= 3.0;
    const auto s2 = qp::solve_qp(scaled);
    REQUIRE(s2.status == SolveStatus::optimal);
    CHECK((s2.primal - sol.primal).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK((s2.ineq_duals - 3.0 * sol.ineq_duals).lpNorm<Eigen::Infinity>() <= 1e-5);
    CHECK((s2.eq_duals - 3.0 * sol.eq_duals).lpNorm<Eigen::Infinity>() <= 1e-5);
  }
}

TEST_CASE("box bounds, fixed variables and bound duals") {
  // minimize (x0 − 3)² + (x1 + 1)² with 0 ≤ x0 ≤ 2, x1 fixed at 0.5.
  QuadraticProgram p;
  p.objective_matrix = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.objective_vector = Eigen::Vector2d(-6.0, 2.0);
  p.eq_matrix = Eigen::MatrixXd(0, 2);
  p.eq_rhs = Eigen::VectorXd(0);
  p.ineq_matrix = Eigen::MatrixXd(0, 2);
  p.ineq_rhs = Eigen::VectorXd(0);
  p.lower_bounds = Eigen::Vector2d(0.0, 0.5);
  p.upper_bounds = Eigen::Vector2d(2.0, 0.5);
  const auto sol = qp::solve_qp(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(2.0));
  CHECK(sol.primal[1] == doctest::Approx(0.5));
  CHECK(sol.upper_bound_duals[0] == doctest::Approx(2.0).epsilon(1e-6));
  // Gradient at x1 = 0.5 is 3, held by the lower side of the pin.
  CHECK(sol.lower_bound_duals[1] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("convex quadratic inequality row") {
  // minimize −x − y s.t. x² + y² ≤ 2 → x = y = 1, dual ½.
  QuadraticProgram p;
  p.objective_matrix = Eigen::MatrixXd::Zero(2, 2);
  p.objective_vector = Eigen::Vector2d(-1.0, -1.0);
  p.eq_matrix = Eigen::MatrixXd(0, 2);
  p.eq_rhs = Eigen::VectorXd(0);
  p.ineq_matrix = Eigen::MatrixXd::Zero(1, 2);
  p.ineq_rhs = Eigen::VectorXd::Constant(1, 2.0);
  p.ineq_curvature = {{{0, 0, 2.0}, {1, 1, 2.0}}};
  const auto sol = qp::solve_qp(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.primal[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.ineq_duals[0] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("infeasible problem reports the violated row") {
  QuadraticProgram p;
  p.objective_matrix = Eigen::MatrixXd::Identity(1, 1);
  p.objective_vector = Eigen::VectorXd::Zero(1);
  p.eq_matrix = Eigen::MatrixXd(0, 1);
  p.eq_rhs = Eigen::VectorXd(0);
  p.ineq_matrix = Eigen::MatrixXd(2, 1);
  p.ineq_matrix << -1.0, 1.0;
  p.ineq_rhs = Eigen::Vector2d(-1.0, 0.0);  // x ≥ 1 and x ≤ 0
  const auto sol = qp::solve_qp(p);
  CHECK(sol.status == SolveStatus::infeasible);
  CHECK(sol.worst_violation.index >= 0);
  CHECK_FALSE(sol.certificate.empty());

  const auto elastic = qp::elastic_feasibility(p);
  CHECK_FALSE(elastic.feasible);
  CHECK(elastic.total_violation == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("unbounded linear objective") {
  QuadraticProgram p;
  p.objective_matrix = Eigen::MatrixXd::Zero(1, 1);
  p.objective_vector = Eigen::VectorXd::Constant(1, -1.0);
  p.eq_matrix = Eigen::MatrixXd(0, 1);
  p.eq_rhs = Eigen::VectorXd(0);
  p.ineq_matrix = Eigen::MatrixXd::Constant(1, 1, -1.0);
  p.ineq_rhs = Eigen::VectorXd::Zero(1);  // x ≥ 0, minimize −x
  const auto sol = qp::solve_qp(p);
  CHECK(sol.status != SolveStatus::optimal);
}

TEST_CASE("structural and definiteness errors") {
  auto p = square_above_one();
  p.ineq_rhs = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(qp::solve_qp(p), Error);

  auto q = square_above_one();
  q.objective_matrix(0, 0) = -1.0;
  try {
    qp::solve_qp(q);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}
