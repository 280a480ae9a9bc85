#include "qp_engine.hpp"

#include "error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hydrofsr::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

void check_psd(const Eigen::MatrixXd& m, const std::string& what) {
  if (m.size() == 0) return;
  const double asym = (m - m.transpose()).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, m.lpNorm<Eigen::Infinity>());
  require(asym <= 1e-9 * scale, ErrorKind::domain, what + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const double norm = m.norm();
  require(eig.eigenvalues().minCoeff() >= -1e-9 * std::max(norm, 1e-300), ErrorKind::domain,
          what + " is not positive semidefinite (min eigenvalue " +
              std::to_string(eig.eigenvalues().minCoeff()) + ")");
}

Eigen::MatrixXd curvature_matrix(const RowCurvature& entries, Eigen::Index n) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : entries) h(e.row, e.col) += e.value;
  return h;
}

// Unified inequality system g(x) = J0 x + ½ xᵀH x − rhs ≤ 0 built from the
// user rows followed by finite upper and lower bounds. Variables with equal
// bounds are pinned by extra equality rows.
struct StandardForm {
  Eigen::Index n = 0;
  Eigen::MatrixXd q;
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd j0;
  Eigen::VectorXd rhs;
  std::vector<RowCurvature> curvature;  // per unified row (bound rows empty)
  Eigen::Index user_rows = 0;
  Eigen::Index user_eq_rows = 0;
  std::vector<Eigen::Index> upper_var;  // variable of each upper-bound row
  std::vector<Eigen::Index> lower_var;
  std::vector<Eigen::Index> fixed_var;  // variable of each pinning equality

  Eigen::VectorXd g(const Eigen::VectorXd& x) const {
    Eigen::VectorXd v = j0 * x - rhs;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(curvature.size()); ++k)
      for (const auto& e : curvature[k]) v[k] += 0.5 * e.value * x[e.row] * x[e.col];
    return v;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd j = j0;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(curvature.size()); ++k)
      for (const auto& e : curvature[k]) j(k, e.row) += e.value * x[e.col];
    return j;
  }

  Eigen::MatrixXd lagrangian_hessian(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd w = q;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(curvature.size()); ++k)
      for (const auto& e : curvature[k]) w(e.row, e.col) += z[k] * e.value;
    return w;
  }
};

StandardForm to_standard_form(const QuadraticProgram& qp) {
  StandardForm sf;
  const Eigen::Index n = qp.num_variables();
  sf.n = n;
  sf.q = qp.objective_matrix;
  sf.c = qp.objective_vector;

  const bool has_lower = qp.lower_bounds.size() == n;
  const bool has_upper = qp.upper_bounds.size() == n;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = has_lower ? qp.lower_bounds[i] : -kInf;
    const double hi = has_upper ? qp.upper_bounds[i] : kInf;
    if (std::isfinite(lo) && std::isfinite(hi) && lo == hi) {
      sf.fixed_var.push_back(i);
      continue;
    }
    if (std::isfinite(hi)) sf.upper_var.push_back(i);
    if (std::isfinite(lo)) sf.lower_var.push_back(i);
  }

  sf.user_eq_rows = qp.num_equalities();
  const Eigen::Index n_eq = sf.user_eq_rows + static_cast<Eigen::Index>(sf.fixed_var.size());
  sf.a_eq = Eigen::MatrixXd::Zero(n_eq, n);
  sf.b_eq = Eigen::VectorXd::Zero(n_eq);
  if (sf.user_eq_rows > 0) {
    sf.a_eq.topRows(sf.user_eq_rows) = qp.eq_matrix;
    sf.b_eq.head(sf.user_eq_rows) = qp.eq_rhs;
  }
  for (std::size_t k = 0; k < sf.fixed_var.size(); ++k) {
    const auto row = sf.user_eq_rows + static_cast<Eigen::Index>(k);
    sf.a_eq(row, sf.fixed_var[k]) = 1.0;
    sf.b_eq[row] = qp.lower_bounds[sf.fixed_var[k]];
  }

  sf.user_rows = qp.num_inequalities();
  const Eigen::Index m = sf.user_rows + static_cast<Eigen::Index>(sf.upper_var.size() + sf.lower_var.size());
  sf.j0 = Eigen::MatrixXd::Zero(m, n);
  sf.rhs = Eigen::VectorXd::Zero(m);
  sf.curvature.assign(static_cast<std::size_t>(m), {});
  if (sf.user_rows > 0) {
    sf.j0.topRows(sf.user_rows) = qp.ineq_matrix;
    sf.rhs.head(sf.user_rows) = qp.ineq_rhs;
    if (qp.has_curvature())
      for (Eigen::Index k = 0; k < sf.user_rows; ++k) sf.curvature[k] = qp.ineq_curvature[k];
  }
  Eigen::Index row = sf.user_rows;
  for (auto i : sf.upper_var) {
    sf.j0(row, i) = 1.0;
    sf.rhs[row++] = qp.upper_bounds[i];
  }
  for (auto i : sf.lower_var) {
    sf.j0(row, i) = -1.0;
    sf.rhs[row++] = -qp.lower_bounds[i];
  }
  return sf;
}

Eigen::VectorXd initial_point(const QuadraticProgram& qp) {
  const Eigen::Index n = qp.num_variables();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const bool has_lower = qp.lower_bounds.size() == n;
  const bool has_upper = qp.upper_bounds.size() == n;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = has_lower ? qp.lower_bounds[i] : -kInf;
    const double hi = has_upper ? qp.upper_bounds[i] : kInf;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      x[i] = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      x[i] = std::max(0.0, lo + 1.0);
    } else if (std::isfinite(hi)) {
      x[i] = std::min(0.0, hi - 1.0);
    }
  }
  return x;
}

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (dv[k] < 0.0) alpha = std::min(alpha, -v[k] / dv[k]);
  return alpha;
}

// Newton step from the augmented system
//   [W  Aᵀ  Jᵀ   ] [ dx ]
//   [A  0   0    ] [−dν ]
//   [J  0  −S/Z  ] [ dz ]
// with symmetric diagonal scaling, quasi-definite regularization and
// iterative refinement against the unregularized matrix. Keeping dz as an
// unknown avoids forming JᵀDJ, whose entries span 1e−12..1e13 near the
// solution and swamp the curvature of degenerate directions.
class KktSystem {
 public:
  KktSystem(const Eigen::MatrixXd& w, const Eigen::MatrixXd& a_eq, const Eigen::MatrixXd& j,
            const Eigen::VectorXd& s_over_z)
      : n_(w.rows()), p_(a_eq.rows()), m_(j.rows()) {
    const Eigen::Index size = n_ + p_ + m_;
    exact_ = Eigen::MatrixXd::Zero(size, size);
    exact_.topLeftCorner(n_, n_) = w;
    if (p_ > 0) {
      exact_.block(0, n_, n_, p_) = a_eq.transpose();
      exact_.block(n_, 0, p_, n_) = a_eq;
    }
    if (m_ > 0) {
      exact_.block(0, n_ + p_, n_, m_) = j.transpose();
      exact_.block(n_ + p_, 0, m_, n_) = j;
      exact_.bottomRightCorner(m_, m_).diagonal() = -s_over_z.cwiseMin(1e30);
    }
    scale_ = Eigen::VectorXd::Ones(size);
    for (Eigen::Index i = 0; i < size; ++i) scale_[i] = 1.0 / std::sqrt(std::max(1.0, std::abs(exact_(i, i))));
    Eigen::MatrixXd reg = scale_.asDiagonal() * exact_ * scale_.asDiagonal();
    reg.diagonal().head(n_).array() += 1e-10;
    reg.diagonal().tail(p_ + m_).array() -= 1e-10;
    lu_.compute(reg);
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    // Refinement passes are kept only while they shrink the residual.
    Eigen::VectorXd sol = scaled_solve(rhs);
    Eigen::VectorXd r = rhs - exact_ * sol;
    double err = inf_norm(r);
    for (int pass = 0; pass < 3 && std::isfinite(err) && err > 0; ++pass) {
      const Eigen::VectorXd next = sol + scaled_solve(r);
      const Eigen::VectorXd r_next = rhs - exact_ * next;
      const double err_next = inf_norm(r_next);
      if (!(err_next < err)) break;
      sol = next;
      r = r_next;
      err = err_next;
    }
    return sol;
  }

 private:
  Eigen::VectorXd scaled_solve(const Eigen::VectorXd& rhs) const {
    return scale_.cwiseProduct(lu_.solve(scale_.cwiseProduct(rhs)));
  }

  Eigen::Index n_;
  Eigen::Index p_;
  Eigen::Index m_;
  Eigen::VectorXd scale_;
  Eigen::MatrixXd exact_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct Direction {
  Eigen::VectorXd dx, dnu, ds, dz;
};

}  // namespace

const char* to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iterations: return "max-iterations";
  }
  return "unknown";
}

double KktResiduals::max() const { return std::max({stationarity, primal, complementarity}); }

void QuadraticProgram::validate() const {
  const Eigen::Index n = num_variables();
  require(objective_matrix.rows() == n && objective_matrix.cols() == n, ErrorKind::structural,
          "objective matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  require(eq_matrix.rows() == eq_rhs.size(), ErrorKind::structural,
          "equality matrix rows do not match rhs length");
  require(eq_matrix.rows() == 0 || eq_matrix.cols() == n, ErrorKind::structural,
          "equality matrix column count does not match variable count");
  require(ineq_matrix.rows() == ineq_rhs.size(), ErrorKind::structural,
          "inequality matrix rows do not match rhs length");
  require(ineq_matrix.rows() == 0 || ineq_matrix.cols() == n, ErrorKind::structural,
          "inequality matrix column count does not match variable count");
  require(ineq_curvature.empty() || static_cast<Eigen::Index>(ineq_curvature.size()) == ineq_matrix.rows(),
          ErrorKind::structural, "curvature list must be empty or one per inequality row");
  require(lower_bounds.size() == 0 || lower_bounds.size() == n, ErrorKind::structural,
          "lower bound vector length mismatch");
  require(upper_bounds.size() == 0 || upper_bounds.size() == n, ErrorKind::structural,
          "upper bound vector length mismatch");
  if (lower_bounds.size() == n && upper_bounds.size() == n)
    for (Eigen::Index i = 0; i < n; ++i)
      require(!(lower_bounds[i] > upper_bounds[i]), ErrorKind::structural,
              "lower bound exceeds upper bound for variable " + std::to_string(i));
  require(objective_vector.allFinite() && objective_matrix.allFinite() && eq_rhs.allFinite() &&
              ineq_rhs.allFinite() && eq_matrix.allFinite() && ineq_matrix.allFinite(),
          ErrorKind::structural, "non-finite problem data");
  check_psd(objective_matrix, "objective matrix");
  for (std::size_t k = 0; k < ineq_curvature.size(); ++k) {
    if (ineq_curvature[k].empty()) continue;
    for (const auto& e : ineq_curvature[k])
      require(e.row >= 0 && e.row < n && e.col >= 0 && e.col < n, ErrorKind::structural,
              "curvature entry out of range in inequality row " + std::to_string(k));
    check_psd(curvature_matrix(ineq_curvature[k], n), "curvature of inequality row " + std::to_string(k));
  }
}

double objective_value(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(qp.objective_matrix * x) + qp.objective_vector.dot(x);
}

Eigen::VectorXd inequality_values(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  Eigen::VectorXd v = qp.ineq_matrix.rows() ? Eigen::VectorXd(qp.ineq_matrix * x - qp.ineq_rhs)
                                            : Eigen::VectorXd(0);
  for (std::size_t k = 0; k < qp.ineq_curvature.size(); ++k)
    for (const auto& e : qp.ineq_curvature[k]) v[k] += 0.5 * e.value * x[e.row] * x[e.col];
  return v;
}

Violations violations(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  Violations v;
  const Eigen::Index n = qp.num_variables();
  v.equality = qp.eq_matrix.rows() ? Eigen::VectorXd((qp.eq_matrix * x - qp.eq_rhs).cwiseAbs())
                                   : Eigen::VectorXd(0);
  v.inequality = inequality_values(qp, x).cwiseMax(0.0);
  v.lower_bound = Eigen::VectorXd::Zero(qp.lower_bounds.size() == n ? n : 0);
  v.upper_bound = Eigen::VectorXd::Zero(qp.upper_bounds.size() == n ? n : 0);
  for (Eigen::Index i = 0; i < v.lower_bound.size(); ++i)
    if (std::isfinite(qp.lower_bounds[i])) v.lower_bound[i] = std::max(0.0, qp.lower_bounds[i] - x[i]);
  for (Eigen::Index i = 0; i < v.upper_bound.size(); ++i)
    if (std::isfinite(qp.upper_bounds[i])) v.upper_bound[i] = std::max(0.0, x[i] - qp.upper_bounds[i]);
  return v;
}

RowViolation Violations::worst() const {
  RowViolation w;
  w.amount = -1.0;
  auto scan = [&](const Eigen::VectorXd& v, RowKind kind) {
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (v[k] > w.amount) w = RowViolation{kind, k, v[k]};
  };
  scan(equality, RowKind::equality);
  scan(inequality, RowKind::inequality);
  scan(lower_bound, RowKind::lower_bound);
  scan(upper_bound, RowKind::upper_bound);
  if (w.amount < 0.0) w = RowViolation{RowKind::inequality, -1, 0.0};
  return w;
}

KktResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol) {
  const Eigen::Index n = qp.num_variables();
  const Eigen::VectorXd& x = sol.primal;
  require(x.size() == n, ErrorKind::structural, "primal vector length mismatch");
  require(sol.eq_duals.size() == qp.num_equalities(), ErrorKind::structural, "equality dual length mismatch");
  require(sol.ineq_duals.size() == qp.num_inequalities(), ErrorKind::structural,
          "inequality dual length mismatch");

  Eigen::VectorXd grad = qp.objective_matrix * x + qp.objective_vector;
  if (qp.num_equalities() > 0) grad -= qp.eq_matrix.transpose() * sol.eq_duals;
  if (qp.num_inequalities() > 0) grad += qp.ineq_matrix.transpose() * sol.ineq_duals;
  for (std::size_t k = 0; k < qp.ineq_curvature.size(); ++k)
    for (const auto& e : qp.ineq_curvature[k]) grad[e.row] += sol.ineq_duals[k] * e.value * x[e.col];
  if (sol.upper_bound_duals.size() == n) grad += sol.upper_bound_duals;
  if (sol.lower_bound_duals.size() == n) grad -= sol.lower_bound_duals;

  KktResiduals r;
  r.stationarity = inf_norm(grad);

  const Violations v = violations(qp, x);
  r.primal = std::max({inf_norm(v.equality), inf_norm(v.inequality), inf_norm(v.lower_bound),
                       inf_norm(v.upper_bound)});

  // Complementarity per row, plus any negative multiplier counted as a
  // violation of dual feasibility.
  double comp = 0.0;
  const Eigen::VectorXd g = inequality_values(qp, x);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    comp = std::max(comp, std::abs(sol.ineq_duals[k] * g[k]));
    comp = std::max(comp, -sol.ineq_duals[k]);
  }
  for (Eigen::Index i = 0; i < sol.upper_bound_duals.size(); ++i) {
    const double zu = sol.upper_bound_duals[i];
    if (zu != 0.0) comp = std::max(comp, std::abs(zu * (x[i] - qp.upper_bounds[i])));
    comp = std::max(comp, -zu);
  }
  for (Eigen::Index i = 0; i < sol.lower_bound_duals.size(); ++i) {
    const double zl = sol.lower_bound_duals[i];
    if (zl != 0.0) comp = std::max(comp, std::abs(zl * (qp.lower_bounds[i] - x[i])));
    comp = std::max(comp, -zl);
  }
  r.complementarity = comp;
  return r;
}

QpSolution solve_qp(const QuadraticProgram& qp, double tolerance) {
  SolverOptions options;
  options.tolerance = tolerance;
  return solve_qp(qp, options);
}

QpSolution solve_qp(const QuadraticProgram& qp, const SolverOptions& options) {
  require(options.tolerance > 0.0, ErrorKind::domain, "solver tolerance must be positive");
  qp.validate();
  const StandardForm sf = to_standard_form(qp);
  const Eigen::Index n = sf.n;
  const Eigen::Index p = sf.a_eq.rows();
  const Eigen::Index m = sf.j0.rows();
  const double tol = options.tolerance;

  Eigen::VectorXd x = initial_point(qp);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd s(m), z(m);
  {
    const Eigen::VectorXd g0 = sf.g(x);
    for (Eigen::Index k = 0; k < m; ++k) {
      s[k] = std::max(-g0[k], 1.0);
      z[k] = 1.0;
    }
  }

  const double data_scale =
      std::max({1.0, inf_norm(sf.c), sf.q.size() ? sf.q.lpNorm<Eigen::Infinity>() : 0.0});

  QpSolution out;
  auto evaluate = [&](const Eigen::VectorXd& xv, const Eigen::VectorXd& nuv, const Eigen::VectorXd& zv) {
    // Residuals on the standard form, mirroring kkt_residuals.
    const Eigen::VectorXd g = sf.g(xv);
    const Eigen::MatrixXd j = sf.jacobian(xv);
    Eigen::VectorXd rd = sf.q * xv + sf.c + j.transpose() * zv;
    if (p > 0) rd -= sf.a_eq.transpose() * nuv;
    KktResiduals r;
    r.stationarity = inf_norm(rd);
    double pr = p > 0 ? inf_norm(sf.a_eq * xv - sf.b_eq) : 0.0;
    if (m > 0) pr = std::max(pr, g.maxCoeff());
    r.primal = std::max(pr, 0.0);
    r.complementarity = m > 0 ? zv.cwiseProduct(g).cwiseAbs().maxCoeff() : 0.0;
    return r;
  };

  SolveStatus status = SolveStatus::max_iterations;
  int iter = 0;
  double best_primal = kInf;
  int stall = 0;
  for (; iter < options.max_iterations; ++iter) {
    const KktResiduals res = evaluate(x, nu, z);
    if (res.stationarity <= tol && res.primal <= tol && res.complementarity <= tol) {
      status = SolveStatus::optimal;
      break;
    }
    if (!x.allFinite() || !z.allFinite() || !nu.allFinite()) break;
    if (inf_norm(x) > 1e12) {
      status = SolveStatus::unbounded;
      break;
    }
    // Divergence of the multipliers while the primal residual stalls is the
    // signature of an empty feasible set.
    if (res.primal < 0.999 * best_primal) {
      best_primal = res.primal;
      stall = 0;
    } else {
      ++stall;
    }
    const double dual_size = std::max(inf_norm(z), inf_norm(nu));
    if (res.primal > std::sqrt(tol) && dual_size > 1e10 * data_scale && stall > 5) {
      status = SolveStatus::infeasible;
      break;
    }

    const Eigen::VectorXd g = sf.g(x);
    const Eigen::MatrixXd j = sf.jacobian(x);
    Eigen::VectorXd r_d = sf.q * x + sf.c + j.transpose() * z;
    if (p > 0) r_d -= sf.a_eq.transpose() * nu;
    const Eigen::VectorXd r_eq = p > 0 ? Eigen::VectorXd(sf.a_eq * x - sf.b_eq) : Eigen::VectorXd(0);
    const Eigen::VectorXd r_in = g + s;
    const double mu = m > 0 ? s.dot(z) / static_cast<double>(m) : 0.0;

    const KktSystem kkt(sf.lagrangian_hessian(z), sf.a_eq, j, s.cwiseQuotient(z));

    auto direction = [&](const Eigen::VectorXd& r_c) {
      Direction dir;
      Eigen::VectorXd rhs(n + p + m);
      rhs.head(n) = -r_d;
      if (p > 0) rhs.segment(n, p) = -r_eq;
      if (m > 0) rhs.tail(m) = r_c.cwiseQuotient(z) - r_in;
      const Eigen::VectorXd sol = kkt.solve(rhs);
      dir.dx = sol.head(n);
      dir.dnu = -sol.segment(n, p);
      dir.dz = sol.tail(m);
      dir.ds = m > 0 ? Eigen::VectorXd(-r_in - j * dir.dx) : Eigen::VectorXd(0);
      return dir;
    };

    Direction step;
    if (m > 0) {
      const Direction aff = direction(s.cwiseProduct(z));
      const double a_aff = std::min(max_step(s, aff.ds), max_step(z, aff.dz));
      const double mu_aff = (s + a_aff * aff.ds).dot(z + a_aff * aff.dz) / static_cast<double>(m);
      const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
      Eigen::VectorXd r_c = s.cwiseProduct(z) + aff.ds.cwiseProduct(aff.dz);
      r_c.array() -= sigma * mu;
      step = direction(r_c);
    } else {
      step = direction(Eigen::VectorXd(0));
    }
    if (!step.dx.allFinite()) break;

    double alpha = 1.0;
    if (m > 0) {
      const double tau = 0.995;
      alpha = std::min(1.0, tau * std::min(max_step(s, step.ds), max_step(z, step.dz)));
    }
    x += alpha * step.dx;
    if (p > 0) nu += alpha * step.dnu;
    if (m > 0) {
      s += alpha * step.ds;
      z += alpha * step.dz;
      s = s.cwiseMax(1e-300);
      z = z.cwiseMax(1e-300);
    }
  }

  // Map standard-form multipliers back to the caller's rows.
  out.primal = x;
  out.eq_duals = nu.head(sf.user_eq_rows);
  out.ineq_duals = z.head(sf.user_rows);
  out.upper_bound_duals = Eigen::VectorXd::Zero(qp.upper_bounds.size() == n ? n : 0);
  out.lower_bound_duals = Eigen::VectorXd::Zero(qp.lower_bounds.size() == n ? n : 0);
  Eigen::Index row = sf.user_rows;
  for (auto i : sf.upper_var) out.upper_bound_duals[i] = z[row++];
  for (auto i : sf.lower_var) out.lower_bound_duals[i] = z[row++];
  for (std::size_t k = 0; k < sf.fixed_var.size(); ++k) {
    const double v = nu[sf.user_eq_rows + static_cast<Eigen::Index>(k)];
    const auto i = sf.fixed_var[k];
    if (v >= 0.0) {
      out.lower_bound_duals[i] = v;
    } else {
      out.upper_bound_duals[i] = -v;
    }
  }
  out.iterations = iter;
  out.objective = objective_value(qp, x);
  // Lagrangian at the final point; equals the dual function value whenever
  // stationarity holds.
  out.dual_objective = out.objective;
  if (p > 0) out.dual_objective -= nu.dot(sf.a_eq * x - sf.b_eq);
  if (m > 0) out.dual_objective += z.dot(sf.g(x));

  if (status == SolveStatus::optimal) {
    out.residuals = kkt_residuals(qp, out);
    // The independent re-check must agree with the internal criterion.
    if (out.residuals.max() > tol) status = SolveStatus::max_iterations;
  } else if (x.allFinite()) {
    out.residuals = kkt_residuals(qp, out);
  } else {
    out.residuals = {kInf, kInf, kInf};
  }

  if (status != SolveStatus::optimal) {
    const Violations v = x.allFinite() ? violations(qp, x) : Violations{};
    out.worst_violation = x.allFinite() ? v.worst() : RowViolation{};
    if (status == SolveStatus::max_iterations && x.allFinite() && out.residuals.primal > std::sqrt(tol))
      status = SolveStatus::infeasible;
    std::ostringstream msg;
    msg << "status " << to_string(status) << " after " << iter << " iterations";
    if (out.worst_violation.index >= 0) {
      static const char* kinds[] = {"equality", "inequality", "lower bound", "upper bound"};
      msg << "; max violation " << out.worst_violation.amount << " on "
          << kinds[static_cast<int>(out.worst_violation.kind)] << " row " << out.worst_violation.index;
    }
    out.certificate = msg.str();
  }
  out.status = status;
  return out;
}

ElasticResult elastic_feasibility(const QuadraticProgram& qp, const SolverOptions& options,
                                  double feasibility_tolerance) {
  qp.validate();
  const Eigen::Index n = qp.num_variables();
  const Eigen::Index p = qp.num_equalities();
  const Eigen::Index m = qp.num_inequalities();
  // Variables: x, v_eq_plus (p), v_eq_minus (p), v_in (m); all v ≥ 0.
  const Eigen::Index nv = n + 2 * p + m;

  QuadraticProgram e;
  e.objective_matrix = Eigen::MatrixXd::Zero(nv, nv);
  // Tiny proximal term keeps x bounded in directions no row constrains.
  e.objective_matrix.topLeftCorner(n, n).diagonal().setConstant(1e-9);
  e.objective_vector = Eigen::VectorXd::Zero(nv);
  e.objective_vector.tail(2 * p + m).setOnes();

  e.eq_matrix = Eigen::MatrixXd::Zero(p, nv);
  e.eq_rhs = qp.eq_rhs;
  if (p > 0) {
    e.eq_matrix.leftCols(n) = qp.eq_matrix;
    e.eq_matrix.block(0, n, p, p) = Eigen::MatrixXd::Identity(p, p);
    e.eq_matrix.block(0, n + p, p, p) = -Eigen::MatrixXd::Identity(p, p);
  }
  e.ineq_matrix = Eigen::MatrixXd::Zero(m, nv);
  e.ineq_rhs = qp.ineq_rhs;
  if (m > 0) {
    e.ineq_matrix.leftCols(n) = qp.ineq_matrix;
    e.ineq_matrix.block(0, n + 2 * p, m, m) = -Eigen::MatrixXd::Identity(m, m);
  }
  e.ineq_curvature = qp.ineq_curvature;

  e.lower_bounds = Eigen::VectorXd::Constant(nv, -kInf);
  e.upper_bounds = Eigen::VectorXd::Constant(nv, kInf);
  if (qp.lower_bounds.size() == n) e.lower_bounds.head(n) = qp.lower_bounds;
  if (qp.upper_bounds.size() == n) e.upper_bounds.head(n) = qp.upper_bounds;
  e.lower_bounds.tail(2 * p + m).setZero();

  SolverOptions opts = options;
  opts.tolerance = std::max(options.tolerance, 1e-9);
  const QpSolution sol = solve_qp(e, opts);

  ElasticResult r;
  r.point = sol.primal.head(n);
  r.row_violations = violations(qp, r.point);
  r.worst = r.row_violations.worst();
  r.total_violation = r.row_violations.equality.sum() + r.row_violations.inequality.sum() +
                      r.row_violations.lower_bound.sum() + r.row_violations.upper_bound.sum();
  r.feasible = sol.status != SolveStatus::infeasible && r.worst.amount <= feasibility_tolerance;
  return r;
}

}  // namespace hydrofsr::qp
