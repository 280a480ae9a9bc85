#include "dispatch.hpp"

#include "error.hpp"
#include "program_builder.hpp"
#include "storage_rows.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hydrofsr {

using Eigen::Index;
using detail::ProgramBuilder;
using detail::RowBlock;
using detail::SparseRow;

namespace {

constexpr double kInf = ProgramBuilder::kInf;

std::string period_tag(int t) { return "t=" + std::to_string(t + 1); }

std::vector<double> constant(int periods, double value) {
  return std::vector<double>(static_cast<std::size_t>(periods), value);
}

void check_series(const std::vector<double>& v, int periods, const std::string& what) {
  require(static_cast<int>(v.size()) == periods, ErrorKind::validation,
          what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(periods));
  for (double x : v) require(std::isfinite(x), ErrorKind::validation, what + " contains a non-finite value");
}

}  // namespace

const char* to_string(BidKind kind) noexcept {
  switch (kind) {
    case BidKind::offer: return "offer";
    case BidKind::bid: return "bid";
    case BidKind::fixed_load: return "fixed_load";
  }
  return "unknown";
}

CostFunction CostFunction::offer(int periods, double quadratic, double linear, double min_power,
                                 double max_power) {
  return CostFunction{BidKind::offer, constant(periods, quadratic), constant(periods, linear),
                      constant(periods, min_power), constant(periods, max_power)};
}

CostFunction CostFunction::bid(int periods, double quadratic, double price, double max_consumption) {
  return CostFunction{BidKind::bid, constant(periods, quadratic), constant(periods, price),
                      constant(periods, -max_consumption), constant(periods, 0.0)};
}

CostFunction CostFunction::fixed_load(std::vector<double> load) {
  const int periods = static_cast<int>(load.size());
  CostFunction c{BidKind::fixed_load, constant(periods, 0.0), constant(periods, 0.0), {}, {}};
  for (double l : load) {
    c.min_power.push_back(-l);
    c.max_power.push_back(-l);
  }
  return c;
}

reservoir::Conversion StorageUnit::conversion(double period_hours) const {
  if (kind == reservoir::StorageKind::hydro) {
    require(plant.has_value(), ErrorKind::validation, "hydro storage '" + id + "' has no plant");
    return reservoir::Conversion::of_plant(*plant);
  }
  return reservoir::Conversion::identity(charge_max, discharge_max, period_hours);
}

int MpedCase::storage_index(const std::string& id) const {
  for (int i = 0; i < num_storage(); ++i)
    if (storage[static_cast<std::size_t>(i)].id == id) return i;
  return -1;
}

int MpedCase::participant_index(const std::string& id) const {
  for (std::size_t i = 0; i < participants.size(); ++i)
    if (participants[i].id == id) return static_cast<int>(i);
  return -1;
}

reservoir::CascadeTopology MpedCase::topology() const {
  reservoir::CascadeTopology topo;
  for (const auto& s : storage) {
    topo.kinds.push_back(s.kind);
    topo.upstream.push_back(s.upstream);
    topo.names.push_back(s.id);
  }
  return topo;
}

void MpedCase::validate() const {
  require(periods >= 1, ErrorKind::validation, "horizon must contain at least one period");
  require(period_hours > 0.0 && std::isfinite(period_hours), ErrorKind::validation,
          "period length must be positive");
  require(num_buses() >= 1, ErrorKind::structural, "case has no grid");
  require(solver.tolerance > 0.0 && solver.max_iterations > 0, ErrorKind::validation,
          "solver tolerance and iteration limit must be positive");

  std::set<std::string> ids;
  for (const auto& p : participants) {
    const std::string where = "participant '" + p.id + "'";
    require(!p.id.empty() && ids.insert(p.id).second, ErrorKind::validation, where + ": id missing or duplicated");
    require(p.bus >= 0 && p.bus < num_buses(), ErrorKind::structural, where + ": bus out of range");
    const auto& c = p.cost;
    check_series(c.quadratic, periods, where + " quadratic cost");
    check_series(c.linear, periods, where + " linear cost");
    check_series(c.min_power, periods, where + " lower power limit");
    check_series(c.max_power, periods, where + " upper power limit");
    for (int t = 0; t < periods; ++t) {
      const auto k = static_cast<std::size_t>(t);
      const std::string at = where + " " + period_tag(t);
      require(c.quadratic[k] >= 0.0, ErrorKind::validation, at + ": quadratic cost must be nonnegative");
      require(c.min_power[k] <= c.max_power[k], ErrorKind::validation, at + ": lower power limit exceeds upper");
      switch (c.kind) {
        case BidKind::offer:
          require(c.min_power[k] >= 0.0, ErrorKind::validation, at + ": offers cannot consume");
          break;
        case BidKind::bid:
          require(c.max_power[k] <= 0.0, ErrorKind::validation, at + ": bids cannot produce");
          break;
        case BidKind::fixed_load:
          require(c.min_power[k] == c.max_power[k] && c.max_power[k] <= 0.0, ErrorKind::validation,
                  at + ": fixed load must pin a nonnegative consumption");
          break;
      }
    }
  }

  ids.clear();
  for (const auto& s : storage) {
    const std::string where = "storage '" + s.id + "'";
    require(!s.id.empty() && ids.insert(s.id).second, ErrorKind::validation, where + ": id missing or duplicated");
    require(s.bus >= 0 && s.bus < num_buses(), ErrorKind::structural, where + ": bus out of range");
    require(static_cast<int>(s.reservoir.lower.size()) == periods, ErrorKind::validation,
            where + ": storage series must have one entry per period");
    s.reservoir.validate(s.kind, where);
    if (s.kind == reservoir::StorageKind::hydro) {
      require(s.plant.has_value(), ErrorKind::validation, where + ": hydro storage needs plant parameters");
    } else {
      require(s.charge_max >= 0.0 && s.discharge_max >= 0.0, ErrorKind::validation,
              where + ": power limits must be nonnegative");
      require(s.upstream.empty(), ErrorKind::validation, where + ": batteries have no upstream nodes");
    }
  }
  reservoir::validate_cascade(topology());
}

std::string AssembledProblem::row_name(const qp::RowViolation& v) const {
  const auto i = static_cast<std::size_t>(std::max<Index>(v.index, 0));
  switch (v.kind) {
    case qp::RowKind::equality: return v.index >= 0 ? map.eq_names[i] : "none";
    case qp::RowKind::inequality: return v.index >= 0 ? map.ineq_names[i] : "none";
    case qp::RowKind::lower_bound: return "lower limit of " + map.variable_names[i];
    case qp::RowKind::upper_bound: return "upper limit of " + map.variable_names[i];
  }
  return "unknown";
}

namespace detail {

StorageBlock add_storage_block(ProgramBuilder& builder, const MpedCase& c,
                               const std::vector<Eigen::VectorXd>* headroom) {
  const int ns = c.num_storage();
  const int horizon = c.periods;
  StorageBlock block;
  block.power.resize(static_cast<std::size_t>(ns));
  block.upper_rows.resize(static_cast<std::size_t>(ns));
  block.lower_rows.resize(static_cast<std::size_t>(ns));

  std::vector<reservoir::Conversion> conv;
  for (int i = 0; i < ns; ++i) {
    const auto& s = c.storage[static_cast<std::size_t>(i)];
    conv.push_back(s.conversion(c.period_hours));
    for (int t = 0; t < horizon; ++t)
      block.power[i].push_back(builder.add_variable("U " + s.id + " " + period_tag(t),
                                                    conv[i].min_power, conv[i].max_power));
  }

  // Adds q(u) (curved) or its linear part b·u, with the given sign, for every
  // period τ ≤ t of node j shifted by `lag`.
  auto accumulate = [&](SparseRow& row, int j, int lag, int t, double sign, bool curved) {
    for (int tau = 0; tau + lag <= t; ++tau) {
      const Index col = block.power[j][static_cast<std::size_t>(tau)];
      row.terms.emplace_back(col, sign * conv[j].b);
      if (curved && conv[j].a > 0.0) row.curvature.push_back({col, col, 2.0 * conv[j].a});
    }
  };

  for (int i = 0; i < ns; ++i) {
    const auto& s = c.storage[static_cast<std::size_t>(i)];
    const auto& r = s.reservoir;
    double cumulative_inflow = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const auto k = static_cast<std::size_t>(t);
      cumulative_inflow += r.inflow[k];
      const double e = headroom ? (*headroom)[static_cast<std::size_t>(i)][t] : 0.0;

      SparseRow upper;
      upper.name = "storage upper " + s.id + " " + period_tag(t);
      upper.block = RowBlock::storage;
      for (const auto& link : s.upstream) accumulate(upper, link.node, link.lag, t, 1.0, true);
      accumulate(upper, i, 0, t, -1.0, false);
      upper.rhs = r.upper[k] - e - r.initial - cumulative_inflow;
      block.upper_rows[i].push_back(builder.add_inequality(std::move(upper)));

      SparseRow lower;
      lower.name = "storage lower " + s.id + " " + period_tag(t);
      lower.block = RowBlock::storage;
      accumulate(lower, i, 0, t, 1.0, true);
      for (const auto& link : s.upstream) accumulate(lower, link.node, link.lag, t, -1.0, false);
      lower.rhs = r.initial + cumulative_inflow - r.lower[k];
      block.lower_rows[i].push_back(builder.add_inequality(std::move(lower)));
    }
  }
  return block;
}

}  // namespace detail

AssembledProblem assemble_mped(const MpedCase& c, const DispatchOverrides& overrides) {
  c.validate();
  const int horizon = c.periods;
  const double dt = c.period_hours;
  const auto& g = c.grid.shift_factors();
  const Eigen::VectorXd& cap = c.grid.capacities();

  ProgramBuilder b;
  VariableMap map;
  for (const auto& p : c.participants) {
    std::vector<Index> cols;
    for (int t = 0; t < horizon; ++t) {
      const auto k = static_cast<std::size_t>(t);
      cols.push_back(b.add_variable("P " + p.id + " " + period_tag(t), p.cost.min_power[k], p.cost.max_power[k],
                                    dt * p.cost.linear[k], dt * p.cost.quadratic[k]));
    }
    map.participant.push_back(std::move(cols));
  }
  const auto storage = detail::add_storage_block(b, c);
  map.storage_power = storage.power;
  map.storage_upper_rows = storage.upper_rows;
  map.storage_lower_rows = storage.lower_rows;

  // Injection of bus `bus` in period t as (column, coefficient) terms.
  auto bus_terms = [&](int bus, int t) {
    std::vector<std::pair<Index, double>> terms;
    for (std::size_t p = 0; p < c.participants.size(); ++p)
      if (c.participants[p].bus == bus) terms.emplace_back(map.participant[p][static_cast<std::size_t>(t)], 1.0);
    for (int s = 0; s < c.num_storage(); ++s)
      if (c.storage[static_cast<std::size_t>(s)].bus == bus)
        terms.emplace_back(map.storage_power[s][static_cast<std::size_t>(t)], 1.0);
    return terms;
  };

  map.flow_rows.assign(static_cast<std::size_t>(c.grid.num_directed()), {});
  for (int t = 0; t < horizon; ++t) {
    SparseRow balance;
    balance.name = "balance " + period_tag(t);
    balance.block = RowBlock::balance;
    for (int bus = 0; bus < c.num_buses(); ++bus)
      for (const auto& term : bus_terms(bus, t)) balance.terms.push_back(term);
    map.balance_rows.push_back(b.add_equality(std::move(balance)));

    for (int l = 0; l < c.grid.num_directed(); ++l) {
      SparseRow flow;
      flow.name = "flow " + c.grid.directed_name(l) + " " + period_tag(t);
      flow.block = RowBlock::flow;
      flow.rhs = cap[l];
      for (int bus = 0; bus < c.num_buses(); ++bus) {
        const double coef = g(l, bus);
        if (coef == 0.0) continue;
        for (const auto& [col, one] : bus_terms(bus, t)) flow.terms.emplace_back(col, coef * one);
      }
      map.flow_rows[static_cast<std::size_t>(l)].push_back(b.add_inequality(std::move(flow)));
    }
  }

  for (const auto& sched : overrides.fixed_power) {
    require(sched.storage >= 0 && sched.storage < c.num_storage(), ErrorKind::contract,
            "pinned schedule refers to a missing storage unit");
    const auto& unit = c.storage[static_cast<std::size_t>(sched.storage)];
    require(static_cast<int>(sched.power.size()) == horizon, ErrorKind::contract,
            "pinned schedule for '" + unit.id + "' must cover every period");
    const auto conv = unit.conversion(dt);
    for (int t = 0; t < horizon; ++t) {
      const double u = sched.power[static_cast<std::size_t>(t)];
      const double slack = 1e-9 * std::max(1.0, std::abs(u));
      require(u >= conv.min_power - slack && u <= conv.max_power + slack, ErrorKind::contract,
              "pinned power of '" + unit.id + "' " + period_tag(t) + " is outside the unit limits");
      b.set_bounds(map.storage_power[sched.storage][static_cast<std::size_t>(t)], u, u);
    }
  }
  for (const auto& target : overrides.energy_targets) {
    require(target.storage >= 0 && target.storage < c.num_storage(), ErrorKind::contract,
            "energy target refers to a missing storage unit");
    SparseRow row;
    row.name = "energy total " + c.storage[static_cast<std::size_t>(target.storage)].id;
    row.block = RowBlock::energy;
    row.rhs = target.energy;
    for (Index col : map.storage_power[target.storage]) row.terms.emplace_back(col, dt);
    map.energy_rows.push_back(b.add_equality(std::move(row)));
  }

  for (std::size_t k = 0; k < b.equalities().size(); ++k) {
    map.eq_names.push_back(b.equalities()[k].name);
    if (b.equalities()[k].block == RowBlock::energy) map.storage_eq_rows.push_back(static_cast<Index>(k));
  }
  for (std::size_t k = 0; k < b.inequalities().size(); ++k) {
    map.ineq_names.push_back(b.inequalities()[k].name);
    if (b.inequalities()[k].block == RowBlock::storage) map.storage_ineq_rows.push_back(static_cast<Index>(k));
  }
  map.variable_names = b.variable_names();
  return AssembledProblem{b.build(), std::move(map)};
}

DispatchSolution solve_mped(const MpedCase& c, const DispatchOverrides& overrides) {
  const AssembledProblem problem = assemble_mped(c, overrides);
  const auto& prog = problem.program;
  const auto& map = problem.map;
  const qp::SolverOptions options{c.solver.tolerance, c.solver.max_iterations};
  const qp::QpSolution qs = qp::solve_qp(prog, options);

  if (qs.status == qp::SolveStatus::infeasible) {
    const auto elastic = qp::elastic_feasibility(prog, options, c.solver.feasibility_tolerance);
    std::ostringstream msg;
    msg << "dispatch of case '" << c.name << "' is infeasible";
    if (!elastic.feasible)
      msg << ": most violated row is '" << problem.row_name(elastic.worst) << "' by " << elastic.worst.amount;
    fail(ErrorKind::infeasible, msg.str());
  }
  if (qs.status != qp::SolveStatus::optimal) {
    std::ostringstream msg;
    msg << "dispatch of case '" << c.name << "' did not converge (" << qp::to_string(qs.status)
        << ", residual " << qs.residuals.max() << ")";
    fail(ErrorKind::solver, msg.str());
  }

  const int horizon = c.periods;
  const int n = c.num_buses();
  const int ns = c.num_storage();
  const int np = static_cast<int>(c.participants.size());
  const int nd = c.grid.num_directed();
  const double dt = c.period_hours;
  const Eigen::VectorXd& x = qs.primal;

  DispatchSolution sol;
  sol.status = qs.status;
  sol.residuals = qs.residuals;
  sol.objective = qs.objective;
  sol.period_hours = dt;
  sol.bus_generation = Eigen::MatrixXd::Zero(n, horizon);
  sol.bus_storage = Eigen::MatrixXd::Zero(n, horizon);
  sol.participant_power = Eigen::MatrixXd::Zero(np, horizon);
  sol.storage_power = Eigen::MatrixXd::Zero(ns, horizon);
  sol.discharge = Eigen::MatrixXd::Zero(ns, horizon);
  sol.storage_level = Eigen::MatrixXd::Zero(ns, horizon);
  sol.energy_price = Eigen::VectorXd::Zero(horizon);
  sol.congestion_price = Eigen::MatrixXd::Zero(nd, horizon);
  sol.storage_upper_price = Eigen::MatrixXd::Zero(ns, horizon);
  sol.storage_lower_price = Eigen::MatrixXd::Zero(ns, horizon);
  sol.storage_marginal_value = Eigen::MatrixXd::Zero(ns, horizon);

  for (int p = 0; p < np; ++p)
    for (int t = 0; t < horizon; ++t) {
      const double v = x[map.participant[p][static_cast<std::size_t>(t)]];
      sol.participant_power(p, t) = v;
      sol.bus_generation(c.participants[static_cast<std::size_t>(p)].bus, t) += v;
    }

  std::vector<std::vector<double>> releases(static_cast<std::size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    const auto& unit = c.storage[static_cast<std::size_t>(s)];
    const auto conv = unit.conversion(dt);
    std::vector<double> u(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
      // Interior-point iterates sit within tolerance of the box; snap them in.
      u[static_cast<std::size_t>(t)] =
          std::clamp(x[map.storage_power[s][static_cast<std::size_t>(t)]], conv.min_power, conv.max_power);
      sol.storage_power(s, t) = u[static_cast<std::size_t>(t)];
      sol.bus_storage(unit.bus, t) += u[static_cast<std::size_t>(t)];
    }
    releases[static_cast<std::size_t>(s)] = reservoir::conversion_series(conv, u);
    for (int t = 0; t < horizon; ++t) sol.discharge(s, t) = releases[s][static_cast<std::size_t>(t)];
  }
  const auto topo = c.topology();
  for (int s = 0; s < ns; ++s) {
    const auto z = reservoir::storage_trajectory(c.storage[static_cast<std::size_t>(s)].reservoir, topo, s, releases);
    for (int t = 0; t < horizon; ++t) sol.storage_level(s, t) = z[static_cast<std::size_t>(t)];
  }

  const auto& g = c.grid.shift_factors();
  sol.line_flow = g * (sol.bus_generation + sol.bus_storage);
  for (int t = 0; t < horizon; ++t) {
    sol.energy_price[t] = qs.eq_duals[map.balance_rows[static_cast<std::size_t>(t)]] / dt;
    for (int l = 0; l < nd; ++l)
      sol.congestion_price(l, t) = qs.ineq_duals[map.flow_rows[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)]] / dt;
    for (int s = 0; s < ns; ++s) {
      sol.storage_upper_price(s, t) = qs.ineq_duals[map.storage_upper_rows[s][static_cast<std::size_t>(t)]];
      sol.storage_lower_price(s, t) = qs.ineq_duals[map.storage_lower_rows[s][static_cast<std::size_t>(t)]];
    }
  }
  sol.lmp = lmps(sol, c.grid);

  // Gradient of the storage subsystem's Lagrangian terms at each storage
  // power column: rows, energy targets and the column's own box.
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(x.size());
  for (Index k : map.storage_ineq_rows) {
    const double z = qs.ineq_duals[k];
    if (z == 0.0) continue;
    Eigen::VectorXd grad = prog.ineq_matrix.row(k).transpose();
    if (prog.has_curvature())
      for (const auto& e : prog.ineq_curvature[static_cast<std::size_t>(k)]) grad[e.row] += e.value * x[e.col];
    psi += z * grad;
  }
  for (Index k : map.storage_eq_rows) psi -= qs.eq_duals[k] * prog.eq_matrix.row(k).transpose();
  for (int s = 0; s < ns; ++s)
    for (int t = 0; t < horizon; ++t) {
      const Index col = map.storage_power[s][static_cast<std::size_t>(t)];
      sol.storage_marginal_value(s, t) = psi[col] + qs.upper_bound_duals[col] - qs.lower_bound_duals[col];
    }
  return sol;
}

Eigen::MatrixXd lmps(const DispatchSolution& sol, const grid::GridModel& grid) {
  const Index horizon = sol.energy_price.size();
  Eigen::MatrixXd lambda(grid.num_buses(), horizon);
  const Eigen::MatrixXd& g = grid.shift_factors();
  for (Index t = 0; t < horizon; ++t) {
    lambda.col(t).setConstant(sol.energy_price[t]);
    if (g.rows() > 0) lambda.col(t) -= g.transpose() * sol.congestion_price.col(t);
  }
  return lambda;
}

SurplusBreakdown merchandising_surplus(const DispatchSolution& sol) {
  const double dt = sol.period_hours;
  SurplusBreakdown out;
  out.total = -dt * (sol.lmp.array() * sol.bus_generation.array()).sum();
  if (sol.line_flow.rows() > 0)
    out.flow_term = dt * (sol.congestion_price.array() * sol.line_flow.array()).sum();
  out.storage_term = (sol.storage_marginal_value.array() * sol.storage_power.array()).sum();
  const double gap = std::abs(out.total - out.flow_term - out.storage_term);
  if (gap > 1e-5 * (1.0 + std::abs(out.total))) {
    std::ostringstream msg;
    msg << "merchandising surplus " << out.total << " disagrees with its decomposition (flow "
        << out.flow_term << " + storage " << out.storage_term << ")";
    fail(ErrorKind::consistency, msg.str());
  }
  return out;
}

}  // namespace hydrofsr
