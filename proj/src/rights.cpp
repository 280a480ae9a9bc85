#include "rights.hpp"

#include "error.hpp"
#include "program_builder.hpp"
#include "storage_rows.hpp"

#include <cmath>
#include <sstream>

namespace hydrofsr {

using Eigen::Index;
using detail::ProgramBuilder;
using detail::RowBlock;
using detail::SparseRow;

namespace {

std::string period_tag(int t) { return "t=" + std::to_string(t + 1); }

void require_kind(const Right& r, RightKind kind) {
  require(r.kind == kind, ErrorKind::contract,
          std::string("expected a ") + to_string(kind) + " right, got " + to_string(r.kind));
}

void check_profile(const Right& r, Index periods) {
  require(static_cast<Index>(r.profile.size()) == periods, ErrorKind::contract,
          std::string(to_string(r.kind)) + " right of '" + r.holder + "' does not match the horizon");
}

}  // namespace

const char* to_string(RightKind kind) noexcept {
  switch (kind) {
    case RightKind::ftr: return "FTR";
    case RightKind::fgr: return "FGR";
    case RightKind::fsr: return "FSR";
    case RightKind::ecr: return "ECR";
  }
  return "unknown";
}

RightKind right_kind_from_string(const std::string& name) {
  for (auto k : {RightKind::ftr, RightKind::fgr, RightKind::fsr, RightKind::ecr})
    if (name == to_string(k)) return k;
  fail(ErrorKind::validation, "unknown right kind '" + name + "' (expected FTR, FGR, FSR or ECR)");
}

Right Right::ftr(std::string holder, int from_bus, int to_bus, std::vector<double> profile) {
  Right r;
  r.kind = RightKind::ftr;
  r.holder = std::move(holder);
  r.from_bus = from_bus;
  r.to_bus = to_bus;
  r.profile = std::move(profile);
  return r;
}

Right Right::fgr(std::string holder, int directed_line, std::vector<double> profile) {
  Right r;
  r.kind = RightKind::fgr;
  r.holder = std::move(holder);
  r.line = directed_line;
  r.profile = std::move(profile);
  return r;
}

Right Right::fsr(std::string holder, int storage, int to_bus, std::vector<double> profile) {
  Right r;
  r.kind = RightKind::fsr;
  r.holder = std::move(holder);
  r.storage = storage;
  r.to_bus = to_bus;
  r.profile = std::move(profile);
  return r;
}

Right Right::ecr(std::string holder, int storage, std::vector<double> profile) {
  Right r;
  r.kind = RightKind::ecr;
  r.holder = std::move(holder);
  r.storage = storage;
  r.profile = std::move(profile);
  return r;
}

void validate_right(const Right& r, const MpedCase& c) {
  const std::string where = std::string(to_string(r.kind)) + " right of '" + r.holder + "'";
  require(static_cast<int>(r.profile.size()) == c.periods, ErrorKind::validation,
          where + ": profile needs one entry per period");
  for (double v : r.profile) require(std::isfinite(v), ErrorKind::validation, where + ": non-finite profile");
  auto bus_ok = [&](int b) { return b >= 0 && b < c.num_buses(); };
  auto storage_ok = [&](int s) { return s >= 0 && s < c.num_storage(); };
  switch (r.kind) {
    case RightKind::ftr:
      require(bus_ok(r.from_bus) && bus_ok(r.to_bus), ErrorKind::validation, where + ": bus out of range");
      break;
    case RightKind::fgr:
      require(r.line >= 0 && r.line < c.grid.num_directed(), ErrorKind::validation, where + ": line out of range");
      break;
    case RightKind::fsr:
      require(storage_ok(r.storage), ErrorKind::validation, where + ": storage out of range");
      require(bus_ok(r.to_bus), ErrorKind::validation, where + ": bus out of range");
      break;
    case RightKind::ecr:
      require(storage_ok(r.storage), ErrorKind::validation, where + ": storage out of range");
      break;
  }
  if (r.kind == RightKind::fgr || r.kind == RightKind::ecr)
    for (double v : r.profile) require(v >= 0.0, ErrorKind::validation, where + ": profile must be nonnegative");
}

PortfolioAggregates aggregate(const Portfolio& portfolio, const MpedCase& c) {
  const int horizon = c.periods;
  PortfolioAggregates a;
  a.injection = Eigen::MatrixXd::Zero(c.num_buses(), horizon);
  a.line = Eigen::MatrixXd::Zero(c.grid.num_directed(), horizon);
  a.withdrawal = Eigen::MatrixXd::Zero(c.num_buses(), horizon);
  a.storage = Eigen::MatrixXd::Zero(c.num_storage(), horizon);
  for (const auto& r : portfolio.rights) {
    validate_right(r, c);
    for (int t = 0; t < horizon; ++t) {
      const double v = r.profile[static_cast<std::size_t>(t)];
      switch (r.kind) {
        case RightKind::ftr:
          a.injection(r.from_bus, t) += v;
          a.injection(r.to_bus, t) -= v;
          break;
        case RightKind::fgr: a.line(r.line, t) += v; break;
        case RightKind::fsr: a.withdrawal(r.to_bus, t) += v; break;
        case RightKind::ecr: a.storage(r.storage, t) += v; break;
      }
    }
  }
  return a;
}

double ftr_rent(const Right& r, const DispatchSolution& sol) {
  require_kind(r, RightKind::ftr);
  check_profile(r, sol.lmp.cols());
  double total = 0.0;
  for (Index t = 0; t < sol.lmp.cols(); ++t)
    total += (sol.lmp(r.to_bus, t) - sol.lmp(r.from_bus, t)) * r.profile[static_cast<std::size_t>(t)];
  return total * sol.period_hours;
}

double fgr_rent(const Right& r, const DispatchSolution& sol) {
  require_kind(r, RightKind::fgr);
  check_profile(r, sol.congestion_price.cols());
  double total = 0.0;
  for (Index t = 0; t < sol.congestion_price.cols(); ++t)
    total += sol.congestion_price(r.line, t) * r.profile[static_cast<std::size_t>(t)];
  return total * sol.period_hours;
}

double fsr_rent(const Right& r, const DispatchSolution& sol) {
  require_kind(r, RightKind::fsr);
  check_profile(r, sol.lmp.cols());
  double total = 0.0;
  for (Index t = 0; t < sol.lmp.cols(); ++t) total += sol.lmp(r.to_bus, t) * r.profile[static_cast<std::size_t>(t)];
  return total * sol.period_hours;
}

double ecr_rent(const Right& r, const DispatchSolution& sol) {
  require_kind(r, RightKind::ecr);
  check_profile(r, sol.storage_upper_price.cols());
  double total = 0.0;
  for (Index t = 0; t < sol.storage_upper_price.cols(); ++t)
    total += sol.storage_upper_price(r.storage, t) * r.profile[static_cast<std::size_t>(t)];
  return total;
}

double rent(const Right& r, const DispatchSolution& sol) {
  switch (r.kind) {
    case RightKind::ftr: return ftr_rent(r, sol);
    case RightKind::fgr: return fgr_rent(r, sol);
    case RightKind::fsr: return fsr_rent(r, sol);
    case RightKind::ecr: return ecr_rent(r, sol);
  }
  return 0.0;
}

SftResult simultaneous_feasibility_test(const Portfolio& portfolio, const MpedCase& c) {
  c.validate();
  const auto agg = aggregate(portfolio, c);
  const int horizon = c.periods;
  const int ns = c.num_storage();
  const int nd = c.grid.num_directed();
  const Eigen::VectorXd& cap = c.grid.capacities();
  const Eigen::MatrixXd& g = c.grid.shift_factors();

  SftResult result;
  result.witness = Eigen::MatrixXd::Zero(ns, horizon);
  auto reject = [&](const std::string& row, double amount, const std::string& why) {
    result.feasible = false;
    result.violated_row = row;
    result.max_violation = amount;
    std::ostringstream msg;
    msg << "infeasible: row '" << row << "' violated by " << amount << " (" << why << ")";
    result.certificate = msg.str();
    return result;
  };

  // Reservations that exceed a capacity outright need no optimization.
  for (int t = 0; t < horizon; ++t)
    for (int l = 0; l < nd; ++l)
      if (cap[l] - agg.line(l, t) < 0.0)
        return reject("flow " + c.grid.directed_name(l) + " " + period_tag(t), agg.line(l, t) - cap[l],
                      "gate rights exceed the line capacity");
  for (int s = 0; s < ns; ++s) {
    const auto& r = c.storage[static_cast<std::size_t>(s)].reservoir;
    for (int t = 0; t < horizon; ++t) {
      const auto k = static_cast<std::size_t>(t);
      if (r.upper[k] - agg.storage(s, t) < r.lower[k])
        return reject("storage upper " + c.storage[static_cast<std::size_t>(s)].id + " " + period_tag(t),
                      r.lower[k] - (r.upper[k] - agg.storage(s, t)), "capacity rights exceed the storage band");
    }
  }

  ProgramBuilder b;
  std::vector<Eigen::VectorXd> headroom;
  for (int s = 0; s < ns; ++s) headroom.push_back(agg.storage.row(s).transpose());
  const auto block = detail::add_storage_block(b, c, &headroom);

  const Eigen::MatrixXd net = agg.injection - agg.withdrawal;
  for (int t = 0; t < horizon; ++t) {
    SparseRow balance;
    balance.name = "balance " + period_tag(t);
    balance.block = RowBlock::balance;
    for (int s = 0; s < ns; ++s) balance.terms.emplace_back(block.power[s][static_cast<std::size_t>(t)], 1.0);
    balance.rhs = -net.col(t).sum();
    b.add_equality(std::move(balance));

    const Eigen::VectorXd base_flow = g * net.col(t);
    for (int l = 0; l < nd; ++l) {
      SparseRow flow;
      flow.name = "flow " + c.grid.directed_name(l) + " " + period_tag(t);
      flow.block = RowBlock::flow;
      for (int s = 0; s < ns; ++s) {
        const double coef = g(l, c.storage[static_cast<std::size_t>(s)].bus);
        if (coef != 0.0) flow.terms.emplace_back(block.power[s][static_cast<std::size_t>(t)], coef);
      }
      flow.rhs = cap[l] - agg.line(l, t) - base_flow[l];
      b.add_inequality(std::move(flow));
    }
  }

  const qp::QuadraticProgram prog = b.build();
  const double tol = c.solver.feasibility_tolerance;
  Eigen::VectorXd point = Eigen::VectorXd::Zero(prog.num_variables());
  qp::RowViolation worst;
  if (prog.num_variables() > 0) {
    const auto elastic = qp::elastic_feasibility(prog, {c.solver.tolerance, c.solver.max_iterations}, tol);
    point = elastic.point;
    worst = elastic.worst;
  } else {
    worst = qp::violations(prog, point).worst();
  }
  for (int s = 0; s < ns; ++s)
    for (int t = 0; t < horizon; ++t) result.witness(s, t) = point[block.power[s][static_cast<std::size_t>(t)]];

  if (worst.amount > tol) return reject(b.describe(worst), worst.amount, "no storage schedule satisfies every row");
  result.feasible = true;
  result.max_violation = std::max(0.0, worst.amount);
  result.certificate = "feasible";
  return result;
}

SettlementReport revenue_adequacy_check(const DispatchSolution& sol, const Portfolio& portfolio,
                                        double tolerance) {
  SettlementReport rep;
  for (const auto& r : portfolio.rights) {
    const double v = rent(r, sol);
    rep.lines.push_back({r.kind, r.holder, v});
    switch (r.kind) {
      case RightKind::ftr: rep.total_ftr += v; break;
      case RightKind::fgr: rep.total_fgr += v; break;
      case RightKind::fsr: rep.total_fsr += v; break;
      case RightKind::ecr: rep.total_ecr += v; break;
    }
    rep.total += v;
  }
  const auto ms = merchandising_surplus(sol);
  rep.merchandising_surplus = ms.total;
  rep.storage_dispatch_value = ms.storage_term;
  rep.slack = ms.total - rep.total;
  rep.adequate = rep.total <= ms.total + tolerance * (1.0 + std::abs(ms.total));
  return rep;
}

RightsRegistry::RightsRegistry(MpedCase c) : case_(std::move(c)) { case_.validate(); }

SftResult RightsRegistry::issue(const Right& right) {
  validate_right(right, case_);
  std::lock_guard<std::mutex> lock(mutex_);
  Portfolio trial = portfolio_;
  trial.rights.push_back(right);
  auto verdict = simultaneous_feasibility_test(trial, case_);
  if (verdict.feasible) portfolio_ = std::move(trial);
  return verdict;
}

Portfolio RightsRegistry::snapshot() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return portfolio_;
}

FsrValuation value_fsr_flat_bid_reallocation(const MpedCase& c, int storage, double energy) {
  c.validate();
  require(storage >= 0 && storage < c.num_storage(), ErrorKind::contract, "valuation target is not a storage unit");
  const auto& unit = c.storage[static_cast<std::size_t>(storage)];
  const double flat = energy / (c.periods * c.period_hours);
  const auto conv = unit.conversion(c.period_hours);
  if (flat < conv.min_power || flat > conv.max_power) {
    std::ostringstream msg;
    msg << "flat schedule of " << flat << " MW for '" << unit.id << "' is outside [" << conv.min_power << ", "
        << conv.max_power << "]";
    fail(ErrorKind::contract, msg.str());
  }

  FsrValuation v;
  v.flat_schedule.assign(static_cast<std::size_t>(c.periods), flat);
  DispatchOverrides pinned;
  pinned.fixed_power.push_back({storage, v.flat_schedule});
  DispatchSolution step1;
  try {
    step1 = solve_mped(c, pinned);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::infeasible) throw;
    fail(ErrorKind::contract, "flat schedule for '" + unit.id + "' cannot be dispatched: " + e.what());
  }
  DispatchOverrides target;
  target.energy_targets.push_back({storage, energy});
  const DispatchSolution step2 = solve_mped(c, target);

  v.objective_flat = step1.objective;
  v.objective_free = step2.objective;
  v.valuation = step1.objective - step2.objective;
  v.lmp_flat = step1.lmp;
  v.lmp_free = step2.lmp;
  for (int t = 0; t < c.periods; ++t) v.free_schedule.push_back(step2.storage_power(storage, t));
  return v;
}

}  // namespace hydrofsr
