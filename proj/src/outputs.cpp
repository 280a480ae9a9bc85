#include "outputs.hpp"

#include "casefile.hpp"
#include "error.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace hydrofsr::outputs {

using json = nlohmann::ordered_json;

namespace {

std::string period_label(int t) { return std::to_string(t + 1); }

// One row per (entity, period) of an entity×T matrix.
std::string long_table(const std::string& header, const std::vector<std::string>& prefixes, const Eigen::MatrixXd& m) {
  std::string out = header + "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index t = 0; t < m.cols(); ++t)
      out += prefixes[static_cast<std::size_t>(i)] + "," + period_label(static_cast<int>(t)) + "," + format_number(m(i, t)) + "\n";
  return out;
}

std::vector<std::string> storage_ids(const MpedCase& c) {
  std::vector<std::string> out;
  for (const auto& s : c.storage) out.push_back(s.id);
  return out;
}

std::vector<std::string> storage_with_bus(const MpedCase& c) {
  std::vector<std::string> out;
  for (const auto& s : c.storage) out.push_back(s.id + "," + c.grid.bus_names()[static_cast<std::size_t>(s.bus)]);
  return out;
}

std::vector<std::string> directed_names(const MpedCase& c) {
  std::vector<std::string> out;
  for (int l = 0; l < c.grid.num_directed(); ++l) out.push_back(c.grid.directed_name(l));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

class SolutionReader {
 public:
  SolutionReader(const json& root, std::string origin) : root_(root), origin_(std::move(origin)) {}

  [[noreturn]] void error(const std::string& field, const std::string& msg) const {
    fail(ErrorKind::schema, origin_ + ": " + field + ": " + msg);
  }

  const json& get(const std::string& key) const {
    const auto it = root_.find(key);
    if (it == root_.end()) error(key, "required field is missing");
    return *it;
  }

  double number(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_number()) error(key, "expected a number");
    return v.get<double>();
  }

  Eigen::MatrixXd matrix(const std::string& key, Eigen::Index rows, Eigen::Index cols) const {
    const json& v = get(key);
    if (!v.is_object() || !v.contains("rows") || !v.contains("cols") || !v.contains("data") || !v["data"].is_array())
      error(key, "expected {rows, cols, data}");
    if (v["rows"] != rows || v["cols"] != cols)
      error(key, "expected a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    const json& data = v["data"];
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) error(key, "data length does not match shape");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        const json& x = data[static_cast<std::size_t>(i * cols + j)];
        if (!x.is_number()) error(key, "non-numeric entry");
        m(i, j) = x.get<double>();
      }
    return m;
  }

 private:
  const json& root_;
  std::string origin_;
};

}  // namespace

std::string format_number(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string run_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string("# run: ") + buf;
}

std::vector<CsvTable> dispatch_tables(const MpedCase& c, const DispatchSolution& sol) {
  const auto& buses = c.grid.bus_names();
  std::vector<std::string> parts;
  for (const auto& p : c.participants) parts.push_back(p.id + "," + buses[static_cast<std::size_t>(p.bus)]);
  const auto lines = directed_names(c);
  const auto stores = storage_ids(c);
  return {
      {"P", long_table("participant,bus,period,power_mw", parts, sol.participant_power)},
      {"U", long_table("storage,bus,period,power_mw", storage_with_bus(c), sol.storage_power)},
      {"Q", long_table("storage,period,discharge", stores, sol.discharge)},
      {"level", long_table("storage,period,volume", stores, sol.storage_level)},
      {"lambda", long_table("bus,period,lmp", buses, sol.lmp)},
      {"mu", long_table("line,period,congestion_price", lines, sol.congestion_price)},
      {"flow", long_table("line,period,flow_mw", lines, sol.line_flow)},
      {"eta_upper", long_table("storage,period,price", stores, sol.storage_upper_price)},
      {"eta_lower", long_table("storage,period,price", stores, sol.storage_lower_price)},
  };
}

std::string dispatch_summary(const MpedCase& c, const DispatchSolution& sol) {
  const SurplusBreakdown ms = merchandising_surplus(sol);
  std::ostringstream out;
  out << "case: " << c.name << "\n";
  out << "status: " << qp::to_string(sol.status) << "\n";
  out << "buses: " << c.num_buses() << ", lines: " << c.grid.num_lines() << ", storage units: " << c.num_storage()
      << "\n";
  out << "periods: " << c.periods << " x " << format_number(c.period_hours) << " h\n";
  out << "objective: " << format_number(sol.objective) << " $\n";
  out << "merchandising surplus: " << format_number(ms.total) << " $\n";
  out << "  congestion term: " << format_number(ms.flow_term) << " $\n";
  out << "  storage term: " << format_number(ms.storage_term) << " $\n";
  for (int t = 0; t < c.periods; ++t) out << "energy price t=" << t + 1 << ": " << format_number(sol.energy_price(t)) << " $/MWh\n";
  out << "kkt residuals: stationarity " << format_number(sol.residuals.stationarity) << ", primal "
      << format_number(sol.residuals.primal) << ", complementarity " << format_number(sol.residuals.complementarity)
      << "\n";
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, path.string() + ": cannot open for writing");
  out << text;
  if (!out) fail(ErrorKind::io, path.string() + ": write failed");
}

void write_dispatch(const std::filesystem::path& dir, const MpedCase& c, const DispatchSolution& sol,
                    const std::string& stamp) {
  for (const auto& table : dispatch_tables(c, sol)) write_file(dir / (table.name + ".csv"), stamp + "\n" + table.body);
  write_file(dir / "summary.txt", dispatch_summary(c, sol));
  write_file(dir / "solution.json", solution_to_json(sol));
}

std::string solution_to_json(const DispatchSolution& sol) {
  json j;
  j["status"] = qp::to_string(sol.status);
  j["residuals"] = {{"stationarity", sol.residuals.stationarity},
                    {"primal", sol.residuals.primal},
                    {"complementarity", sol.residuals.complementarity}};
  j["objective"] = sol.objective;
  j["period_hours"] = sol.period_hours;
  j["bus_generation"] = matrix_json(sol.bus_generation);
  j["bus_storage"] = matrix_json(sol.bus_storage);
  j["participant_power"] = matrix_json(sol.participant_power);
  j["storage_power"] = matrix_json(sol.storage_power);
  j["discharge"] = matrix_json(sol.discharge);
  j["storage_level"] = matrix_json(sol.storage_level);
  j["line_flow"] = matrix_json(sol.line_flow);
  j["energy_price"] = matrix_json(sol.energy_price);
  j["congestion_price"] = matrix_json(sol.congestion_price);
  j["storage_upper_price"] = matrix_json(sol.storage_upper_price);
  j["storage_lower_price"] = matrix_json(sol.storage_lower_price);
  j["lmp"] = matrix_json(sol.lmp);
  j["storage_marginal_value"] = matrix_json(sol.storage_marginal_value);
  return j.dump(1) + "\n";
}

DispatchSolution solution_from_json(const std::string& text, const std::string& origin, const MpedCase& c) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, origin + ": " + e.what());
  }
  if (!root.is_object()) fail(ErrorKind::schema, origin + ": expected a JSON object");
  const SolutionReader r(root, origin);
  const Eigen::Index n = c.num_buses(), T = c.periods, ns = c.num_storage();
  const Eigen::Index np = static_cast<Eigen::Index>(c.participants.size()), nl = c.grid.num_directed();

  DispatchSolution sol;
  const json& status = r.get("status");
  bool known = false;
  for (auto s : {qp::SolveStatus::optimal, qp::SolveStatus::infeasible, qp::SolveStatus::unbounded,
                 qp::SolveStatus::max_iterations})
    if (status == qp::to_string(s)) {
      sol.status = s;
      known = true;
    }
  if (!known) r.error("status", "unknown solver status");
  const json& res = r.get("residuals");
  const SolutionReader rr(res, origin);
  sol.residuals.stationarity = rr.number("stationarity");
  sol.residuals.primal = rr.number("primal");
  sol.residuals.complementarity = rr.number("complementarity");
  sol.objective = r.number("objective");
  sol.period_hours = r.number("period_hours");
  sol.bus_generation = r.matrix("bus_generation", n, T);
  sol.bus_storage = r.matrix("bus_storage", n, T);
  sol.participant_power = r.matrix("participant_power", np, T);
  sol.storage_power = r.matrix("storage_power", ns, T);
  sol.discharge = r.matrix("discharge", ns, T);
  sol.storage_level = r.matrix("storage_level", ns, T);
  sol.line_flow = r.matrix("line_flow", nl, T);
  sol.energy_price = r.matrix("energy_price", T, 1);
  sol.congestion_price = r.matrix("congestion_price", nl, T);
  sol.storage_upper_price = r.matrix("storage_upper_price", ns, T);
  sol.storage_lower_price = r.matrix("storage_lower_price", ns, T);
  sol.lmp = r.matrix("lmp", n, T);
  sol.storage_marginal_value = r.matrix("storage_marginal_value", ns, T);
  return sol;
}

DispatchSolution read_solution(const std::filesystem::path& dir, const MpedCase& c) {
  const auto path = dir / "solution.json";
  if (!std::filesystem::exists(path))
    fail(ErrorKind::ordering, path.string() + ": no dispatch solution found; run `dispatch` first");
  return solution_from_json(casefile::read_text(path), path.string(), c);
}

std::string settlement_csv(const MpedCase& c, const Portfolio& p, const SettlementReport& r) {
  const auto& buses = c.grid.bus_names();
  std::string out = "index,kind,holder,target,rent\n";
  for (std::size_t i = 0; i < r.lines.size(); ++i) {
    const Right& right = p.rights[i];
    std::string target;
    switch (right.kind) {
      case RightKind::ftr:
        target = buses[static_cast<std::size_t>(right.from_bus)] + "->" + buses[static_cast<std::size_t>(right.to_bus)];
        break;
      case RightKind::fgr: target = c.grid.directed_name(right.line); break;
      case RightKind::fsr:
        target = c.storage[static_cast<std::size_t>(right.storage)].id + "->" + buses[static_cast<std::size_t>(right.to_bus)];
        break;
      case RightKind::ecr: target = c.storage[static_cast<std::size_t>(right.storage)].id; break;
    }
    out += std::to_string(i + 1) + "," + to_string(r.lines[i].kind) + "," + r.lines[i].holder + "," + target + "," +
           format_number(r.lines[i].rent) + "\n";
  }
  return out;
}

std::string settlement_summary(const SettlementReport& r) {
  std::ostringstream out;
  out << "rights settled: " << r.lines.size() << "\n";
  out << "FTR rents: " << format_number(r.total_ftr) << " $\n";
  out << "FGR rents: " << format_number(r.total_fgr) << " $\n";
  out << "FSR rents: " << format_number(r.total_fsr) << " $\n";
  out << "ECR rents: " << format_number(r.total_ecr) << " $\n";
  out << "total rents: " << format_number(r.total) << " $\n";
  out << "merchandising surplus: " << format_number(r.merchandising_surplus) << " $\n";
  out << "storage dispatch value: " << format_number(r.storage_dispatch_value) << " $\n";
  out << "slack: " << format_number(r.slack) << " $\n";
  out << "revenue adequate: " << (r.adequate ? "yes" : "no") << "\n";
  return out.str();
}

std::string sft_report(const MpedCase& c, const SftResult& r) {
  std::ostringstream out;
  out << "case: " << c.name << "\n";
  out << "verdict: " << (r.feasible ? "feasible" : "infeasible") << "\n";
  out << "max violation: " << format_number(r.max_violation) << "\n";
  if (!r.feasible) out << "violated row: " << r.violated_row << "\n";
  if (!r.certificate.empty()) out << "certificate: " << r.certificate << "\n";
  return out.str();
}

std::string sft_witness_csv(const MpedCase& c, const SftResult& r) {
  if (r.witness.rows() != c.num_storage()) return "storage,bus,period,power_mw\n";
  return long_table("storage,bus,period,power_mw", storage_with_bus(c), r.witness);
}

std::string valuation_report(const MpedCase& c, int storage, double energy, const FsrValuation& v) {
  std::ostringstream out;
  out << "case: " << c.name << "\n";
  out << "storage: " << c.storage[static_cast<std::size_t>(storage)].id << "\n";
  out << "energy: " << format_number(energy) << " MWh\n";
  out << "objective with flat schedule: " << format_number(v.objective_flat) << " $\n";
  out << "objective with free schedule: " << format_number(v.objective_free) << " $\n";
  out << "valuation: " << format_number(v.valuation) << " $\n";
  return out.str();
}

std::string valuation_csv(const MpedCase& c, const FsrValuation& v) {
  std::string out = "period,flat_mw,free_mw";
  const auto& buses = c.grid.bus_names();
  for (const auto& b : buses) out += ",lmp_flat_" + b;
  for (const auto& b : buses) out += ",lmp_free_" + b;
  out += "\n";
  for (int t = 0; t < c.periods; ++t) {
    out += period_label(t) + "," + format_number(v.flat_schedule[static_cast<std::size_t>(t)]) + "," +
           format_number(v.free_schedule[static_cast<std::size_t>(t)]);
    for (Eigen::Index b = 0; b < v.lmp_flat.rows(); ++b) out += "," + format_number(v.lmp_flat(b, t));
    for (Eigen::Index b = 0; b < v.lmp_free.rows(); ++b) out += "," + format_number(v.lmp_free(b, t));
    out += "\n";
  }
  return out;
}

}  // namespace hydrofsr::outputs
