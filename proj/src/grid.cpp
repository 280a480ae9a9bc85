#include "grid.hpp"

#include "error.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace hydrofsr::grid {

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

void check_connected(int buses, const std::vector<Line>& lines) {
  std::vector<int> parent(static_cast<std::size_t>(buses));
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& l : lines) parent[find_root(parent, l.from)] = find_root(parent, l.to);
  std::vector<std::vector<int>> components;
  std::vector<int> slot(static_cast<std::size_t>(buses), -1);
  for (int b = 0; b < buses; ++b) {
    const int r = find_root(parent, b);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(components.size());
      components.emplace_back();
    }
    components[slot[r]].push_back(b);
  }
  if (components.size() <= 1) return;
  std::ostringstream msg;
  msg << "grid is disconnected into " << components.size() << " components:";
  for (const auto& c : components) {
    msg << " {";
    for (std::size_t i = 0; i < c.size(); ++i) msg << (i ? "," : "") << c[i];
    msg << "}";
  }
  fail(ErrorKind::structural, msg.str());
}

}  // namespace

Eigen::MatrixXd build_shift_factors(int buses, const std::vector<Line>& lines, int slack) {
  require(buses >= 1, ErrorKind::structural, "grid needs at least one bus");
  require(slack >= 0 && slack < buses, ErrorKind::structural, "slack bus index out of range");
  for (const auto& l : lines) {
    require(l.from >= 0 && l.from < buses && l.to >= 0 && l.to < buses, ErrorKind::structural,
            "line '" + l.id + "' references a missing bus");
    require(l.from != l.to, ErrorKind::structural, "line '" + l.id + "' is a self loop");
    require(l.reactance > 0.0, ErrorKind::structural, "line '" + l.id + "' reactance must be positive");
  }
  check_connected(buses, lines);

  const int m = static_cast<int>(lines.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * m, buses);
  if (m == 0) return g;

  // Reduced susceptance matrix with the slack row/column removed.
  auto reduced = [slack](int bus) { return bus < slack ? bus : bus - 1; };
  const int nr = buses - 1;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nr, nr);
  for (const auto& l : lines) {
    const double y = 1.0 / l.reactance;
    if (l.from != slack) b(reduced(l.from), reduced(l.from)) += y;
    if (l.to != slack) b(reduced(l.to), reduced(l.to)) += y;
    if (l.from != slack && l.to != slack) {
      b(reduced(l.from), reduced(l.to)) -= y;
      b(reduced(l.to), reduced(l.from)) -= y;
    }
  }
  // θ = X·p with X = B⁻¹ on non-slack buses, zero at the slack.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(buses, buses);
  if (nr > 0) {
    const Eigen::MatrixXd inv = b.ldlt().solve(Eigen::MatrixXd::Identity(nr, nr));
    for (int i = 0; i < buses; ++i) {
      if (i == slack) continue;
      for (int j = 0; j < buses; ++j) {
        if (j == slack) continue;
        x(i, j) = inv(reduced(i), reduced(j));
      }
    }
  }
  for (int l = 0; l < m; ++l) {
    const auto& line = lines[static_cast<std::size_t>(l)];
    const Eigen::RowVectorXd row = (x.row(line.from) - x.row(line.to)) / line.reactance;
    g.row(l) = row;
    g.row(l + m) = -row;
  }
  return g;
}

Eigen::VectorXd line_flows(const Eigen::MatrixXd& shift_factors, const Eigen::VectorXd& injection,
                           double balance_tolerance) {
  require(injection.size() == shift_factors.cols(), ErrorKind::structural,
          "injection vector length does not match bus count");
  const double imbalance = injection.sum();
  if (std::abs(imbalance) > balance_tolerance) {
    std::ostringstream msg;
    msg << "injections are not balanced (sum = " << imbalance << ")";
    fail(ErrorKind::contract, msg.str());
  }
  return shift_factors * injection;
}

GridModel::GridModel(std::vector<std::string> bus_names, std::vector<Line> lines, int slack)
    : bus_names_(std::move(bus_names)), lines_(std::move(lines)), slack_(slack) {
  std::set<std::string> seen;
  for (const auto& name : bus_names_)
    require(seen.insert(name).second, ErrorKind::structural, "duplicate bus name '" + name + "'");
  seen.clear();
  for (const auto& l : lines_) {
    require(seen.insert(l.id).second, ErrorKind::structural, "duplicate line id '" + l.id + "'");
    require(l.capacity > 0.0 && l.capacity_reverse > 0.0, ErrorKind::structural,
            "line '" + l.id + "' capacities must be positive");
  }
  shift_factors_ = build_shift_factors(num_buses(), lines_, slack_);
  const int m = num_lines();
  capacities_.resize(2 * m);
  for (int l = 0; l < m; ++l) {
    capacities_[l] = lines_[static_cast<std::size_t>(l)].capacity;
    capacities_[l + m] = lines_[static_cast<std::size_t>(l)].capacity_reverse;
  }
}

int GridModel::bus_index(const std::string& name) const {
  for (int i = 0; i < num_buses(); ++i)
    if (bus_names_[static_cast<std::size_t>(i)] == name) return i;
  return -1;
}

int GridModel::line_index(const std::string& id) const {
  for (int i = 0; i < num_lines(); ++i)
    if (lines_[static_cast<std::size_t>(i)].id == id) return i;
  return -1;
}

std::string GridModel::directed_name(int row) const {
  const int m = num_lines();
  require(row >= 0 && row < 2 * m, ErrorKind::structural, "directed line row out of range");
  return lines_[static_cast<std::size_t>(row % m)].id + (row < m ? ":fwd" : ":rev");
}

int GridModel::directed_index(const std::string& name) const {
  const auto colon = name.rfind(':');
  if (colon == std::string::npos) return -1;
  const int l = line_index(name.substr(0, colon));
  if (l < 0) return -1;
  const std::string dir = name.substr(colon + 1);
  if (dir == "fwd") return l;
  if (dir == "rev") return l + num_lines();
  return -1;
}

}  // namespace hydrofsr::grid
