#include "reservoir.hpp"

#include "error.hpp"

#include <algorithm>
#include <sstream>

namespace hydrofsr::reservoir {

namespace {

std::string node_name(const CascadeTopology& topo, int i) {
  if (static_cast<std::size_t>(i) < topo.names.size() && !topo.names[i].empty()) return topo.names[i];
  return std::to_string(i + 1);
}

}  // namespace

const char* to_string(StorageKind kind) noexcept { return kind == StorageKind::hydro ? "hydro" : "ess"; }

void ReservoirSpec::validate(StorageKind kind, const std::string& name) const {
  const std::size_t t = lower.size();
  require(t >= 1, ErrorKind::validation, name + ": storage bounds must cover at least one period");
  require(upper.size() == t && inflow.size() == t, ErrorKind::validation,
          name + ": lower, upper and inflow series must have equal length");
  for (std::size_t k = 0; k < t; ++k) {
    require(lower[k] <= upper[k], ErrorKind::validation,
            name + ": lower bound exceeds upper bound in period " + std::to_string(k + 1));
    if (kind == StorageKind::hydro)
      require(inflow[k] >= 0.0, ErrorKind::validation,
              name + ": inflow must be nonnegative in period " + std::to_string(k + 1));
    else
      require(inflow[k] == 0.0, ErrorKind::validation, name + ": batteries take no inflow");
  }
  require(lower[0] <= initial && initial <= upper[0], ErrorKind::validation,
          name + ": initial level outside the first-period bounds");
}

CumulativeMatrix build_cumulative_matrix(int horizon) {
  require(horizon >= 1, ErrorKind::domain, "horizon must be at least one period");
  CumulativeMatrix c;
  c.horizon = horizon;
  c.matrix = Eigen::MatrixXd::Zero(horizon, horizon);
  c.matrix.triangularView<Eigen::Lower>().setConstant(-1.0);
  return c;
}

std::vector<int> validate_cascade(const CascadeTopology& topo) {
  const int n = static_cast<int>(topo.kinds.size());
  require(static_cast<int>(topo.upstream.size()) == n, ErrorKind::structural,
          "upstream sets must be given for every storage node");
  std::vector<std::vector<int>> downstream(static_cast<std::size_t>(n));
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    for (const auto& link : topo.upstream[i]) {
      const int j = link.node;
      require(j >= 0 && j < n, ErrorKind::validation,
              "node " + node_name(topo, i) + " lists a missing upstream node");
      require(link.lag >= 0, ErrorKind::validation, "routing lag must be nonnegative");
      require(topo.kinds[i] == StorageKind::hydro && topo.kinds[j] == StorageKind::hydro,
              ErrorKind::validation,
              "batteries cannot be part of a cascade (" + node_name(topo, j) + " -> " + node_name(topo, i) + ")");
      downstream[j].push_back(i);
      ++indegree[i];
    }
  }

  // Kahn's algorithm, smallest ready index first.
  std::vector<int> order;
  std::vector<int> deg = indegree;
  std::vector<int> ready;
  for (int i = 0; i < n; ++i)
    if (deg[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    const auto it = std::min_element(ready.begin(), ready.end());
    const int v = *it;
    ready.erase(it);
    order.push_back(v);
    for (int w : downstream[v])
      if (--deg[w] == 0) ready.push_back(w);
  }
  if (static_cast<int>(order.size()) == n) return order;

  // Walk upstream links inside the unresolved subgraph until a node repeats.
  int start = 0;
  while (deg[start] == 0) ++start;
  std::vector<int> path;
  std::vector<int> pos(static_cast<std::size_t>(n), -1);
  int v = start;
  while (pos[v] < 0) {
    pos[v] = static_cast<int>(path.size());
    path.push_back(v);
    for (const auto& link : topo.upstream[v])
      if (deg[link.node] > 0) {
        v = link.node;
        break;
      }
  }
  std::vector<int> cycle(path.begin() + pos[v], path.end());
  std::reverse(cycle.begin(), cycle.end());  // upstream → downstream
  const auto lowest = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), lowest, cycle.end());
  std::ostringstream msg;
  msg << "cascade contains a cycle: (";
  for (std::size_t k = 0; k < cycle.size(); ++k) msg << (k ? "," : "") << node_name(topo, cycle[k]);
  msg << ")";
  fail(ErrorKind::validation, msg.str());
}

Conversion Conversion::of_plant(const hydro::PlantParameters& pp) {
  return Conversion{pp.coefficients.a, pp.coefficients.b, 0.0, pp.max_power};
}

Conversion Conversion::identity(double charge_max, double discharge_max, double period_hours) {
  return Conversion{0.0, period_hours, -charge_max, discharge_max};
}

std::vector<double> conversion_series(const Conversion& conv, std::span<const double> power) {
  std::vector<double> q;
  q.reserve(power.size());
  const double slack = 1e-9 * std::max(1.0, std::max(std::abs(conv.min_power), std::abs(conv.max_power)));
  for (std::size_t t = 0; t < power.size(); ++t) {
    const double u = power[t];
    if (u < conv.min_power - slack || u > conv.max_power + slack) {
      std::ostringstream msg;
      msg << "power " << u << " in period " << t + 1 << " outside [" << conv.min_power << ", "
          << conv.max_power << "]";
      fail(ErrorKind::domain, msg.str());
    }
    q.push_back(conv(u));
  }
  return q;
}

std::vector<double> storage_trajectory(const ReservoirSpec& spec, const CascadeTopology& topo, int node,
                                       const std::vector<std::vector<double>>& releases) {
  const int n = static_cast<int>(topo.kinds.size());
  require(node >= 0 && node < n, ErrorKind::structural, "storage node out of range");
  require(static_cast<int>(releases.size()) == n, ErrorKind::structural,
          "one release schedule per storage node is required");
  const std::size_t horizon = spec.inflow.size();
  auto check = [&](int i) {
    const auto& r = releases[i];
    require(r.size() == horizon, ErrorKind::structural,
            "release schedule of node " + node_name(topo, i) + " has the wrong length");
    if (topo.kinds[i] == StorageKind::hydro)
      for (double q : r)
        require(q >= 0.0, ErrorKind::domain, "negative hydro discharge at node " + node_name(topo, i));
  };
  check(node);
  for (const auto& link : topo.upstream[node]) check(link.node);

  std::vector<double> z(horizon);
  double level = spec.initial;
  for (std::size_t t = 0; t < horizon; ++t) {
    level += spec.inflow[t] - releases[node][t];
    for (const auto& link : topo.upstream[node]) {
      const auto lag = static_cast<std::size_t>(link.lag);
      if (t >= lag) level += releases[link.node][t - lag];
    }
    z[t] = level;
  }
  return z;
}

}  // namespace hydrofsr::reservoir
