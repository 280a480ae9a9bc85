#pragma once

// Randomized dispatch cases and rights portfolios for the property suites.
// Every bus carries a generator large enough to serve the whole load, so
// cases stay feasible whatever the line limits.

#include "dispatch.hpp"
#include "error.hpp"
#include "fixtures.hpp"
#include "rights.hpp"

#include <random>

namespace testing {

inline MpedCase random_case(std::mt19937& rng, int index) {
  std::uniform_real_distribution<double> u01(0, 1);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  const int n = 2 + static_cast<int>(rng() % 3);
  const int horizon = 2 + static_cast<int>(rng() % 3);

  std::vector<std::string> buses;
  for (int i = 0; i < n; ++i) buses.push_back("b" + std::to_string(i + 1));
  std::vector<hydrofsr::grid::Line> lines;
  for (int i = 1; i < n; ++i) {
    const int j = static_cast<int>(rng() % i);
    lines.push_back({"l" + std::to_string(i), j, i, uni(0.05, 0.5), uni(5, 40), uni(5, 40)});
  }
  if (n >= 3 && u01(rng) < 0.5) lines.push_back({"lx", 0, n - 1, uni(0.05, 0.5), uni(5, 40), uni(5, 40)});

  auto c = make_case("random_" + std::to_string(index), hydrofsr::grid::GridModel(buses, lines, 0), horizon);
  double peak = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> l;
    for (int t = 0; t < horizon; ++t) l.push_back(uni(0, 40));
    for (double v : l) peak += v;
    c.participants.push_back(load("d" + std::to_string(i + 1), i, l));
  }
  for (int i = 0; i < n; ++i)
    c.participants.push_back(offer("g" + std::to_string(i + 1), i, horizon, uni(0.001, 0.1), uni(5, 40), peak + 50));
  if (u01(rng) < 0.3)
    c.participants.push_back(Participant{"flex", static_cast<int>(rng() % n),
                                         CostFunction::bid(horizon, uni(0.01, 0.1), uni(20, 60), uni(5, 20))});

  const int ns = static_cast<int>(rng() % 3);
  for (int s = 0; s < ns; ++s) {
    const int bus = static_cast<int>(rng() % n);
    if (u01(rng) < 0.5) {
      const double cap = uni(10, 40);
      c.storage.push_back(battery("e" + std::to_string(s + 1), bus, horizon, uni(0, 10), 0, cap, uni(2, 15), uni(2, 15)));
    } else {
      const bool curved = u01(rng) < 0.5;
      const auto plant = curved ? curved_plant(uni(0.05, 0.3), uni(0.01, 0.2), uni(10, 30)) : linear_plant(uni(0.05, 0.3), uni(10, 30));
      const double z0 = uni(5, 20);
      const double inflow = uni(0, 4);
      // Ceiling leaves room for the idle schedule, sometimes only just.
      const double ceiling = z0 + inflow * horizon + (u01(rng) < 0.4 ? uni(0, 1) : uni(5, 50));
      auto unit = hydro_unit("h" + std::to_string(s + 1), bus, horizon, plant, z0, uni(0, 4), ceiling, inflow);
      c.storage.push_back(unit);
    }
  }
  // Chain two hydro units when both exist.
  if (c.storage.size() == 2 && c.storage[0].kind == hydrofsr::reservoir::StorageKind::hydro &&
      c.storage[1].kind == hydrofsr::reservoir::StorageKind::hydro && u01(rng) < 0.5) {
    c.storage[1].upstream = {{0, static_cast<int>(rng() % 2)}};
    for (auto& v : c.storage[1].reservoir.upper) v += 200;
  }
  return c;
}

// Draws a random portfolio and halves it until the feasibility test
// accepts it (shrinking toward zero preserves feasibility).
inline hydrofsr::Portfolio random_feasible_portfolio(std::mt19937& rng, const MpedCase& c,
                                                     hydrofsr::SftResult* verdict = nullptr) {
  using hydrofsr::Right;
  std::uniform_real_distribution<double> u01(0, 1);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  hydrofsr::Portfolio p;
  const int count = 1 + static_cast<int>(rng() % 5);
  for (int k = 0; k < count; ++k) {
    std::vector<double> prof;
    const int kind = static_cast<int>(rng() % 4);
    for (int t = 0; t < c.periods; ++t) prof.push_back(kind == 1 || kind == 3 ? uni(0, 20) : uni(-20, 20));
    const std::string holder = "h" + std::to_string(k);
    const int a = static_cast<int>(rng() % c.num_buses());
    const int b = static_cast<int>(rng() % c.num_buses());
    switch (kind) {
      case 0: p.rights.push_back(Right::ftr(holder, a, b, prof)); break;
      case 1: p.rights.push_back(Right::fgr(holder, static_cast<int>(rng() % c.grid.num_directed()), prof)); break;
      case 2:
        if (c.num_storage() > 0) p.rights.push_back(Right::fsr(holder, static_cast<int>(rng() % c.num_storage()), b, prof));
        break;
      default:
        if (c.num_storage() > 0) p.rights.push_back(Right::ecr(holder, static_cast<int>(rng() % c.num_storage()), prof));
        break;
    }
  }
  for (int attempt = 0; attempt < 40; ++attempt) {
    auto v = hydrofsr::simultaneous_feasibility_test(p, c);
    if (v.feasible) {
      if (verdict) *verdict = v;
      return p;
    }
    for (auto& r : p.rights)
      for (auto& x : r.profile) x *= 0.5;
  }
  p.rights.clear();
  if (verdict) *verdict = hydrofsr::simultaneous_feasibility_test(p, c);
  return p;
}

}  // namespace testing
