#pragma once

// Small hand-solvable cases shared by the unit and acceptance tests.

#include "dispatch.hpp"

#include <string>
#include <vector>

namespace testing {

using hydrofsr::CostFunction;
using hydrofsr::MpedCase;
using hydrofsr::Participant;
using hydrofsr::StorageUnit;

inline std::vector<double> series(int periods, double v) { return std::vector<double>(static_cast<std::size_t>(periods), v); }

inline hydrofsr::grid::GridModel single_bus() { return hydrofsr::grid::GridModel({"b1"}, {}, 0); }

inline hydrofsr::grid::GridModel two_bus(double capacity) {
  return hydrofsr::grid::GridModel({"b1", "b2"}, {{"l1", 0, 1, 0.1, capacity, capacity}}, 0);
}

// Equal reactances: an injection at b1 withdrawn at b3 splits 2/3 on l3
// and 1/3 on the path l1, l2.
inline hydrofsr::grid::GridModel triangle(double cap_l3) {
  return hydrofsr::grid::GridModel(
      {"b1", "b2", "b3"},
      {{"l1", 0, 1, 0.1, 500, 500}, {"l2", 1, 2, 0.1, 500, 500}, {"l3", 0, 2, 0.1, cap_l3, cap_l3}}, 0);
}

inline Participant offer(std::string id, int bus, int periods, double c2, double c1, double pmax = 500) {
  return Participant{std::move(id), bus, CostFunction::offer(periods, c2, c1, 0.0, pmax)};
}

inline Participant load(std::string id, int bus, std::vector<double> mw) {
  return Participant{std::move(id), bus, CostFunction::fixed_load(std::move(mw))};
}

inline MpedCase make_case(std::string name, hydrofsr::grid::GridModel grid, int periods) {
  MpedCase c;
  c.name = std::move(name);
  c.grid = std::move(grid);
  c.periods = periods;
  return c;
}

// Cheap 10 $/MWh unit at b1, 12 $/MWh unit and load (80, 20) at b2, line
// limit 30. Period 1 congests: λ = (10, 12), μ_fwd = 2, MS = 60.
inline MpedCase two_bus_congested() {
  auto c = make_case("two_bus_congested", two_bus(30), 2);
  c.participants = {offer("g1", 0, 2, 0, 10), offer("g2", 1, 2, 0, 12), load("d2", 1, {80, 20})};
  return c;
}

inline MpedCase copper_plate() {
  auto c = make_case("copper_plate", two_bus(1000), 2);
  c.participants = {offer("g1", 0, 2, 0.05, 10), offer("g2", 1, 2, 0.08, 11), load("d1", 0, {40, 60}),
                    load("d2", 1, {30, 50})};
  return c;
}

inline MpedCase three_bus_triangle(double cap_l3 = 40) {
  auto c = make_case("three_bus_triangle", triangle(cap_l3), 1);
  c.participants = {offer("g1", 0, 1, 0.02, 10), offer("g2", 1, 1, 0.05, 15), load("d3", 2, {100})};
  return c;
}

inline hydrofsr::hydro::PlantParameters linear_plant(double efficiency, double capacity) {
  hydrofsr::hydro::PhysicalPlant p;
  p.efficiency = efficiency;
  p.forebay_height = 100;
  p.tailrace_intercept = 10;
  p.penstock_loss = 5;
  p.tailrace_slope = 0;
  p.capacity = capacity;
  return hydrofsr::hydro::PlantParameters::from_physical(p);
}

inline hydrofsr::hydro::PlantParameters curved_plant(double efficiency, double slope, double capacity) {
  auto p = linear_plant(efficiency, capacity).physical;
  p.tailrace_slope = slope;
  return hydrofsr::hydro::PlantParameters::from_physical(p);
}

inline StorageUnit hydro_unit(std::string id, int bus, int periods, hydrofsr::hydro::PlantParameters plant,
                              double initial, double lower, double upper, double inflow) {
  StorageUnit s;
  s.id = std::move(id);
  s.kind = hydrofsr::reservoir::StorageKind::hydro;
  s.bus = bus;
  s.reservoir = {initial, series(periods, lower), series(periods, upper), series(periods, inflow)};
  s.plant = plant;
  return s;
}

inline StorageUnit battery(std::string id, int bus, int periods, double initial, double lower, double upper,
                           double charge_max, double discharge_max) {
  StorageUnit s;
  s.id = std::move(id);
  s.kind = hydrofsr::reservoir::StorageKind::ess;
  s.bus = bus;
  s.reservoir = {initial, series(periods, lower), series(periods, upper), series(periods, 0.0)};
  s.charge_max = charge_max;
  s.discharge_max = discharge_max;
  return s;
}

// Thermal 0.05P² + 10P against load (50, 100) and a 40 MW linear hydro
// plant with ample water. Flat 20/20 MWh costs 1465 $, moving all 40 MWh
// to the peak costs 1405 $.
inline MpedCase hydro_peak_offpeak() {
  auto c = make_case("hydro_peak_offpeak", single_bus(), 2);
  c.participants = {offer("thermal", 0, 2, 0.05, 10), load("d1", 0, {50, 100})};
  c.storage = {hydro_unit("h1", 0, 2, linear_plant(1.0, 40), 1000, 0, 2000, 0)};
  return c;
}

// Thermal 0.1P² + 10P, load (10, 50), battery z0 = 5 in [0, 20] with
// charge 10 MW and discharge 20 MW. Optimum charges 10 then discharges 15.
inline MpedCase ess_arbitrage() {
  auto c = make_case("ess_arbitrage", single_bus(), 2);
  c.participants = {offer("thermal", 0, 2, 0.1, 10), load("d1", 0, {10, 50})};
  c.storage = {battery("ess1", 0, 2, 5, 0, 20, 10, 20)};
  return c;
}

// Reservoir close to full with heavy inflow: the plant must release water
// off-peak, where power is only worth the 5 $/MWh bid, though the water
// would be worth more at the peak. ẑ binds in period 1.
inline MpedCase hydro_spill_pressure() {
  auto c = make_case("hydro_spill_pressure", single_bus(), 2);
  c.participants = {offer("thermal", 0, 2, 0.05, 20), load("d1", 0, {10, 100}),
                    Participant{"sink", 0, CostFunction::bid(2, 0.02, 5, 100)}};
  c.storage = {hydro_unit("h1", 0, 2, curved_plant(0.01, 0.002, 80), 10, 0, 12, 20)};
  return c;
}

}  // namespace testing
