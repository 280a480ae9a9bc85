#include "casefile.hpp"

#include "error.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

namespace hydrofsr::casefile {

using json = nlohmann::ordered_json;

namespace {

struct Units {
  const char* key;
  const char* expected;
};
constexpr Units kUnits[] = {{"volume", "hm3"}, {"power", "MW"}, {"time", "h"}, {"price", "$/MWh"}};

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void error(ErrorKind kind, const std::string& field, const std::string& message) const {
    fail(kind, origin_ + ": " + field + ": " + message);
  }

  // Re-raises a library error with the location prepended.
  template <typename F>
  auto guard(const std::string& field, F&& f) const {
    try {
      return f();
    } catch (const Error& e) {
      error(e.kind(), field, e.what());
    }
  }

  const json& member(const json& obj, const std::string& key, const std::string& field) const {
    if (!obj.is_object()) error(ErrorKind::schema, field, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) error(ErrorKind::schema, join(field, key), "required field is missing");
    return *it;
  }

  const json* optional(const json& obj, const std::string& key) const {
    const auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  double number(const json& v, const std::string& field) const {
    if (!v.is_number()) error(ErrorKind::schema, field, "expected a number");
    return v.get<double>();
  }

  double number(const json& obj, const std::string& key, const std::string& field) const {
    return number(member(obj, key, field), join(field, key));
  }

  double number_or(const json& obj, const std::string& key, const std::string& field, double fallback) const {
    const json* v = optional(obj, key);
    return v ? number(*v, join(field, key)) : fallback;
  }

  int integer(const json& v, const std::string& field) const {
    if (!v.is_number_integer()) error(ErrorKind::schema, field, "expected an integer");
    return v.get<int>();
  }

  std::string text(const json& obj, const std::string& key, const std::string& field) const {
    const json& v = member(obj, key, field);
    if (!v.is_string()) error(ErrorKind::schema, join(field, key), "expected a string");
    return v.get<std::string>();
  }

  const json& array(const json& obj, const std::string& key, const std::string& field) const {
    const json& v = member(obj, key, field);
    if (!v.is_array()) error(ErrorKind::schema, join(field, key), "expected an array");
    return v;
  }

  // A scalar is broadcast over the horizon; an array must have T entries.
  std::vector<double> series(const json& v, const std::string& field, int periods) const {
    if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(periods), v.get<double>());
    if (!v.is_array()) error(ErrorKind::schema, field, "expected a number or an array of numbers");
    if (static_cast<int>(v.size()) != periods)
      error(ErrorKind::schema, field,
            "expected " + std::to_string(periods) + " entries, found " + std::to_string(v.size()));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<double> series(const json& obj, const std::string& key, const std::string& field, int periods) const {
    return series(member(obj, key, field), join(field, key), periods);
  }

  std::vector<double> series_or(const json& obj, const std::string& key, const std::string& field, int periods,
                                double fallback) const {
    const json* v = optional(obj, key);
    return v ? series(*v, join(field, key), periods) : std::vector<double>(static_cast<std::size_t>(periods), fallback);
  }

  static std::string join(const std::string& field, const std::string& key) {
    return field.empty() ? key : field + "." + key;
  }
  static std::string item(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

 private:
  std::string origin_;
};

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, origin + ": " + e.what());
  }
}

void check_header(const Reader& r, const json& root) {
  if (!root.is_object()) r.error(ErrorKind::schema, "(root)", "expected a JSON object");
  const json& version = r.member(root, "schema_version", "");
  const int v = r.integer(version, "schema_version");
  if (v != kSchemaVersion)
    r.error(ErrorKind::schema, "schema_version",
            "unsupported version " + std::to_string(v) + " (supported: " + std::to_string(kSchemaVersion) + ")");
}

hydro::ReservoirGeometry read_geometry(const Reader& r, const json& g, const std::string& field) {
  const std::string shape = r.text(g, "shape", field);
  const double vmin = r.number(g, "min_volume", field);
  const double vmax = r.number(g, "max_volume", field);
  return r.guard(field, [&] {
    switch (hydro::shape_from_string(shape)) {
      case hydro::ReservoirShape::planar: return hydro::ReservoirGeometry::planar(r.number(g, "height", field), vmin, vmax);
      case hydro::ReservoirShape::cuboidal:
        return hydro::ReservoirGeometry::cuboidal(r.number(g, "floor_height", field), r.number(g, "base_area", field),
                                                  vmin, vmax);
      case hydro::ReservoirShape::trapezoidal: break;
    }
    std::vector<std::pair<double, double>> points;
    const json& wp = r.array(g, "waypoints", field);
    for (std::size_t i = 0; i < wp.size(); ++i) {
      const std::string f = Reader::item(Reader::join(field, "waypoints"), i);
      if (!wp[i].is_array() || wp[i].size() != 2) r.error(ErrorKind::schema, f, "expected [volume, height]");
      points.emplace_back(r.number(wp[i][0], f), r.number(wp[i][1], f));
    }
    return hydro::ReservoirGeometry::fit_trapezoidal(std::move(points), vmin, vmax);
  });
}

Participant read_participant(const Reader& r, const json& p, const std::string& field, const grid::GridModel& grid,
                             int periods) {
  Participant out;
  out.id = r.text(p, "id", field);
  const std::string bus = r.text(p, "bus", field);
  out.bus = grid.bus_index(bus);
  if (out.bus < 0) r.error(ErrorKind::reference, Reader::join(field, "bus"), "unknown bus '" + bus + "'");
  const std::string kind = r.text(p, "kind", field);
  if (kind == "fixed_load") {
    out.cost = CostFunction::fixed_load(r.series(p, "load", field, periods));
    return out;
  }
  if (kind != "offer" && kind != "bid")
    r.error(ErrorKind::schema, Reader::join(field, "kind"), "expected offer, bid or fixed_load, got '" + kind + "'");
  out.cost.kind = kind == "offer" ? BidKind::offer : BidKind::bid;
  out.cost.quadratic = r.series_or(p, "quadratic", field, periods, 0.0);
  out.cost.linear = r.series(p, "linear", field, periods);
  if (out.cost.kind == BidKind::offer) {
    out.cost.min_power = r.series_or(p, "pmin", field, periods, 0.0);
    out.cost.max_power = r.series(p, "pmax", field, periods);
  } else {
    out.cost.min_power = r.series(p, "pmin", field, periods);
    out.cost.max_power = r.series_or(p, "pmax", field, periods, 0.0);
  }
  return out;
}

StorageUnit read_storage(const Reader& r, const json& s, const std::string& field, const grid::GridModel& grid,
                         int periods) {
  StorageUnit out;
  out.id = r.text(s, "id", field);
  const std::string bus = r.text(s, "bus", field);
  out.bus = grid.bus_index(bus);
  if (out.bus < 0) r.error(ErrorKind::reference, Reader::join(field, "bus"), "unknown bus '" + bus + "'");
  const std::string kind = r.text(s, "kind", field);
  if (kind != "ess" && kind != "hydro")
    r.error(ErrorKind::schema, Reader::join(field, "kind"), "expected ess or hydro, got '" + kind + "'");
  out.kind = kind == "ess" ? reservoir::StorageKind::ess : reservoir::StorageKind::hydro;
  out.reservoir.initial = r.number(s, "initial", field);
  out.reservoir.lower = r.series(s, "min", field, periods);
  out.reservoir.upper = r.series(s, "max", field, periods);
  out.reservoir.inflow = r.series_or(s, "inflow", field, periods, 0.0);
  if (out.kind == reservoir::StorageKind::ess) {
    out.charge_max = r.number(s, "charge_max", field);
    out.discharge_max = r.number(s, "discharge_max", field);
    return out;
  }
  if (const json* g = r.optional(s, "geometry")) out.geometry = read_geometry(r, *g, Reader::join(field, "geometry"));
  const std::string pf = Reader::join(field, "plant");
  const json& p = r.member(s, "plant", field);
  hydro::PhysicalPlant phys;
  phys.efficiency = r.number(p, "kappa", pf);
  phys.tailrace_intercept = r.number(p, "tailrace_intercept", pf);
  phys.tailrace_slope = r.number_or(p, "tailrace_slope", pf, 0.0);
  phys.penstock_loss = r.number_or(p, "penstock_loss", pf, 0.0);
  phys.capacity = r.number(p, "capacity", pf);
  if (const json* h = r.optional(p, "forebay_height")) {
    phys.forebay_height = r.number(*h, Reader::join(pf, "forebay_height"));
  } else {
    // Short-horizon convention: the head is frozen at the initial level.
    if (!out.geometry) r.error(ErrorKind::schema, Reader::join(pf, "forebay_height"), "required without a geometry");
    phys.forebay_height = r.guard(Reader::join(field, "geometry"),
                                  [&] { return hydro::forebay_height(*out.geometry, out.reservoir.initial); });
  }
  out.plant = r.guard(pf, [&] { return hydro::PlantParameters::from_physical(phys); });
  return out;
}

Right read_right(const Reader& r, const json& j, const std::string& field, const MpedCase& c) {
  auto bus = [&](const std::string& key) {
    const std::string name = r.text(j, key, field);
    const int b = c.grid.bus_index(name);
    if (b < 0) r.error(ErrorKind::reference, Reader::join(field, key), "unknown bus '" + name + "'");
    return b;
  };
  auto storage = [&] {
    const std::string name = r.text(j, "storage", field);
    const int s = c.storage_index(name);
    if (s < 0) r.error(ErrorKind::reference, Reader::join(field, "storage"), "unknown storage '" + name + "'");
    return s;
  };
  const std::string kind = r.text(j, "kind", field);
  const RightKind k = r.guard(Reader::join(field, "kind"), [&] { return right_kind_from_string(kind); });
  const std::string holder = r.text(j, "holder", field);
  const auto profile = r.series(j, "profile", field, c.periods);
  Right out;
  switch (k) {
    case RightKind::ftr: out = Right::ftr(holder, bus("from"), bus("to"), profile); break;
    case RightKind::fgr: {
      const std::string name = r.text(j, "line", field);
      const int l = c.grid.directed_index(name);
      if (l < 0)
        r.error(ErrorKind::reference, Reader::join(field, "line"), "unknown directed line '" + name + "' (use id:fwd or id:rev)");
      out = Right::fgr(holder, l, profile);
      break;
    }
    case RightKind::fsr: out = Right::fsr(holder, storage(), bus("bus"), profile); break;
    case RightKind::ecr: out = Right::ecr(holder, storage(), profile); break;
  }
  r.guard(field, [&] {
    validate_right(out, c);
    return 0;
  });
  return out;
}

Portfolio read_portfolio(const Reader& r, const json& arr, const std::string& field, const MpedCase& c) {
  if (!arr.is_array()) r.error(ErrorKind::schema, field, "expected an array");
  Portfolio p;
  for (std::size_t i = 0; i < arr.size(); ++i) p.rights.push_back(read_right(r, arr[i], Reader::item(field, i), c));
  return p;
}

json series_json(const std::vector<double>& v) { return json(v); }

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double default_tolerance() {
  const char* env = std::getenv("HYDROFSR_TOLERANCE");
  if (env == nullptr || *env == '\0') return 1e-8;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  require(end != env && *end == '\0' && v > 0.0, ErrorKind::validation,
          std::string("HYDROFSR_TOLERANCE must be a positive number, got '") + env + "'");
  return v;
}

CaseFile parse_case(const std::string& text, const std::string& origin) {
  const json root = parse_json(text, origin);
  const Reader r(origin);
  check_header(r, root);

  const json& units = r.member(root, "units", "");
  for (const auto& u : kUnits) {
    const std::string got = r.text(units, u.key, "units");
    if (got != u.expected)
      r.error(ErrorKind::units, std::string("units.") + u.key, "expected '" + std::string(u.expected) + "', got '" + got + "'");
  }

  CaseFile cf;
  MpedCase& c = cf.mped;
  c.name = r.text(root, "name", "");
  const json& horizon = r.member(root, "horizon", "");
  c.periods = r.integer(r.member(horizon, "periods", "horizon"), "horizon.periods");
  if (c.periods < 1) r.error(ErrorKind::validation, "horizon.periods", "must be at least 1");
  c.period_hours = r.number_or(horizon, "period_hours", "horizon", 1.0);

  c.solver.tolerance = default_tolerance();
  if (const json* s = r.optional(root, "solver")) {
    c.solver.tolerance = r.number_or(*s, "tolerance", "solver", c.solver.tolerance);
    if (const json* it = r.optional(*s, "max_iterations")) c.solver.max_iterations = r.integer(*it, "solver.max_iterations");
    c.solver.adequacy_tolerance = r.number_or(*s, "adequacy_tolerance", "solver", c.solver.adequacy_tolerance);
    c.solver.feasibility_tolerance = r.number_or(*s, "feasibility_tolerance", "solver", c.solver.feasibility_tolerance);
  }

  const json& g = r.member(root, "grid", "");
  const json& buses = r.array(g, "buses", "grid");
  std::vector<std::string> bus_names;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!buses[i].is_string()) r.error(ErrorKind::schema, Reader::item("grid.buses", i), "expected a bus name");
    bus_names.push_back(buses[i].get<std::string>());
  }
  if (bus_names.empty()) r.error(ErrorKind::schema, "grid.buses", "at least one bus is required");
  auto bus_of = [&](const std::string& name, const std::string& field) {
    for (std::size_t i = 0; i < bus_names.size(); ++i)
      if (bus_names[i] == name) return static_cast<int>(i);
    r.error(ErrorKind::reference, field, "unknown bus '" + name + "'");
  };
  int slack = 0;
  if (r.optional(g, "slack")) slack = bus_of(r.text(g, "slack", "grid"), "grid.slack");
  std::vector<grid::Line> lines;
  if (const json* ls = r.optional(g, "lines")) {
    if (!ls->is_array()) r.error(ErrorKind::schema, "grid.lines", "expected an array");
    for (std::size_t i = 0; i < ls->size(); ++i) {
      const std::string f = Reader::item("grid.lines", i);
      const json& l = (*ls)[i];
      grid::Line line;
      line.id = r.text(l, "id", f);
      line.from = bus_of(r.text(l, "from", f), f + ".from");
      line.to = bus_of(r.text(l, "to", f), f + ".to");
      line.reactance = r.number(l, "reactance", f);
      line.capacity = r.number(l, "capacity", f);
      line.capacity_reverse = r.number_or(l, "capacity_reverse", f, line.capacity);
      lines.push_back(line);
    }
  }
  c.grid = r.guard("grid", [&] { return grid::GridModel(bus_names, lines, slack); });

  if (const json* ps = r.optional(root, "participants")) {
    if (!ps->is_array()) r.error(ErrorKind::schema, "participants", "expected an array");
    for (std::size_t i = 0; i < ps->size(); ++i)
      c.participants.push_back(read_participant(r, (*ps)[i], Reader::item("participants", i), c.grid, c.periods));
  }
  if (const json* ss = r.optional(root, "storage")) {
    if (!ss->is_array()) r.error(ErrorKind::schema, "storage", "expected an array");
    for (std::size_t i = 0; i < ss->size(); ++i)
      c.storage.push_back(read_storage(r, (*ss)[i], Reader::item("storage", i), c.grid, c.periods));
    // Upstream links name other storage units, so resolve them last.
    for (std::size_t i = 0; i < ss->size(); ++i) {
      const json* ups = r.optional((*ss)[i], "upstream");
      if (!ups) continue;
      const std::string f = Reader::item("storage", i) + ".upstream";
      if (!ups->is_array()) r.error(ErrorKind::schema, f, "expected an array");
      for (std::size_t k = 0; k < ups->size(); ++k) {
        const std::string fk = Reader::item(f, k);
        const std::string node = r.text((*ups)[k], "node", fk);
        const int idx = c.storage_index(node);
        if (idx < 0) r.error(ErrorKind::reference, fk + ".node", "unknown storage '" + node + "'");
        int lag = 0;
        if (const json* l = r.optional((*ups)[k], "lag")) lag = r.integer(*l, fk + ".lag");
        c.storage[i].upstream.push_back({idx, lag});
      }
    }
  }
  r.guard("(case)", [&] {
    c.validate();
    return 0;
  });

  if (const json* pf = r.optional(root, "portfolio")) cf.portfolio = read_portfolio(r, *pf, "portfolio", c);
  return cf;
}

CaseFile load_case(const std::filesystem::path& path) { return parse_case(read_text(path), path.string()); }

Portfolio parse_portfolio(const std::string& text, const std::string& origin, const MpedCase& c) {
  const json root = parse_json(text, origin);
  const Reader r(origin);
  check_header(r, root);
  return read_portfolio(r, r.member(root, "portfolio", ""), "portfolio", c);
}

Portfolio load_portfolio(const std::filesystem::path& path, const MpedCase& c) {
  return parse_portfolio(read_text(path), path.string(), c);
}

std::string emit_case(const CaseFile& cf) {
  const MpedCase& c = cf.mped;
  const auto& names = c.grid.bus_names();
  json root;
  root["schema_version"] = kSchemaVersion;
  root["name"] = c.name;
  json units;
  for (const auto& u : kUnits) units[u.key] = u.expected;
  root["units"] = units;
  root["horizon"] = {{"periods", c.periods}, {"period_hours", c.period_hours}};
  root["solver"] = {{"tolerance", c.solver.tolerance},
                    {"max_iterations", c.solver.max_iterations},
                    {"adequacy_tolerance", c.solver.adequacy_tolerance},
                    {"feasibility_tolerance", c.solver.feasibility_tolerance}};

  json lines = json::array();
  for (const auto& l : c.grid.lines())
    lines.push_back({{"id", l.id},
                     {"from", names[static_cast<std::size_t>(l.from)]},
                     {"to", names[static_cast<std::size_t>(l.to)]},
                     {"reactance", l.reactance},
                     {"capacity", l.capacity},
                     {"capacity_reverse", l.capacity_reverse}});
  root["grid"] = {{"buses", names}, {"slack", names[static_cast<std::size_t>(c.grid.slack())]}, {"lines", lines}};

  json parts = json::array();
  for (const auto& p : c.participants) {
    json j = {{"id", p.id}, {"bus", names[static_cast<std::size_t>(p.bus)]}, {"kind", to_string(p.cost.kind)}};
    if (p.cost.kind == BidKind::fixed_load) {
      std::vector<double> load;
      for (double v : p.cost.max_power) load.push_back(-v);
      j["load"] = series_json(load);
    } else {
      j["quadratic"] = series_json(p.cost.quadratic);
      j["linear"] = series_json(p.cost.linear);
      j["pmin"] = series_json(p.cost.min_power);
      j["pmax"] = series_json(p.cost.max_power);
    }
    parts.push_back(j);
  }
  root["participants"] = parts;

  json storage = json::array();
  for (const auto& s : c.storage) {
    json j = {{"id", s.id},
              {"kind", reservoir::to_string(s.kind)},
              {"bus", names[static_cast<std::size_t>(s.bus)]},
              {"initial", s.reservoir.initial},
              {"min", series_json(s.reservoir.lower)},
              {"max", series_json(s.reservoir.upper)},
              {"inflow", series_json(s.reservoir.inflow)}};
    if (s.kind == reservoir::StorageKind::ess) {
      j["charge_max"] = s.charge_max;
      j["discharge_max"] = s.discharge_max;
    } else {
      const auto& p = s.plant->physical;
      j["plant"] = {{"kappa", p.efficiency},
                    {"forebay_height", p.forebay_height},
                    {"tailrace_intercept", p.tailrace_intercept},
                    {"tailrace_slope", p.tailrace_slope},
                    {"penstock_loss", p.penstock_loss},
                    {"capacity", p.capacity}};
      if (s.geometry) {
        const auto& g = *s.geometry;
        json gj = {{"shape", hydro::to_string(g.shape())}};
        switch (g.shape()) {
          case hydro::ReservoirShape::planar: gj["height"] = g.intercept(); break;
          case hydro::ReservoirShape::cuboidal:
            gj["floor_height"] = g.intercept();
            gj["base_area"] = g.base_area();
            break;
          case hydro::ReservoirShape::trapezoidal: {
            json wp = json::array();
            for (const auto& [v, h] : g.waypoints()) wp.push_back({v, h});
            gj["waypoints"] = wp;
            break;
          }
        }
        gj["min_volume"] = g.min_volume();
        gj["max_volume"] = g.max_volume();
        j["geometry"] = gj;
      }
      json ups = json::array();
      for (const auto& u : s.upstream)
        ups.push_back({{"node", c.storage[static_cast<std::size_t>(u.node)].id}, {"lag", u.lag}});
      j["upstream"] = ups;
    }
    storage.push_back(j);
  }
  root["storage"] = storage;

  json portfolio = json::array();
  for (const auto& r : cf.portfolio.rights) {
    json j = {{"kind", to_string(r.kind)}, {"holder", r.holder}};
    switch (r.kind) {
      case RightKind::ftr:
        j["from"] = names[static_cast<std::size_t>(r.from_bus)];
        j["to"] = names[static_cast<std::size_t>(r.to_bus)];
        break;
      case RightKind::fgr: j["line"] = c.grid.directed_name(r.line); break;
      case RightKind::fsr:
        j["storage"] = c.storage[static_cast<std::size_t>(r.storage)].id;
        j["bus"] = names[static_cast<std::size_t>(r.to_bus)];
        break;
      case RightKind::ecr: j["storage"] = c.storage[static_cast<std::size_t>(r.storage)].id; break;
    }
    j["profile"] = series_json(r.profile);
    portfolio.push_back(j);
  }
  root["portfolio"] = portfolio;
  return root.dump(2) + "\n";
}

}  // namespace hydrofsr::casefile
