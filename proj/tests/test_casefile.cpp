#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "casefile.hpp"
#include "error.hpp"
#include "fixtures.hpp"
#include "outputs.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>

using namespace hydrofsr;
using namespace testing;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const fs::path kCases = HYDROFSR_CASES_DIR;

json bundled_json(const std::string& name) { return json::parse(casefile::read_text(kCases / (name + ".json"))); }

// Runs parse_case on a mutated copy and returns the error it raises.
template <typename Edit>
Error parse_error(const std::string& name, Edit edit) {
  json j = bundled_json(name);
  edit(j);
  try {
    casefile::parse_case(j.dump(), "edited.json");
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected the edited case to be rejected");
  return Error(ErrorKind::contract, "unreachable");
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

const char* kBundled[] = {"two_bus_congested", "copper_plate",  "three_bus_triangle",
                          "hydro_peak_offpeak", "ess_arbitrage", "hydro_cascade"};

}  // namespace

TEST_CASE("bundled two-bus case loads with the expected shape") {
  const auto cf = casefile::load_case(kCases / "two_bus_congested.json");
  CHECK(cf.mped.num_buses() == 2);
  CHECK(cf.mped.grid.num_lines() == 1);
  CHECK(cf.mped.periods == 2);
  CHECK(cf.portfolio.rights.size() == 2);
}

TEST_CASE("bundled cases describe the same systems as the test fixtures") {
  CHECK(casefile::load_case(kCases / "two_bus_congested.json").mped == two_bus_congested());
  CHECK(casefile::load_case(kCases / "copper_plate.json").mped == copper_plate());
  CHECK(casefile::load_case(kCases / "three_bus_triangle.json").mped == three_bus_triangle());
  CHECK(casefile::load_case(kCases / "hydro_peak_offpeak.json").mped == hydro_peak_offpeak());
  CHECK(casefile::load_case(kCases / "ess_arbitrage.json").mped == ess_arbitrage());
}

TEST_CASE("load, emit, load is the identity and emission is stable") {
  for (const char* name : kBundled) {
    CAPTURE(name);
    const auto first = casefile::load_case(kCases / (std::string(name) + ".json"));
    const std::string text = casefile::emit_case(first);
    const auto second = casefile::parse_case(text, "emitted");
    CHECK(second == first);
    CHECK(casefile::emit_case(second) == text);
  }
}

TEST_CASE("scalars broadcast over the horizon") {
  json j = bundled_json("two_bus_congested");
  j["participants"][0]["linear"] = json::array({10, 10});
  const auto arrays = casefile::parse_case(j.dump(), "a");
  j["participants"][0]["linear"] = 10;
  const auto scalar = casefile::parse_case(j.dump(), "b");
  CHECK(arrays == scalar);
}

TEST_CASE("calibration violations name the file, the plant and the inequality") {
  const Error e = parse_error("hydro_peak_offpeak", [](json& j) { j["storage"][0]["plant"]["forebay_height"] = 10; });
  CHECK(e.kind() == ErrorKind::calibration);
  CHECK(contains(e.what(), "edited.json: storage[0].plant"));
  CHECK(contains(e.what(), "forebay_height > tailrace_intercept"));
}

TEST_CASE("cascade cycles are reported") {
  const Error e = parse_error("hydro_cascade", [](json& j) {
    j["storage"][0]["upstream"] = json::array({{{"node", "lower"}, {"lag", 0}}});
  });
  CHECK(e.kind() == ErrorKind::validation);
  CHECK(contains(e.what(), "cycle"));
  CHECK(contains(e.what(), "upper"));
  CHECK(contains(e.what(), "lower"));
}

TEST_CASE("unit mismatches are rejected") {
  const Error e = parse_error("two_bus_congested", [](json& j) { j["units"]["power"] = "kW"; });
  CHECK(e.kind() == ErrorKind::units);
  CHECK(contains(e.what(), "units.power"));
  const Error missing = parse_error("two_bus_congested", [](json& j) { j["units"].erase("volume"); });
  CHECK(missing.kind() == ErrorKind::schema);
  CHECK(contains(missing.what(), "units.volume"));
}

TEST_CASE("schema violations name the field") {
  const Error version = parse_error("two_bus_congested", [](json& j) { j["schema_version"] = 2; });
  CHECK(version.kind() == ErrorKind::schema);
  CHECK(contains(version.what(), "schema_version"));

  const Error missing = parse_error("two_bus_congested", [](json& j) { j["grid"]["lines"][0].erase("reactance"); });
  CHECK(missing.kind() == ErrorKind::schema);
  CHECK(contains(missing.what(), "grid.lines[0].reactance"));

  const Error length = parse_error("two_bus_congested", [](json& j) { j["participants"][2]["load"] = {1, 2, 3}; });
  CHECK(length.kind() == ErrorKind::schema);
  CHECK(contains(length.what(), "participants[2].load"));

  const Error kind = parse_error("two_bus_congested", [](json& j) { j["participants"][0]["kind"] = "swap"; });
  CHECK(kind.kind() == ErrorKind::schema);

  const Error type = parse_error("two_bus_congested", [](json& j) { j["horizon"]["periods"] = "two"; });
  CHECK(type.kind() == ErrorKind::schema);
  CHECK(contains(type.what(), "horizon.periods"));
}

TEST_CASE("unresolved references are rejected") {
  const Error bus = parse_error("two_bus_congested", [](json& j) { j["participants"][1]["bus"] = "b9"; });
  CHECK(bus.kind() == ErrorKind::reference);
  CHECK(contains(bus.what(), "participants[1].bus"));

  const Error line = parse_error("two_bus_congested", [](json& j) { j["portfolio"][1]["line"] = "l1"; });
  CHECK(line.kind() == ErrorKind::reference);
  CHECK(contains(line.what(), "portfolio[1].line"));

  const Error node = parse_error("hydro_cascade", [](json& j) { j["storage"][1]["upstream"][0]["node"] = "nowhere"; });
  CHECK(node.kind() == ErrorKind::reference);
}

TEST_CASE("invalid rights in the portfolio block are rejected") {
  const Error e = parse_error("two_bus_congested", [](json& j) { j["portfolio"][1]["profile"] = {-1, 0}; });
  CHECK(e.kind() == ErrorKind::validation);
  CHECK(contains(e.what(), "portfolio[1]"));
}

TEST_CASE("malformed JSON is a parse error") {
  try {
    casefile::parse_case("{\"schema_version\": 1,", "broken.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(contains(e.what(), "broken.json"));
  }
  CHECK_THROWS_AS(casefile::load_case(kCases / "missing.json"), Error);
}

TEST_CASE("standalone portfolio files resolve against the case") {
  const auto cf = casefile::load_case(kCases / "two_bus_congested.json");
  const auto oversold = casefile::load_portfolio(kCases / "portfolios" / "two_bus_oversold.json", cf.mped);
  REQUIRE(oversold.rights.size() == 1);
  CHECK(oversold.rights[0].profile == std::vector<double>{40, 40});
  CHECK(casefile::load_portfolio(kCases / "portfolios" / "empty.json", cf.mped).rights.empty());
  CHECK_THROWS_AS(casefile::parse_portfolio(R"({"schema_version": 1, "portfolio": [{"kind": "FTR", "holder": "x",
      "from": "b1", "to": "zz", "profile": 1}]})", "p.json", cf.mped), Error);
}

TEST_CASE("default tolerance honours the environment") {
  ::unsetenv("HYDROFSR_TOLERANCE");
  CHECK(casefile::default_tolerance() == 1e-8);
  ::setenv("HYDROFSR_TOLERANCE", "1e-7", 1);
  CHECK(casefile::default_tolerance() == 1e-7);
  json j = bundled_json("copper_plate");
  j.erase("solver");
  CHECK(casefile::parse_case(j.dump(), "x").mped.solver.tolerance == 1e-7);
  ::setenv("HYDROFSR_TOLERANCE", "abc", 1);
  CHECK_THROWS_AS(casefile::default_tolerance(), Error);
  ::unsetenv("HYDROFSR_TOLERANCE");
}

TEST_CASE("dispatch solutions survive a JSON round trip exactly") {
  for (const char* name : kBundled) {
    CAPTURE(name);
    const auto cf = casefile::load_case(kCases / (std::string(name) + ".json"));
    const auto sol = solve_mped(cf.mped);
    const auto back = outputs::solution_from_json(outputs::solution_to_json(sol), "s.json", cf.mped);
    // The writer prints shortest round-trip doubles, so equal text means equal values.
    CHECK(outputs::solution_to_json(back) == outputs::solution_to_json(sol));
    CHECK(back.lmp == sol.lmp);
    CHECK(back.storage_marginal_value == sol.storage_marginal_value);
    CHECK(back.status == sol.status);
  }
  const auto cf = casefile::load_case(kCases / "two_bus_congested.json");
  const auto other = casefile::load_case(kCases / "three_bus_triangle.json");
  const std::string text = outputs::solution_to_json(solve_mped(other.mped));
  CHECK_THROWS_AS(outputs::solution_from_json(text, "s.json", cf.mped), Error);
}

TEST_CASE("reading a solution that was never written is an ordering error") {
  const auto cf = casefile::load_case(kCases / "two_bus_congested.json");
  try {
    outputs::read_solution(fs::temp_directory_path() / "hydrofsr_no_such_dir", cf.mped);
    FAIL("expected an ordering error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ordering);
  }
}

TEST_CASE("number formatting") {
  CHECK(outputs::format_number(60) == "60");
  CHECK(outputs::format_number(59.99999999989) == "60");
  CHECK(outputs::format_number(-3e-13) == "0");
  CHECK(outputs::format_number(0.125) == "0.125");
  CHECK(outputs::format_number(-1.5e6) == "-1500000");
}

TEST_CASE("dispatch tables are long format with one row per entity and period") {
  const auto cf = casefile::load_case(kCases / "hydro_cascade.json");
  const auto sol = solve_mped(cf.mped);
  for (const auto& t : outputs::dispatch_tables(cf.mped, sol)) {
    CAPTURE(t.name);
    const auto rows = std::count(t.body.begin(), t.body.end(), '\n') - 1;
    long entities = 0;
    if (t.name == "P") entities = static_cast<long>(cf.mped.participants.size());
    else if (t.name == "lambda") entities = cf.mped.num_buses();
    else if (t.name == "mu" || t.name == "flow") entities = cf.mped.grid.num_directed();
    else entities = cf.mped.num_storage();
    CHECK(rows == entities * cf.mped.periods);
  }
  CHECK(contains(outputs::dispatch_summary(casefile::load_case(kCases / "two_bus_congested.json").mped,
                                           solve_mped(two_bus_congested())),
                 "merchandising surplus: 60 $"));
}
