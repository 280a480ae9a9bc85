#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <hydrofsr/hydrofsr.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kCases = HYDROFSR_CASES_DIR;

std::string path_of(const std::string& name) { return (kCases / (name + ".json")).string(); }

hfsr_case* load(const std::string& name) {
  hfsr_case* c = nullptr;
  REQUIRE(hfsr_case_load(path_of(name).c_str(), &c) == HFSR_OK);
  return c;
}

std::string take(char* s) {
  std::string out(s);
  hfsr_string_free(s);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hydrofsr_capi_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(hfsr_status_name(HFSR_OK)) == "ok");
  CHECK(std::string(hfsr_status_name(HFSR_ERR_INFEASIBLE)) == "infeasible");
  CHECK(std::string(hfsr_status_name(HFSR_ERR_ORDERING)) == "ordering");
  CHECK(std::string(hfsr_status_name(HFSR_ERR_IO)) == "io");
  CHECK(std::string(hfsr_status_name(HFSR_ERR_INTERNAL)) == "internal");
  CHECK(std::string(hfsr_version()).size() > 0);
}

TEST_CASE("null arguments are reported, not dereferenced") {
  CHECK(hfsr_case_load(nullptr, nullptr) == HFSR_ERR_INVALID_ARGUMENT);
  CHECK(std::string(hfsr_last_error()).size() > 0);
  double v = 0;
  CHECK(hfsr_solution_objective(nullptr, &v) == HFSR_ERR_INVALID_ARGUMENT);
  hfsr_case_free(nullptr);
  hfsr_solution_free(nullptr);
}

TEST_CASE("library errors map to status codes with a message") {
  hfsr_case* c = nullptr;
  CHECK(hfsr_case_load("/nonexistent/case.json", &c) == HFSR_ERR_IO);
  CHECK(c == nullptr);
  CHECK(std::string(hfsr_last_error()).find("/nonexistent/case.json") != std::string::npos);
  CHECK(hfsr_case_load_string("{", "inline", &c) == HFSR_ERR_PARSE);
  CHECK(hfsr_case_load_string(R"({"schema_version": 9})", "inline", &c) == HFSR_ERR_SCHEMA);
}

TEST_CASE("dimensions, emission and equality") {
  hfsr_case* c = load("two_bus_congested");
  int n = 0, m = 0, T = 0, s = -1;
  REQUIRE(hfsr_case_dimensions(c, &n, &m, &T, &s) == HFSR_OK);
  CHECK(n == 2);
  CHECK(m == 1);
  CHECK(T == 2);
  CHECK(s == 0);
  char* text = nullptr;
  REQUIRE(hfsr_case_emit(c, &text) == HFSR_OK);
  const std::string emitted = take(text);
  hfsr_case* again = nullptr;
  REQUIRE(hfsr_case_load_string(emitted.c_str(), "emitted", &again) == HFSR_OK);
  int equal = 0;
  REQUIRE(hfsr_case_equal(c, again, &equal) == HFSR_OK);
  CHECK(equal == 1);
  hfsr_case* other = load("copper_plate");
  REQUIRE(hfsr_case_equal(c, other, &equal) == HFSR_OK);
  CHECK(equal == 0);
  hfsr_case_free(other);
  hfsr_case_free(again);
  hfsr_case_free(c);
}

TEST_CASE("dispatch, settle and the surplus through the C interface") {
  hfsr_case* c = load("two_bus_congested");
  hfsr_solution* s = nullptr;
  REQUIRE(hfsr_dispatch(c, &s) == HFSR_OK);
  double ms = 0, obj = 0, lmp = 0;
  REQUIRE(hfsr_solution_merchandising_surplus(s, &ms) == HFSR_OK);
  CHECK(ms == doctest::Approx(60).epsilon(1e-6));
  REQUIRE(hfsr_solution_objective(s, &obj) == HFSR_OK);
  CHECK(obj == doctest::Approx(1100).epsilon(1e-8));
  REQUIRE(hfsr_solution_lmp(s, 1, 0, &lmp) == HFSR_OK);
  CHECK(lmp == doctest::Approx(12).epsilon(1e-6));
  CHECK(hfsr_solution_lmp(s, 5, 0, &lmp) == HFSR_ERR_DOMAIN);

  hfsr_settlement* r = nullptr;
  REQUIRE(hfsr_settle(c, s, &r) == HFSR_OK);
  double total = 0, ms2 = 0;
  int adequate = 0;
  REQUIRE(hfsr_settlement_totals(r, &total, &ms2, &adequate) == HFSR_OK);
  // FTR 20 MW plus FGR 10 MW across a 2 $/MWh spread in one period.
  CHECK(total == doctest::Approx(60).epsilon(1e-6));
  CHECK(adequate == 1);
  hfsr_settlement_free(r);
  hfsr_solution_free(s);
  hfsr_case_free(c);
}

TEST_CASE("written solutions reload and settle identically") {
  hfsr_case* c = load("hydro_cascade");
  hfsr_solution* s = nullptr;
  REQUIRE(hfsr_dispatch(c, &s) == HFSR_OK);
  const fs::path dir = scratch("reload");
  REQUIRE(hfsr_solution_write(c, s, dir.c_str(), "# run: test") == HFSR_OK);
  for (const char* f : {"P.csv", "U.csv", "Q.csv", "lambda.csv", "mu.csv", "eta_upper.csv", "eta_lower.csv",
                        "level.csv", "flow.csv", "summary.txt", "solution.json"})
    CHECK(fs::exists(dir / f));
  CHECK(slurp(dir / "P.csv").rfind("# run: test\n", 0) == 0);

  hfsr_solution* back = nullptr;
  REQUIRE(hfsr_solution_read(c, dir.c_str(), &back) == HFSR_OK);
  hfsr_settlement *r1 = nullptr, *r2 = nullptr;
  REQUIRE(hfsr_settle(c, s, &r1) == HFSR_OK);
  REQUIRE(hfsr_settle(c, back, &r2) == HFSR_OK);
  double t1 = 0, t2 = 0;
  hfsr_settlement_totals(r1, &t1, nullptr, nullptr);
  hfsr_settlement_totals(r2, &t2, nullptr, nullptr);
  CHECK(t1 == t2);
  hfsr_settlement_free(r1);
  hfsr_settlement_free(r2);
  hfsr_solution_free(back);
  hfsr_solution_free(s);
  hfsr_case_free(c);
  fs::remove_all(dir);
}

TEST_CASE("reading a missing solution is an ordering error") {
  hfsr_case* c = load("two_bus_congested");
  hfsr_solution* s = nullptr;
  CHECK(hfsr_solution_read(c, scratch("missing").c_str(), &s) == HFSR_ERR_ORDERING);
  CHECK(s == nullptr);
  hfsr_case_free(c);
}

TEST_CASE("feasibility test verdicts") {
  hfsr_case* c = load("two_bus_congested");
  hfsr_sft_result* r = nullptr;
  REQUIRE(hfsr_sft(c, &r) == HFSR_OK);
  int feasible = 0;
  hfsr_sft_verdict(r, &feasible, nullptr);
  CHECK(feasible == 1);
  hfsr_sft_free(r);

  REQUIRE(hfsr_case_set_portfolio_file(c, (kCases / "portfolios" / "two_bus_oversold.json").c_str()) == HFSR_OK);
  REQUIRE(hfsr_sft(c, &r) == HFSR_OK);
  double violation = 0;
  hfsr_sft_verdict(r, &feasible, &violation);
  CHECK(feasible == 0);
  CHECK(violation == doctest::Approx(10).epsilon(1e-6));
  const char* row = nullptr;
  REQUIRE(hfsr_sft_violated_row(r, &row) == HFSR_OK);
  CHECK(std::string(row) == "flow l1:fwd t=1");
  hfsr_sft_free(r);

  REQUIRE(hfsr_case_clear_portfolio(c) == HFSR_OK);
  int size = -1;
  hfsr_case_portfolio_size(c, &size);
  CHECK(size == 0);
  hfsr_case_free(c);
}

TEST_CASE("storage valuation through the C interface") {
  hfsr_case* c = load("hydro_peak_offpeak");
  hfsr_valuation* v = nullptr;
  REQUIRE(hfsr_value_fsr(c, "h1", 40, &v) == HFSR_OK);
  double value = 0;
  hfsr_valuation_value(v, &value);
  CHECK(value == doctest::Approx(60).epsilon(1e-6));
  hfsr_valuation_free(v);
  CHECK(hfsr_value_fsr(c, "nope", 40, &v) == HFSR_ERR_REFERENCE);
  CHECK(hfsr_value_fsr(c, "h1", 1000, &v) == HFSR_ERR_CONTRACT);
  hfsr_case_free(c);
}

TEST_CASE("independent handles can be used from several threads") {
  std::vector<double> results(4, 0.0);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < results.size(); ++i)
    pool.emplace_back([&, i] {
      hfsr_case* c = nullptr;
      if (hfsr_case_load(path_of("three_bus_triangle").c_str(), &c) != HFSR_OK) return;
      hfsr_solution* s = nullptr;
      if (hfsr_dispatch(c, &s) == HFSR_OK) hfsr_solution_objective(s, &results[i]);
      hfsr_solution_free(s);
      hfsr_case_free(c);
    });
  for (auto& t : pool) t.join();
  for (double r : results) CHECK(r == results[0]);
  CHECK(results[0] > 0);
}
