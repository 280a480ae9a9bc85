// hydrofsr command-line front end. Talks to the library only through the C
// interface.

#include <hydrofsr/hydrofsr.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Failure {
  std::string kind;
  int code = 0;
  std::string message;
};

void check(hfsr_status s) {
  if (s != HFSR_OK) throw Failure{hfsr_status_name(s), static_cast<int>(s), hfsr_last_error()};
}

[[noreturn]] void usage_failure(const std::string& message) { throw Failure{"usage", -1, message}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using CaseHandle = std::unique_ptr<hfsr_case, Deleter<hfsr_case, hfsr_case_free>>;
using SolutionHandle = std::unique_ptr<hfsr_solution, Deleter<hfsr_solution, hfsr_solution_free>>;
using SettlementHandle = std::unique_ptr<hfsr_settlement, Deleter<hfsr_settlement, hfsr_settlement_free>>;
using SftHandle = std::unique_ptr<hfsr_sft_result, Deleter<hfsr_sft_result, hfsr_sft_free>>;
using ValuationHandle = std::unique_ptr<hfsr_valuation, Deleter<hfsr_valuation, hfsr_valuation_free>>;

std::string take(char* s) {
  std::string out(s ? s : "");
  hfsr_string_free(s);
  return out;
}

fs::path cases_dir() {
  if (const char* env = std::getenv("HYDROFSR_CASES_DIR"); env && *env) return env;
  return HYDROFSR_DEFAULT_CASES_DIR;
}

// A case argument is either a path to a file or the name of a bundled case.
fs::path resolve_case(const std::string& arg, const fs::path& base = {}) {
  const fs::path direct = base.empty() || fs::path(arg).is_absolute() ? fs::path(arg) : base / arg;
  if (fs::is_regular_file(direct)) return direct;
  const fs::path bundled = cases_dir() / (arg + ".json");
  if (fs::is_regular_file(bundled)) return bundled;
  throw Failure{"io", HFSR_ERR_IO, arg + ": no such case file or bundled case (looked in " + cases_dir().string() + ")"};
}

CaseHandle load_case(const fs::path& path) {
  hfsr_case* c = nullptr;
  check(hfsr_case_load(path.c_str(), &c));
  return CaseHandle(c);
}

std::string case_name(const hfsr_case* c) {
  const char* name = nullptr;
  check(hfsr_case_name(c, &name));
  return name;
}

fs::path default_out(const hfsr_case* c) { return fs::path("out") / case_name(c); }

std::string stamp() {
  char* s = nullptr;
  check(hfsr_run_stamp(&s));
  return take(s);
}

int run_dispatch(const std::string& case_arg, std::string out) {
  auto c = load_case(resolve_case(case_arg));
  if (out.empty()) out = default_out(c.get()).string();
  hfsr_solution* raw = nullptr;
  check(hfsr_dispatch(c.get(), &raw));
  SolutionHandle s(raw);
  const std::string st = stamp();
  check(hfsr_solution_write(c.get(), s.get(), out.c_str(), st.c_str()));
  char* text = nullptr;
  check(hfsr_solution_summary(c.get(), s.get(), &text));
  std::cout << take(text) << "outputs: " << out << "\n";
  return 0;
}

int run_settle(const std::string& case_arg, std::string solution, const std::string& portfolio, std::string out) {
  auto c = load_case(resolve_case(case_arg));
  if (solution.empty()) solution = default_out(c.get()).string();
  if (out.empty()) out = solution;
  if (!portfolio.empty()) check(hfsr_case_set_portfolio_file(c.get(), portfolio.c_str()));
  hfsr_solution* raw = nullptr;
  check(hfsr_solution_read(c.get(), solution.c_str(), &raw));
  SolutionHandle s(raw);
  hfsr_settlement* rraw = nullptr;
  check(hfsr_settle(c.get(), s.get(), &rraw));
  SettlementHandle r(rraw);
  check(hfsr_settlement_write(c.get(), r.get(), out.c_str(), stamp().c_str()));
  char* text = nullptr;
  check(hfsr_settlement_summary(r.get(), &text));
  std::cout << take(text) << "outputs: " << out << "\n";
  return 0;
}

int run_sft(const std::string& case_arg, const std::string& portfolio, const std::string& out) {
  auto c = load_case(resolve_case(case_arg));
  if (!portfolio.empty()) check(hfsr_case_set_portfolio_file(c.get(), portfolio.c_str()));
  hfsr_sft_result* raw = nullptr;
  check(hfsr_sft(c.get(), &raw));
  SftHandle r(raw);
  char* text = nullptr;
  check(hfsr_sft_report(c.get(), r.get(), &text));
  std::cout << take(text);
  if (!out.empty()) {
    check(hfsr_sft_write(c.get(), r.get(), out.c_str(), stamp().c_str()));
    std::cout << "outputs: " << out << "\n";
  }
  return 0;
}

int run_value_fsr(const std::string& case_arg, const std::string& storage, double energy, const std::string& out) {
  auto c = load_case(resolve_case(case_arg));
  hfsr_valuation* raw = nullptr;
  check(hfsr_value_fsr(c.get(), storage.c_str(), energy, &raw));
  ValuationHandle v(raw);
  char* text = nullptr;
  check(hfsr_valuation_report(c.get(), v.get(), &text));
  std::cout << take(text);
  if (!out.empty()) {
    check(hfsr_valuation_write(c.get(), v.get(), out.c_str(), stamp().c_str()));
    std::cout << "outputs: " << out << "\n";
  }
  return 0;
}

std::string fmt(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Scenario list:
//   {"schema_version": 1,
//    "scenarios": [{"case": "...", "portfolio": "file", "value_fsr": {"storage": "h1", "energy": 40}}]}
// Relative paths resolve against the list's directory.
int run_report(const std::string& list_path, std::string out) {
  if (out.empty()) out = "out/report";
  std::ifstream in(list_path);
  if (!in) throw Failure{"io", HFSR_ERR_IO, list_path + ": cannot open file"};
  json list;
  try {
    list = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Failure{"parse", HFSR_ERR_PARSE, list_path + ": " + e.what()};
  }
  auto schema = [&](const std::string& field, const std::string& msg) {
    throw Failure{"schema", HFSR_ERR_SCHEMA, list_path + ": " + field + ": " + msg};
  };
  if (!list.is_object() || list.value("schema_version", 0) != 1) schema("schema_version", "expected 1");
  if (!list.contains("scenarios") || !list["scenarios"].is_array()) schema("scenarios", "expected an array");
  const fs::path base = fs::path(list_path).parent_path();
  const std::string st = stamp();

  std::ostringstream table;
  table << "case,objective,merchandising_surplus,total_rents,adequate,sft,valuation\n";
  const auto& scenarios = list["scenarios"];
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const json& sc = scenarios[i];
    const std::string field = "scenarios[" + std::to_string(i) + "]";
    if (!sc.is_object() || !sc.contains("case") || !sc["case"].is_string()) schema(field + ".case", "expected a case name or path");
    auto c = load_case(resolve_case(sc["case"].get<std::string>(), base));
    if (sc.contains("portfolio")) {
      if (!sc["portfolio"].is_string()) schema(field + ".portfolio", "expected a path");
      const fs::path p = base / sc["portfolio"].get<std::string>();
      check(hfsr_case_set_portfolio_file(c.get(), p.c_str()));
    }
    const fs::path dir = fs::path(out) / (std::to_string(i + 1) + "_" + case_name(c.get()));

    hfsr_solution* sraw = nullptr;
    check(hfsr_dispatch(c.get(), &sraw));
    SolutionHandle s(sraw);
    check(hfsr_solution_write(c.get(), s.get(), dir.c_str(), st.c_str()));
    double objective = 0, ms = 0, rents = 0;
    int adequate = 1;
    check(hfsr_solution_objective(s.get(), &objective));

    hfsr_settlement* rraw = nullptr;
    check(hfsr_settle(c.get(), s.get(), &rraw));
    SettlementHandle r(rraw);
    check(hfsr_settlement_write(c.get(), r.get(), dir.c_str(), st.c_str()));
    check(hfsr_settlement_totals(r.get(), &rents, &ms, &adequate));

    hfsr_sft_result* fraw = nullptr;
    check(hfsr_sft(c.get(), &fraw));
    SftHandle f(fraw);
    check(hfsr_sft_write(c.get(), f.get(), dir.c_str(), st.c_str()));
    int feasible = 0;
    check(hfsr_sft_verdict(f.get(), &feasible, nullptr));

    std::string valuation;
    if (sc.contains("value_fsr")) {
      const json& v = sc["value_fsr"];
      if (!v.is_object() || !v.contains("storage") || !v["storage"].is_string() || !v.contains("energy") ||
          !v["energy"].is_number())
        schema(field + ".value_fsr", "expected {storage, energy}");
      hfsr_valuation* vraw = nullptr;
      check(hfsr_value_fsr(c.get(), v["storage"].get<std::string>().c_str(), v["energy"].get<double>(), &vraw));
      ValuationHandle vh(vraw);
      check(hfsr_valuation_write(c.get(), vh.get(), dir.c_str(), st.c_str()));
      double value = 0;
      check(hfsr_valuation_value(vh.get(), &value));
      valuation = fmt(value);
    }
    table << case_name(c.get()) << "," << fmt(objective) << "," << fmt(ms) << "," << fmt(rents) << ","
          << (adequate ? "yes" : "no") << "," << (feasible ? "feasible" : "infeasible") << "," << valuation << "\n";
  }
  fs::create_directories(out);
  std::ofstream(fs::path(out) / "report.csv", std::ios::binary) << st << "\n" << table.str();
  std::cout << table.str() << "outputs: " << out << "\n";
  return 0;
}

void print_failure(const Failure& f, const std::string& command) {
  json record = {{"error", {{"kind", f.kind}, {"code", f.code}, {"command", command}, {"message", f.message}}}};
  std::cerr << record.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-period dispatch with storage, rights settlement and storage valuation"};
  app.set_version_flag("--version", std::string(hfsr_version()));
  app.require_subcommand(1);

  std::string case_arg, out, solution, portfolio, storage, list;
  double energy = 0.0;

  auto* dispatch = app.add_subcommand("dispatch", "Solve the dispatch and write prices, schedules and a summary");
  dispatch->add_option("case", case_arg, "Case file or bundled case name")->required();
  dispatch->add_option("--out", out, "Output directory (default out/<case>)");

  auto* settle = app.add_subcommand("settle", "Settle the portfolio against a saved dispatch");
  settle->add_option("case", case_arg, "Case file or bundled case name")->required();
  settle->add_option("--solution", solution, "Directory holding solution.json (default out/<case>)");
  settle->add_option("--portfolio", portfolio, "Portfolio file replacing the case's portfolio");
  settle->add_option("--out", out, "Output directory (default: the solution directory)");

  auto* sft = app.add_subcommand("sft", "Run the simultaneous feasibility test on the portfolio");
  sft->add_option("case", case_arg, "Case file or bundled case name")->required();
  sft->add_option("--portfolio", portfolio, "Portfolio file replacing the case's portfolio");
  sft->add_option("--out", out, "Also write sft.txt and the witness schedule here");

  auto* value = app.add_subcommand("value-fsr", "Value moving a flat storage schedule to its best timing");
  value->add_option("case", case_arg, "Case file or bundled case name")->required();
  value->add_option("--storage", storage, "Storage unit id")->required();
  value->add_option("--energy", energy, "Energy over the horizon, MWh")->required();
  value->add_option("--out", out, "Also write valuation.txt and valuation.csv here");

  auto* report = app.add_subcommand("report", "Run every scenario in a list and tabulate the results");
  report->add_option("scenarios", list, "Scenario list file")->required();
  report->add_option("--out", out, "Output directory (default out/report)");

  std::string command = argc > 1 ? argv[1] : "";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_failure(Failure{"usage", -1, e.what()}, command);
    return 2;
  }

  try {
    if (*dispatch) return run_dispatch(case_arg, out);
    if (*settle) return run_settle(case_arg, solution, portfolio, out);
    if (*sft) return run_sft(case_arg, portfolio, out);
    if (*value) return run_value_fsr(case_arg, storage, energy, out);
    if (*report) return run_report(list, out);
    usage_failure("no subcommand given");
  } catch (const Failure& f) {
    print_failure(f, command);
    return f.kind == "usage" ? 2 : 1;
  } catch (const std::exception& e) {
    print_failure(Failure{"internal", HFSR_ERR_INTERNAL, e.what()}, command);
    return 1;
  }
}
