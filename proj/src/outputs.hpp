#pragma once

// Report emission. Matrix outputs are long-format CSV, one (entity, period)
// row each; the first line is a "# run:" stamp and everything after it is
// deterministic for identical inputs.

#include "dispatch.hpp"
#include "rights.hpp"

#include <filesystem>
#include <string>

namespace hydrofsr::outputs {

// %.10g with magnitudes below 1e−12 printed as 0.
std::string format_number(double v);

// "# run: 2026-10-16T09:30:00Z"
std::string run_stamp();

struct CsvTable {
  std::string name;  // file name without extension
  std::string body;  // header row and data rows
};

std::vector<CsvTable> dispatch_tables(const MpedCase& c, const DispatchSolution& sol);
std::string dispatch_summary(const MpedCase& c, const DispatchSolution& sol);

// Writes every dispatch table as <dir>/<name>.csv, plus summary.txt and
// solution.json (the full solution, reloadable by read_solution).
void write_dispatch(const std::filesystem::path& dir, const MpedCase& c, const DispatchSolution& sol,
                    const std::string& stamp);

std::string solution_to_json(const DispatchSolution& sol);
// Checks dimensions against the case; Error(schema) on mismatch.
DispatchSolution solution_from_json(const std::string& text, const std::string& origin, const MpedCase& c);
// Error(ordering) if the file is missing.
DispatchSolution read_solution(const std::filesystem::path& dir, const MpedCase& c);

std::string settlement_csv(const MpedCase& c, const Portfolio& p, const SettlementReport& r);
std::string settlement_summary(const SettlementReport& r);

std::string sft_report(const MpedCase& c, const SftResult& r);
std::string sft_witness_csv(const MpedCase& c, const SftResult& r);

std::string valuation_report(const MpedCase& c, int storage, double energy, const FsrValuation& v);
std::string valuation_csv(const MpedCase& c, const FsrValuation& v);

// Writes text to path, creating parent directories; Error(io) on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hydrofsr::outputs
