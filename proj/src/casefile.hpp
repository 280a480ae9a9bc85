#pragma once

// JSON case files: schema, loading with field-level diagnostics, and
// canonical emission (scalars are always written back as per-period arrays).

#include "dispatch.hpp"
#include "rights.hpp"

#include <filesystem>
#include <string>

namespace hydrofsr::casefile {

inline constexpr int kSchemaVersion = 1;

struct CaseFile {
  MpedCase mped;
  Portfolio portfolio;

  friend bool operator==(const CaseFile&, const CaseFile&) = default;
};

// `origin` prefixes every diagnostic, normally the file path.
CaseFile parse_case(const std::string& text, const std::string& origin);
CaseFile load_case(const std::filesystem::path& path);

// A standalone portfolio file: {"schema_version": 1, "portfolio": [...]}.
Portfolio parse_portfolio(const std::string& text, const std::string& origin, const MpedCase& c);
Portfolio load_portfolio(const std::filesystem::path& path, const MpedCase& c);

std::string emit_case(const CaseFile& cf);

// 1e−8 unless HYDROFSR_TOLERANCE holds a positive number.
double default_tolerance();

std::string read_text(const std::filesystem::path& path);

}  // namespace hydrofsr::casefile
