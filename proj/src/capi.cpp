#include "hydrofsr/hydrofsr.h"

#include "casefile.hpp"
#include "error.hpp"
#include "outputs.hpp"

#include <cstring>
#include <new>
#include <string>

using namespace hydrofsr;

struct hfsr_case {
  casefile::CaseFile file;
};

struct hfsr_solution {
  DispatchSolution sol;
};

struct hfsr_settlement {
  Portfolio portfolio;
  SettlementReport report;
};

struct hfsr_sft_result {
  SftResult result;
};

struct hfsr_valuation {
  int storage = 0;
  double energy = 0.0;
  FsrValuation value;
};

namespace {

thread_local std::string last_error;

hfsr_status status_of(ErrorKind kind) { return static_cast<hfsr_status>(static_cast<int>(kind) + 1); }

struct InvalidArgument {
  const char* what;
};

template <typename F>
hfsr_status guarded(F&& f) noexcept {
  last_error.clear();
  try {
    f();
    return HFSR_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const InvalidArgument& e) {
    last_error = e.what;
    return HFSR_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HFSR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HFSR_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return HFSR_ERR_INTERNAL;
  }
}

template <typename... Ptrs>
void need(Ptrs... ptrs) {
  if (((ptrs == nullptr) || ...)) throw InvalidArgument{"null argument"};
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string stamp_or_now(const char* stamp) { return stamp ? std::string(stamp) : outputs::run_stamp(); }

}  // namespace

extern "C" {

const char* hfsr_version(void) { return "0.1.0"; }

const char* hfsr_status_name(hfsr_status status) {
  switch (status) {
    case HFSR_OK: return "ok";
    case HFSR_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case HFSR_ERR_INTERNAL: return "internal";
    default: break;
  }
  const int k = static_cast<int>(status) - 1;
  if (k >= 0 && k <= static_cast<int>(ErrorKind::io)) return to_string(static_cast<ErrorKind>(k));
  return "unknown";
}

const char* hfsr_last_error(void) { return last_error.c_str(); }

void hfsr_string_free(char* text) { delete[] text; }

hfsr_status hfsr_run_stamp(char** out) {
  return guarded([&] {
    need(out);
    *out = copy_string(outputs::run_stamp());
  });
}

hfsr_status hfsr_case_load(const char* path, hfsr_case** out) {
  return guarded([&] {
    need(path, out);
    *out = new hfsr_case{casefile::load_case(path)};
  });
}

hfsr_status hfsr_case_load_string(const char* text, const char* origin, hfsr_case** out) {
  return guarded([&] {
    need(text, out);
    *out = new hfsr_case{casefile::parse_case(text, origin ? origin : "<string>")};
  });
}

hfsr_status hfsr_case_emit(const hfsr_case* c, char** out) {
  return guarded([&] {
    need(c, out);
    *out = copy_string(casefile::emit_case(c->file));
  });
}

hfsr_status hfsr_case_equal(const hfsr_case* a, const hfsr_case* b, int* out_equal) {
  return guarded([&] {
    need(a, b, out_equal);
    *out_equal = a->file == b->file ? 1 : 0;
  });
}

hfsr_status hfsr_case_name(const hfsr_case* c, const char** out) {
  return guarded([&] {
    need(c, out);
    *out = c->file.mped.name.c_str();
  });
}

hfsr_status hfsr_case_dimensions(const hfsr_case* c, int* buses, int* lines, int* periods, int* storage) {
  return guarded([&] {
    need(c);
    const MpedCase& m = c->file.mped;
    if (buses) *buses = m.num_buses();
    if (lines) *lines = m.grid.num_lines();
    if (periods) *periods = m.periods;
    if (storage) *storage = m.num_storage();
  });
}

hfsr_status hfsr_case_portfolio_size(const hfsr_case* c, int* out) {
  return guarded([&] {
    need(c, out);
    *out = static_cast<int>(c->file.portfolio.rights.size());
  });
}

hfsr_status hfsr_case_set_portfolio_file(hfsr_case* c, const char* path) {
  return guarded([&] {
    need(c, path);
    c->file.portfolio = casefile::load_portfolio(path, c->file.mped);
  });
}

hfsr_status hfsr_case_clear_portfolio(hfsr_case* c) {
  return guarded([&] {
    need(c);
    c->file.portfolio.rights.clear();
  });
}

void hfsr_case_free(hfsr_case* c) { delete c; }

hfsr_status hfsr_dispatch(const hfsr_case* c, hfsr_solution** out) {
  return guarded([&] {
    need(c, out);
    *out = new hfsr_solution{solve_mped(c->file.mped)};
  });
}

hfsr_status hfsr_solution_read(const hfsr_case* c, const char* dir, hfsr_solution** out) {
  return guarded([&] {
    need(c, dir, out);
    *out = new hfsr_solution{outputs::read_solution(dir, c->file.mped)};
  });
}

hfsr_status hfsr_solution_write(const hfsr_case* c, const hfsr_solution* s, const char* dir, const char* stamp) {
  return guarded([&] {
    need(c, s, dir);
    outputs::write_dispatch(dir, c->file.mped, s->sol, stamp_or_now(stamp));
  });
}

hfsr_status hfsr_solution_summary(const hfsr_case* c, const hfsr_solution* s, char** out) {
  return guarded([&] {
    need(c, s, out);
    *out = copy_string(outputs::dispatch_summary(c->file.mped, s->sol));
  });
}

hfsr_status hfsr_solution_objective(const hfsr_solution* s, double* out) {
  return guarded([&] {
    need(s, out);
    *out = s->sol.objective;
  });
}

hfsr_status hfsr_solution_merchandising_surplus(const hfsr_solution* s, double* out) {
  return guarded([&] {
    need(s, out);
    *out = merchandising_surplus(s->sol).total;
  });
}

hfsr_status hfsr_solution_lmp(const hfsr_solution* s, int bus, int period, double* out) {
  return guarded([&] {
    need(s, out);
    require(bus >= 0 && bus < s->sol.lmp.rows() && period >= 0 && period < s->sol.lmp.cols(), ErrorKind::domain,
            "bus or period index out of range");
    *out = s->sol.lmp(bus, period);
  });
}

void hfsr_solution_free(hfsr_solution* s) { delete s; }

hfsr_status hfsr_settle(const hfsr_case* c, const hfsr_solution* s, hfsr_settlement** out) {
  return guarded([&] {
    need(c, s, out);
    const auto& p = c->file.portfolio;
    *out = new hfsr_settlement{p, revenue_adequacy_check(s->sol, p, c->file.mped.solver.adequacy_tolerance)};
  });
}

hfsr_status hfsr_settlement_totals(const hfsr_settlement* r, double* total_rents, double* merchandising_surplus,
                                   int* adequate) {
  return guarded([&] {
    need(r);
    if (total_rents) *total_rents = r->report.total;
    if (merchandising_surplus) *merchandising_surplus = r->report.merchandising_surplus;
    if (adequate) *adequate = r->report.adequate ? 1 : 0;
  });
}

hfsr_status hfsr_settlement_summary(const hfsr_settlement* r, char** out) {
  return guarded([&] {
    need(r, out);
    *out = copy_string(outputs::settlement_summary(r->report));
  });
}

hfsr_status hfsr_settlement_write(const hfsr_case* c, const hfsr_settlement* r, const char* dir, const char* stamp) {
  return guarded([&] {
    need(c, r, dir);
    const std::filesystem::path d(dir);
    outputs::write_file(d / "settlement.csv",
                        stamp_or_now(stamp) + "\n" + outputs::settlement_csv(c->file.mped, r->portfolio, r->report));
    outputs::write_file(d / "settlement.txt", outputs::settlement_summary(r->report));
  });
}

void hfsr_settlement_free(hfsr_settlement* r) { delete r; }

hfsr_status hfsr_sft(const hfsr_case* c, hfsr_sft_result** out) {
  return guarded([&] {
    need(c, out);
    *out = new hfsr_sft_result{simultaneous_feasibility_test(c->file.portfolio, c->file.mped)};
  });
}

hfsr_status hfsr_sft_verdict(const hfsr_sft_result* r, int* feasible, double* max_violation) {
  return guarded([&] {
    need(r);
    if (feasible) *feasible = r->result.feasible ? 1 : 0;
    if (max_violation) *max_violation = r->result.max_violation;
  });
}

hfsr_status hfsr_sft_violated_row(const hfsr_sft_result* r, const char** out) {
  return guarded([&] {
    need(r, out);
    *out = r->result.violated_row.c_str();
  });
}

hfsr_status hfsr_sft_report(const hfsr_case* c, const hfsr_sft_result* r, char** out) {
  return guarded([&] {
    need(c, r, out);
    *out = copy_string(outputs::sft_report(c->file.mped, r->result));
  });
}

hfsr_status hfsr_sft_write(const hfsr_case* c, const hfsr_sft_result* r, const char* dir, const char* stamp) {
  return guarded([&] {
    need(c, r, dir);
    const std::filesystem::path d(dir);
    outputs::write_file(d / "sft.txt", outputs::sft_report(c->file.mped, r->result));
    outputs::write_file(d / "sft_witness.csv",
                        stamp_or_now(stamp) + "\n" + outputs::sft_witness_csv(c->file.mped, r->result));
  });
}

void hfsr_sft_free(hfsr_sft_result* r) { delete r; }

hfsr_status hfsr_value_fsr(const hfsr_case* c, const char* storage_id, double energy, hfsr_valuation** out) {
  return guarded([&] {
    need(c, storage_id, out);
    const int s = c->file.mped.storage_index(storage_id);
    require(s >= 0, ErrorKind::reference, std::string("unknown storage '") + storage_id + "'");
    *out = new hfsr_valuation{s, energy, value_fsr_flat_bid_reallocation(c->file.mped, s, energy)};
  });
}

hfsr_status hfsr_valuation_value(const hfsr_valuation* v, double* out) {
  return guarded([&] {
    need(v, out);
    *out = v->value.valuation;
  });
}

hfsr_status hfsr_valuation_report(const hfsr_case* c, const hfsr_valuation* v, char** out) {
  return guarded([&] {
    need(c, v, out);
    *out = copy_string(outputs::valuation_report(c->file.mped, v->storage, v->energy, v->value));
  });
}

hfsr_status hfsr_valuation_write(const hfsr_case* c, const hfsr_valuation* v, const char* dir, const char* stamp) {
  return guarded([&] {
    need(c, v, dir);
    const std::filesystem::path d(dir);
    outputs::write_file(d / "valuation.txt", outputs::valuation_report(c->file.mped, v->storage, v->energy, v->value));
    outputs::write_file(d / "valuation.csv",
                        stamp_or_now(stamp) + "\n" + outputs::valuation_csv(c->file.mped, v->value));
  });
}

void hfsr_valuation_free(hfsr_valuation* v) { delete v; }

}  // extern "C"
