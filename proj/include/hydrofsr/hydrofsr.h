#ifndef HYDROFSR_H
#define HYDROFSR_H

/* C interface to the hydrofsr library: multi-period dispatch with storage,
 * settlement of transmission and storage rights, the simultaneous
 * feasibility test, and flat-bid storage valuation.
 *
 * All objects are opaque handles released with the matching *_free call.
 * Every fallible call returns an hfsr_status; on failure the message is
 * available from hfsr_last_error() on the same thread until the next call.
 * Strings returned through char** are owned by the caller and released with
 * hfsr_string_free. */

#include <stddef.h>

#if defined(HYDROFSR_BUILDING_LIBRARY)
#define HFSR_API __attribute__((visibility("default")))
#else
#define HFSR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hfsr_status {
  HFSR_OK = 0,
  HFSR_ERR_DOMAIN,
  HFSR_ERR_STRUCTURAL,
  HFSR_ERR_CALIBRATION,
  HFSR_ERR_VALIDATION,
  HFSR_ERR_INFEASIBLE,
  HFSR_ERR_SOLVER,
  HFSR_ERR_CONSISTENCY,
  HFSR_ERR_CONTRACT,
  HFSR_ERR_PARSE,
  HFSR_ERR_SCHEMA,
  HFSR_ERR_UNITS,
  HFSR_ERR_REFERENCE,
  HFSR_ERR_ORDERING,
  HFSR_ERR_IO,
  HFSR_ERR_INVALID_ARGUMENT, /* null handle or output pointer */
  HFSR_ERR_INTERNAL
} hfsr_status;

typedef struct hfsr_case hfsr_case;
typedef struct hfsr_solution hfsr_solution;
typedef struct hfsr_settlement hfsr_settlement;
typedef struct hfsr_sft_result hfsr_sft_result;
typedef struct hfsr_valuation hfsr_valuation;

HFSR_API const char* hfsr_version(void);
/* Short lowercase name, e.g. "infeasible". */
HFSR_API const char* hfsr_status_name(hfsr_status status);
HFSR_API const char* hfsr_last_error(void);
HFSR_API void hfsr_string_free(char* text);
/* "# run: <UTC timestamp>" */
HFSR_API hfsr_status hfsr_run_stamp(char** out);

/* Cases */
HFSR_API hfsr_status hfsr_case_load(const char* path, hfsr_case** out);
HFSR_API hfsr_status hfsr_case_load_string(const char* text, const char* origin, hfsr_case** out);
HFSR_API hfsr_status hfsr_case_emit(const hfsr_case* c, char** out);
HFSR_API hfsr_status hfsr_case_equal(const hfsr_case* a, const hfsr_case* b, int* out_equal);
HFSR_API hfsr_status hfsr_case_name(const hfsr_case* c, const char** out);
HFSR_API hfsr_status hfsr_case_dimensions(const hfsr_case* c, int* buses, int* lines, int* periods, int* storage);
HFSR_API hfsr_status hfsr_case_portfolio_size(const hfsr_case* c, int* out);
/* Replaces the case's portfolio with one read from a portfolio file. */
HFSR_API hfsr_status hfsr_case_set_portfolio_file(hfsr_case* c, const char* path);
HFSR_API hfsr_status hfsr_case_clear_portfolio(hfsr_case* c);
HFSR_API void hfsr_case_free(hfsr_case* c);

/* Dispatch */
HFSR_API hfsr_status hfsr_dispatch(const hfsr_case* c, hfsr_solution** out);
/* Reads <dir>/solution.json; HFSR_ERR_ORDERING when it does not exist. */
HFSR_API hfsr_status hfsr_solution_read(const hfsr_case* c, const char* dir, hfsr_solution** out);
/* CSV tables, summary.txt and solution.json; stamp is the first CSV line. */
HFSR_API hfsr_status hfsr_solution_write(const hfsr_case* c, const hfsr_solution* s, const char* dir,
                                         const char* stamp);
HFSR_API hfsr_status hfsr_solution_summary(const hfsr_case* c, const hfsr_solution* s, char** out);
HFSR_API hfsr_status hfsr_solution_objective(const hfsr_solution* s, double* out);
HFSR_API hfsr_status hfsr_solution_merchandising_surplus(const hfsr_solution* s, double* out);
/* bus and period are zero-based. */
HFSR_API hfsr_status hfsr_solution_lmp(const hfsr_solution* s, int bus, int period, double* out);
HFSR_API void hfsr_solution_free(hfsr_solution* s);

/* Settlement of the case's portfolio against a dispatch */
HFSR_API hfsr_status hfsr_settle(const hfsr_case* c, const hfsr_solution* s, hfsr_settlement** out);
HFSR_API hfsr_status hfsr_settlement_totals(const hfsr_settlement* r, double* total_rents,
                                            double* merchandising_surplus, int* adequate);
HFSR_API hfsr_status hfsr_settlement_summary(const hfsr_settlement* r, char** out);
/* settlement.csv and settlement.txt */
HFSR_API hfsr_status hfsr_settlement_write(const hfsr_case* c, const hfsr_settlement* r, const char* dir,
                                           const char* stamp);
HFSR_API void hfsr_settlement_free(hfsr_settlement* r);

/* Simultaneous feasibility test of the case's portfolio */
HFSR_API hfsr_status hfsr_sft(const hfsr_case* c, hfsr_sft_result** out);
HFSR_API hfsr_status hfsr_sft_verdict(const hfsr_sft_result* r, int* feasible, double* max_violation);
/* Empty string when feasible. Valid while the handle lives. */
HFSR_API hfsr_status hfsr_sft_violated_row(const hfsr_sft_result* r, const char** out);
HFSR_API hfsr_status hfsr_sft_report(const hfsr_case* c, const hfsr_sft_result* r, char** out);
/* sft.txt and sft_witness.csv */
HFSR_API hfsr_status hfsr_sft_write(const hfsr_case* c, const hfsr_sft_result* r, const char* dir,
                                    const char* stamp);
HFSR_API void hfsr_sft_free(hfsr_sft_result* r);

/* Flat-bid reallocation value of `energy` MWh through storage unit `storage_id` */
HFSR_API hfsr_status hfsr_value_fsr(const hfsr_case* c, const char* storage_id, double energy, hfsr_valuation** out);
HFSR_API hfsr_status hfsr_valuation_value(const hfsr_valuation* v, double* out);
HFSR_API hfsr_status hfsr_valuation_report(const hfsr_case* c, const hfsr_valuation* v, char** out);
/* valuation.txt and valuation.csv */
HFSR_API hfsr_status hfsr_valuation_write(const hfsr_case* c, const hfsr_valuation* v, const char* dir,
                                          const char* stamp);
HFSR_API void hfsr_valuation_free(hfsr_valuation* v);

#ifdef __cplusplus
}
#endif

#endif /* HYDROFSR_H */
