/* C interface to the frugal5g simulator. Every handle is opaque and owned
 * by the caller until passed to its matching _free function. Functions
 * returning f5g_status leave a message for f5g_last_error() on failure. */
#ifndef FRUGAL5G_H
#define FRUGAL5G_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define F5G_API __declspec(dllexport)
#else
#define F5G_API __attribute__((visibility("default")))
#endif

typedef enum f5g_status {
  F5G_OK = 0,
  F5G_ERR_INVARIANT_VIOLATION = 1,
  F5G_ERR_TRUNCATED,
  F5G_ERR_UNKNOWN_TYPE,
  F5G_ERR_UNREACHABLE,
  F5G_ERR_ALREADY_CONNECTED,
  F5G_ERR_BEARER_NOT_ACTIVE,
  F5G_ERR_DUPLICATE_DRB,
  F5G_ERR_MRB_NOT_READY,
  F5G_ERR_UNKNOWN_UE,
  F5G_ERR_ASSOC_ID_EXHAUSTED,
  F5G_ERR_TOO_LARGE,
  F5G_ERR_NOT_DATA,
  F5G_ERR_NOT_ASSOCIATED,
  F5G_ERR_AP_ASLEEP,
  F5G_ERR_STALE_REPORT,
  F5G_ERR_NO_CAPACITY,
  F5G_ERR_DISCONNECTED,
  F5G_ERR_BAD_CREDENTIALS,
  F5G_ERR_NOT_AUTHENTICATED,
  F5G_ERR_NO_EXTERNAL_NETWORK,
  F5G_ERR_MODE_MISMATCH,
  F5G_ERR_EPOCH_REGRESSION,
  F5G_ERR_SCHEMA,
  F5G_ERR_IO,
  F5G_ERR_INVALID_ARGUMENT = 100,
  F5G_ERR_INTERNAL = 101
} f5g_status;

typedef struct f5g_scenario f5g_scenario;
typedef struct f5g_result f5g_result;

F5G_API const char* f5g_version(void);
F5G_API const char* f5g_status_name(f5g_status status);
/* Message of the last failure on this thread; "" when none. */
F5G_API const char* f5g_last_error(void);

F5G_API f5g_status f5g_scenario_load(const char* path, f5g_scenario** out);
F5G_API f5g_status f5g_scenario_parse(const char* text, size_t len, f5g_scenario** out);
F5G_API const char* f5g_scenario_name(const f5g_scenario* scenario);
F5G_API uint64_t f5g_scenario_seed(const f5g_scenario* scenario);
F5G_API void f5g_scenario_free(f5g_scenario* scenario);

/* seed may be NULL to use the scenario's own. */
F5G_API f5g_status f5g_run(const f5g_scenario* scenario, const uint64_t* seed, f5g_result** out);
/* Views into the result, valid until f5g_result_free. len may be NULL. */
F5G_API const char* f5g_result_trace(const f5g_result* result, size_t* len);
F5G_API const char* f5g_result_metrics(const f5g_result* result, size_t* len);
F5G_API uint64_t f5g_result_trace_digest(const f5g_result* result);
F5G_API void f5g_result_free(f5g_result* result);

/* Comma-separated node and kind lists; NULL or "" keeps everything. The
 * filtered trace is returned in *out, freed with f5g_string_free. */
F5G_API f5g_status f5g_trace_filter(const char* trace, size_t len, const char* nodes, const char* kinds,
                                    char** out);
/* One line per call-flow entry of `ue`'s attach. */
F5G_API f5g_status f5g_trace_call_flow(const char* trace, size_t len, const char* ue, char** out);
F5G_API void f5g_string_free(char* s);

/* Decodes a MAC frame and describes it on one line. */
F5G_API f5g_status f5g_frame_describe(const uint8_t* bytes, size_t len, char** out);
/* Encodes a data frame from `src` to `dst` (indices of locally administered
 * addresses) into a buffer freed with f5g_bytes_free. */
F5G_API f5g_status f5g_frame_encode_data(uint32_t src, uint32_t dst, uint16_t seq, const uint8_t* body,
                                         size_t body_len, uint8_t** out, size_t* out_len);
F5G_API void f5g_bytes_free(uint8_t* bytes);

#ifdef __cplusplus
}
#endif

#endif
