/* C ABI for the axsim 802.11ax MU downlink-TCP TXOP simulator. */

#ifndef AXSIM_H
#define AXSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the simulator's error classes.
 */
typedef enum AxsimStatus {
  AXSIM_OK = 0,
  AXSIM_ERR_INVALID_ARGUMENT = 1,
  AXSIM_ERR_INVALID_CONFIG = 2,
  AXSIM_ERR_CHANNEL_UNUSABLE = 3,
  AXSIM_ERR_TABLE = 4,
  AXSIM_ERR_NON_TERMINATING = 5,
  AXSIM_ERR_IO = 6,
} AxsimStatus;

/**
 * Opaque scenario under construction.
 */
typedef struct AxsimScenario AxsimScenario;

/**
 * Scenario metrics, plain old data.
 */
typedef struct AxsimMetrics {
  double goodput_mbps;
  double mean_txop_ms;
  double txop_p95_ms;
  double mean_dl_cycles;
  double goodput_stderr_mbps;
  uint8_t dl_mcs;
  uint8_t ul_mcs;
} AxsimMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * New scenario with default settings. Free with `axsim_scenario_free`.
 */
struct AxsimScenario *axsim_scenario_new(void);

/**
 * # Safety
 * `scenario` must be a pointer from `axsim_scenario_new`, not yet freed.
 */
void axsim_scenario_free(struct AxsimScenario *scenario);

/**
 * Apply one key=value setting (same keys as the CLI flags and config
 * file, e.g. "strategy", "load", "snr", "mcs", "tf-bytes").
 *
 * # Safety
 * `scenario` must be a live handle; `key` and `value` must be
 * NUL-terminated UTF-8 strings.
 */
enum AxsimStatus axsim_scenario_set(struct AxsimScenario *scenario,
                                    const char *key,
                                    const char *value);

/**
 * Load a flat key=value config file into the scenario, overriding any
 * settings already applied.
 *
 * # Safety
 * `scenario` must be a live handle; `path` a NUL-terminated UTF-8 string.
 */
enum AxsimStatus axsim_scenario_load_file(struct AxsimScenario *scenario, const char *path);

/**
 * Run the scenario and fill `out`.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum AxsimStatus axsim_simulate(const struct AxsimScenario *scenario, struct AxsimMetrics *out);

/**
 * Copy the current thread's last error message (NUL-terminated, possibly
 * truncated) into `buf` and return the untruncated length.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null (length query).
 */
size_t axsim_last_error(char *buf, size_t len);

/**
 * Stable name for a status code.
 */
const char *axsim_status_name(enum AxsimStatus status);

/**
 * ABI version; bump on any breaking change to this header.
 */
uint32_t axsim_abi_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AXSIM_H */
