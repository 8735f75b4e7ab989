/* C interface for the respn simulation library. */

#ifndef RESPN_H
#define RESPN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by fallible functions.
 */
typedef enum RespnStatus {
  RespnStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  RespnStatus_NullArgument = 1,
  /**
   * Input text was not valid UTF-8.
   */
  RespnStatus_InvalidUtf8 = 2,
  /**
   * Document syntax or schema error; see `respn_last_error`.
   */
  RespnStatus_ParseError = 3,
  /**
   * The model failed validation; see `respn_last_error`.
   */
  RespnStatus_InvalidModel = 4,
  /**
   * The simulation rejected its configuration.
   */
  RespnStatus_SimError = 5,
  /**
   * Serialization failed.
   */
  RespnStatus_SerializeError = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  RespnStatus_Panic = 7,
} RespnStatus;

/**
 * Opaque net handle.
 */
typedef struct RespnNet RespnNet;

/**
 * Opaque trace handle.
 */
typedef struct RespnTrace RespnTrace;

/**
 * Simulation parameters for `respn_simulate`.
 */
typedef struct RespnSimParams {
  uint64_t seed;
  double max_time;
  double trajectory_sample_interval;
  uint64_t max_events;
} RespnSimParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread; never free it.
 */
const char *respn_last_error(void);

/**
 * Parses a net document (see docs/pnet-format.md) into a handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to a handle slot.
 */
enum RespnStatus respn_net_parse(const char *text, struct RespnNet **out);

/**
 * Canonical document text for the net; free with `respn_string_free`.
 * Returns null on error.
 */
char *respn_net_serialize(const struct RespnNet *net);

/**
 * Validates the net; `report_json` (optional) receives the full report.
 * Returns `Ok` when valid, `InvalidModel` otherwise.
 */
enum RespnStatus respn_net_validate(const struct RespnNet *net, char **report_json);

void respn_net_free(struct RespnNet *net);

/**
 * Default simulation parameters: seed 0, horizon 1e6, unit sampling.
 */
struct RespnSimParams respn_sim_params_default(void);

/**
 * Runs one deterministic simulation of the net.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum RespnStatus respn_simulate(const struct RespnNet *net,
                                struct RespnSimParams params,
                                struct RespnTrace **out);

/**
 * Outcome code: 0 success, 1 timeout, 2 deadlock, 3 resource failure,
 * -1 null handle.
 */
int32_t respn_trace_outcome(const struct RespnTrace *trace);

double respn_trace_final_time(const struct RespnTrace *trace);

uint64_t respn_trace_event_count(const struct RespnTrace *trace);

/**
 * Final level of the named resource; NaN when absent.
 *
 * # Safety
 * `resource` must be a valid NUL-terminated string.
 */
double respn_trace_resource_level(const struct RespnTrace *trace, const char *resource);

/**
 * Final token count of the named place; -1 when absent.
 *
 * # Safety
 * `place` must be a valid NUL-terminated string.
 */
int64_t respn_trace_token_count(const struct RespnTrace *trace, const char *place);

char *respn_trace_events_csv(const struct RespnTrace *trace);

char *respn_trace_trajectories_csv(const struct RespnTrace *trace);

char *respn_trace_timeline_svg(const struct RespnTrace *trace);

/**
 * Full trace as JSON (events, trajectory, outcome, final state).
 */
char *respn_trace_json(const struct RespnTrace *trace);

void respn_trace_free(struct RespnTrace *trace);

/**
 * `1 - (1 - p)^k`; returns -1.0 for out-of-range arguments.
 */
double respn_device_availability(double p, uint32_t k);

/**
 * Mission availability for an availability-model JSON document.
 *
 * # Safety
 * `model_json` must be a valid NUL-terminated string, `out` a valid f64
 * pointer.
 */
enum RespnStatus respn_mission_availability(const char *model_json, double *out);

/**
 * Frees a string returned by this library.
 */
void respn_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESPN_H */
