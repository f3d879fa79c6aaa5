#ifndef SPRINTSIM_H
#define SPRINTSIM_H

/*
 * C interface to the sprint simulator.
 *
 * Documents cross the boundary as UTF-8 JSON (or CSV / JSON lines for
 * exports). Strings returned through `char **out` parameters are owned by the
 * caller and released with sps_string_free. Every call returns a status; on
 * failure sps_last_error() describes the problem for the calling thread.
 * Effort values in JSON documents are integer half-hour ticks.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SPS_API __declspec(dllexport)
#else
#define SPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sps_status
{
    SPS_OK = 0,
    SPS_VALIDATION_ERROR = 1,
    SPS_CONFIGURATION_ERROR = 2,
    SPS_PHASE_ERROR = 3,
    SPS_SPECIALIST_MISMATCH = 4,
    SPS_LIFECYCLE_ERROR = 5,
    SPS_OVERTIME_CAP = 6,
    SPS_DEPENDENCY_ERROR = 7,
    SPS_ABSENT = 8,
    SPS_NOT_FOUND = 9,
    SPS_INTEGRITY_ERROR = 10,
    SPS_AUTH_ERROR = 11,
    SPS_FORMAT_ERROR = 12,
    SPS_VERSION_CONFLICT = 13,
    SPS_NO_SOLUTION = 14,
    SPS_USAGE_ERROR = 15,
    SPS_IO_ERROR = 16,
    SPS_INTERNAL_ERROR = 17,
    SPS_INVALID_ARGUMENT = 18
} sps_status;

typedef struct sps_session sps_session;
typedef struct sps_service sps_service;
typedef struct sps_server sps_server;

SPS_API const char *sps_version(void);
SPS_API const char *sps_status_name(sps_status status);
/* Message of the last failed call on this thread; "" after a success. */
SPS_API const char *sps_last_error(void);
SPS_API void sps_string_free(char *s);

/* Configuration */
SPS_API sps_status sps_default_config(char **out_json);
/* Writes {"violations":[{field,rule}],"warnings":[...]}; returns
   SPS_VALIDATION_ERROR when there is at least one violation. */
SPS_API sps_status sps_validate_config(const char *config_json, char **out_report);

/* In-process sessions (no persistence) */
SPS_API sps_status sps_session_create(const char *config_json, sps_session **out);
SPS_API void sps_session_destroy(sps_session *session);
/* expected_version < 0 skips the optimistic version check. */
SPS_API sps_status sps_session_command(sps_session *session, const char *team_id, const char *command_json,
                                       int64_t expected_version, int64_t *out_version);
/* expected_day <= 0 skips the repeated-spin guard. Writes the drawn bundle
   and the per-team outcomes. */
SPS_API sps_status sps_session_spin(sps_session *session, int override_gate, int expected_day, char **out_json);
SPS_API sps_status sps_session_close_sprint(sps_session *session, int64_t *out_version);
SPS_API sps_status sps_session_note(sps_session *session, const char *text);
SPS_API sps_status sps_session_version(const sps_session *session, int64_t *out_version);
SPS_API sps_status sps_session_state(const sps_session *session, char **out_json);
SPS_API sps_status sps_session_metrics(const sps_session *session, char **out_json);
/* format: jsonl, csv, burndown-csv, leaderboard-csv */
SPS_API sps_status sps_session_export(const sps_session *session, const char *format, char **out);
/* what: burndown, ideal, leaderboard; team_id may be NULL for the first team. */
SPS_API sps_status sps_session_plot(const sps_session *session, const char *what, const char *team_id, char **out_csv);
/* Plays the whole session with a policy bot for every team. */
SPS_API sps_status sps_session_autoplay(sps_session *session, const char *policy);

/* Verifies a JSON-lines log against its config and writes the rebuilt state. */
SPS_API sps_status sps_replay(const char *config_json, const char *log_jsonl, char **out_state_json);

/* Calibration in hours. `values` lists the allowed slot values (NULL/0 for
   0..12). Writes {"progress_wheel":{"slots":[...ticks...]},"mean_hours",
   "sd_hours","values_hours"}. */
SPS_API sps_status sps_calibrate_wheel(double mean_hours, double sd_hours, int slots, const int64_t *values,
                                       size_t value_count, double tolerance_hours, char **out_json);

/* Batch runs; threads = 0 uses every core. out_aggregates may be NULL. */
SPS_API sps_status sps_run_batch(const char *config_json, const char *policy, int runs, uint64_t base_seed,
                                 unsigned threads, char **out_rows_csv, char **out_aggregates_csv);
SPS_API sps_status sps_batch_histogram(const char *config_json, const char *policy, int runs, uint64_t base_seed,
                                       const char *metric, int bins, char **out_csv);

/* Session service with optional persistence (data_dir may be NULL). */
SPS_API sps_status sps_service_open(const char *data_dir, sps_service **out);
SPS_API void sps_service_close(sps_service *service);
/* Writes {"id","facilitator_token","team_token","warnings","version"}. */
SPS_API sps_status sps_service_create_session(sps_service *service, const char *config_json, char **out_json);
/* Writes a JSON array of session ids. */
SPS_API sps_status sps_service_sessions(const sps_service *service, char **out_json);

/* HTTP front end. port 0 binds a free port; *out_port receives it. */
SPS_API sps_status sps_server_start(sps_service *service, const char *host, int port, sps_server **out, int *out_port);
SPS_API void sps_server_stop(sps_server *server);
/* Blocks serving until the process is interrupted. */
SPS_API sps_status sps_serve(const char *host, int port, const char *data_dir);

#ifdef __cplusplus
}
#endif

#endif
