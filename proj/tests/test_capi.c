/* Exercises the shared library through its C header only. */

#include "sprintsim/sprintsim.h"

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;
static int checks = 0;

#define CHECK(cond)                                                                 \
    do                                                                              \
    {                                                                               \
        ++checks;                                                                   \
        if (!(cond))                                                                \
        {                                                                           \
            ++failures;                                                             \
            fprintf(stderr, "%s:%d: CHECK(%s) failed; last error: %s\n", __FILE__, \
                    __LINE__, #cond, sps_last_error());                             \
        }                                                                           \
    } while (0)

static size_t count_lines(const char *s)
{
    size_t n = 0;
    for (; *s; ++s)
    {
        n += *s == '\n';
    }
    return n;
}

static void test_status_names(void)
{
    CHECK(strcmp(sps_status_name(SPS_OK), "OK") == 0);
    CHECK(strcmp(sps_status_name(SPS_SPECIALIST_MISMATCH), "SPECIALIST_MISMATCH") == 0);
    CHECK(strcmp(sps_status_name(SPS_INVALID_ARGUMENT), "INVALID_ARGUMENT") == 0);
    CHECK(strlen(sps_version()) > 0);
}

static void test_config(void)
{
    char *config = NULL;
    CHECK(sps_default_config(&config) == SPS_OK);
    CHECK(config && strstr(config, "\"progress_wheel\"") != NULL);

    char *report = NULL;
    CHECK(sps_validate_config(config, &report) == SPS_OK);
    CHECK(report && strstr(report, "\"violations\":[]") != NULL);
    sps_string_free(report);

    report = NULL;
    CHECK(sps_validate_config("{\"team_size\":0}", &report) == SPS_VALIDATION_ERROR);
    CHECK(report && strstr(report, "team_size") != NULL);
    sps_string_free(report);

    report = NULL;
    CHECK(sps_validate_config("not json", &report) == SPS_VALIDATION_ERROR);
    sps_string_free(report);
    sps_string_free(config);

    CHECK(sps_default_config(NULL) == SPS_INVALID_ARGUMENT);
}

static char *default_config(void)
{
    char *config = NULL;
    if (sps_default_config(&config) != SPS_OK)
    {
        fprintf(stderr, "no default config: %s\n", sps_last_error());
        exit(1);
    }
    return config;
}

static void test_session(void)
{
    char *config = default_config();
    sps_session *s = NULL;
    CHECK(sps_session_create(NULL, &s) == SPS_INVALID_ARGUMENT);
    CHECK(sps_session_create(config, &s) == SPS_OK);
    CHECK(s != NULL);

    int64_t version = -1;
    CHECK(sps_session_command(s, "T1", "{\"type\":\"PlanCommit\",\"stories\":[\"S1\",\"S2\"]}", -1, &version) == SPS_OK);
    CHECK(version == 1);
    CHECK(sps_session_command(s, "T1", "{\"type\":\"PlanCommit\",\"stories\":[\"S4\"]}", -1, &version) == SPS_DEPENDENCY_ERROR);
    CHECK(strlen(sps_last_error()) > 0);
    CHECK(sps_session_command(s, "T1", "{\"type\":\"SetOvertime\",\"member\":1,\"hours_ticks\":5}", -1, &version) == SPS_OVERTIME_CAP);
    CHECK(sps_session_command(s, "T1", "{\"type\":\"CloseScrum\"}", 0, &version) == SPS_VERSION_CONFLICT);
    CHECK(sps_session_command(s, "T9", "{\"type\":\"CloseScrum\"}", -1, &version) == SPS_NOT_FOUND);
    CHECK(sps_session_command(s, "T1", "{\"type\":\"Dance\"}", -1, &version) == SPS_VALIDATION_ERROR);

    char *out = NULL;
    CHECK(sps_session_spin(s, 0, 1, &out) == SPS_PHASE_ERROR);
    CHECK(sps_session_command(s, "T1", "{\"type\":\"CloseScrum\"}", 1, &version) == SPS_OK);
    /* The default config has two teams; the gate opens once both have closed. */
    CHECK(sps_session_spin(s, 0, 1, &out) == SPS_PHASE_ERROR);
    CHECK(sps_session_command(s, "T2", "{\"type\":\"CloseScrum\"}", 2, &version) == SPS_OK);
    CHECK(sps_session_spin(s, 0, 1, &out) == SPS_OK);
    CHECK(out && strstr(out, "\"draws\"") != NULL);
    sps_string_free(out);
    CHECK(sps_session_version(s, &version) == SPS_OK);
    CHECK(version == 4);
    CHECK(sps_session_note(s, "remark") == SPS_OK);
    CHECK(sps_session_version(s, &version) == SPS_OK);
    CHECK(version == 4);

    CHECK(sps_session_autoplay(s, "greedy-value") == SPS_OK);
    CHECK(sps_session_autoplay(s, "nonsense") == SPS_USAGE_ERROR);

    char *state = NULL;
    CHECK(sps_session_state(s, &state) == SPS_OK);
    CHECK(state && strstr(state, "\"phase\":\"Finished\"") != NULL);

    char *metrics = NULL;
    CHECK(sps_session_metrics(s, &metrics) == SPS_OK);
    CHECK(metrics && strstr(metrics, "\"leaderboard\"") != NULL);
    sps_string_free(metrics);

    char *log = NULL;
    CHECK(sps_session_export(s, "jsonl", &log) == SPS_OK);
    char *again = NULL;
    CHECK(sps_session_export(s, "jsonl", &again) == SPS_OK);
    CHECK(log && again && strcmp(log, again) == 0);
    sps_string_free(again);
    CHECK(sps_session_export(s, "yaml", &again) == SPS_FORMAT_ERROR);

    char *plot = NULL;
    CHECK(sps_session_plot(s, "ideal", NULL, &plot) == SPS_OK);
    CHECK(plot && count_lines(plot) == 12);
    sps_string_free(plot);

    char *replayed = NULL;
    CHECK(sps_replay(config, log, &replayed) == SPS_OK);
    CHECK(replayed && state && strcmp(replayed, state) == 0);
    sps_string_free(replayed);

    /* Flip one character inside the first record's payload. */
    char *p = strstr(log, "session_created");
    CHECK(p != NULL);
    if (p)
    {
        p[0] = 'S';
        replayed = NULL;
        CHECK(sps_replay(config, log, &replayed) == SPS_INTEGRITY_ERROR);
        CHECK(strstr(sps_last_error(), "seq 1") != NULL);
    }

    sps_string_free(config);
    sps_string_free(state);
    sps_string_free(log);
    sps_session_destroy(s);
    sps_session_destroy(NULL);

    CHECK(sps_session_create("{\"team_count\":0}", &s) == SPS_VALIDATION_ERROR);
}

static void test_calibration(void)
{
    char *out = NULL;
    CHECK(sps_calibrate_wheel(5.4, 2.9, 20, NULL, 0, 0.05, &out) == SPS_OK);
    CHECK(out && strstr(out, "\"slots\"") != NULL);
    sps_string_free(out);

    const int64_t values[] = {6};
    out = NULL;
    CHECK(sps_calibrate_wheel(6.0, 0.0, 1, values, 1, 0.05, &out) == SPS_OK);
    CHECK(out && strstr(out, "\"value\":12") != NULL);
    sps_string_free(out);

    CHECK(sps_calibrate_wheel(100.0, 0.0, 5, NULL, 0, 0.05, &out) == SPS_NO_SOLUTION);
}

static void test_batch(void)
{
    char *config = default_config();
    char *rows = NULL;
    char *aggregates = NULL;
    CHECK(sps_run_batch(config, "greedy-value", 20, 1, 2, &rows, &aggregates) == SPS_OK);
    CHECK(rows && count_lines(rows) == 21);
    CHECK(aggregates && strstr(aggregates, "mean") != NULL);
    char *rows2 = NULL;
    CHECK(sps_run_batch(config, "greedy-value", 20, 1, 4, &rows2, NULL) == SPS_OK);
    CHECK(rows && rows2 && strcmp(rows, rows2) == 0);
    sps_string_free(rows);
    sps_string_free(rows2);
    sps_string_free(aggregates);

    char *hist = NULL;
    CHECK(sps_batch_histogram(config, "random", 30, 5, "cost_hours", 6, &hist) == SPS_OK);
    CHECK(hist && count_lines(hist) == 7);
    sps_string_free(hist);
    sps_string_free(config);
}

static void test_service(void)
{
    char *config = default_config();
    sps_service *svc = NULL;
    CHECK(sps_service_open(NULL, &svc) == SPS_OK);
    char *created = NULL;
    CHECK(sps_service_create_session(svc, config, &created) == SPS_OK);
    CHECK(created && strstr(created, "\"facilitator_token\"") != NULL);
    sps_string_free(created);
    char *ids = NULL;
    CHECK(sps_service_sessions(svc, &ids) == SPS_OK);
    CHECK(ids && ids[0] == '[' && strstr(ids, "\"s-") != NULL);
    sps_string_free(ids);

    sps_server *server = NULL;
    int port = 0;
    CHECK(sps_server_start(svc, "127.0.0.1", 0, &server, &port) == SPS_OK);
    CHECK(port > 0);
    sps_server_stop(server);
    sps_service_close(svc);
    sps_string_free(config);
}

int main(void)
{
    test_status_names();
    test_config();
    test_session();
    test_calibration();
    test_batch();
    test_service();
    printf("%d checks, %d failures\n", checks, failures);
    return failures == 0 ? 0 : 1;
}
