#ifndef DRIVEGYM_C_API_H
#define DRIVEGYM_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. dg_last_error() holds the message of the last failure on the
   calling thread. */
enum {
    DG_OK = 0,
    DG_CONFIG_ERROR = 1,
    DG_NUMERICAL_ERROR = 2,
    DG_USAGE_ERROR = 3,
    DG_INVALID_HANDLE = 4,
    DG_BUFFER_TOO_SMALL = 5,
    DG_INPUT_ERROR = 6
};

typedef int64_t dg_handle;

/* id: "<motor>-<cont|disc>-v0" or NULL; config_json: JSON object or NULL.
   Returns a positive handle, or 0 on failure. */
dg_handle dg_make(const char* id, const char* config_json);
/* Closing an unknown or already closed handle does nothing. */
void dg_close(dg_handle h);

const char* dg_last_error(void);

size_t dg_observation_size(dg_handle h);
/* 0 = discrete, 1 = continuous, -1 for an invalid handle. */
int dg_action_mode(dg_handle h);
int dg_action_cardinality(dg_handle h);
size_t dg_action_channels(dg_handle h);
double dg_action_low(dg_handle h);
double dg_action_high(dg_handle h);

/* Observations are copied into obs (capacity in doubles). */
int dg_reset(dg_handle h, int has_seed, uint64_t seed, double* obs, size_t capacity);

/* violated_entry receives the violating entry index or -1; any output
   pointer except obs may be NULL. */
int dg_step_continuous(dg_handle h, const double* duty, size_t n, double* obs, size_t capacity, double* reward,
                       int* done, int* violated_entry);
int dg_step_discrete(dg_handle h, int command, double* obs, size_t capacity, double* reward, int* done,
                     int* violated_entry);

#ifdef __cplusplus
}
#endif

#endif
