/* vibrosheet: planar dynamics simulator and actuation-pattern optimizer for
 * multi-actuator piezoelectric sheet robots.
 *
 * C API over the C++ core. All handles are opaque; every function returns a
 * vs_status and a thread-local message for the last failure is available via
 * vs_last_error(). */
#ifndef VIBROSHEET_H
#define VIBROSHEET_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vs_status {
  VS_OK = 0,
  VS_ERR_INVALID = 1, /* bad config, bad arguments, parse errors */
  VS_ERR_NUMERIC = 2, /* simulation blew up */
  VS_ERR_IO = 3,
  VS_ERR_INTERNAL = 4,
} vs_status;

const char* vs_version(void);
/* Message for the most recent failure on this thread ("" if none). */
const char* vs_last_error(void);

/* ---- robot model ---- */

typedef struct vs_robot vs_robot;

vs_status vs_robot_load_file(const char* path, vs_robot** out);
vs_status vs_robot_load_json(const char* json_text, vs_robot** out);
void vs_robot_free(vs_robot* robot);

int vs_robot_link_count(const vs_robot* robot);
int vs_robot_joint_count(const vs_robot* robot);
double vs_robot_total_mass(const vs_robot* robot);

/* Validates without compiling. Returns the number of violations (0 = valid,
 * -1 = file/parse error); writes them newline-separated into buf. */
int vs_validate_file(const char* path, char* buf, size_t buflen);

/* ---- actuation pattern and simulation options ---- */

typedef struct vs_pattern {
  double freq_hz;
  double phase_deg; /* right channel lags left by this rising-edge offset */
  double duty_left;
  double duty_right;
  double v_high;
  double rise_time_s;
  double fall_time_s;
} vs_pattern;

typedef struct vs_sim_options {
  double dt;
  double gravity;
  double transient_s;
  double measure_s;
  int sample_stride;
  double contact_stiffness;
  double contact_damping;
  double friction;
  double stiction_velocity;
  double power_quiescent_w;
  double power_per_duty_w;
} vs_sim_options;

void vs_pattern_init(vs_pattern* pattern);
void vs_sim_options_init(vs_sim_options* options);

/* Drive voltage for one channel at time t (channel: 0 = left, 1 = right). */
vs_status vs_pattern_voltage(const vs_pattern* pattern, int channel, double t,
                             double* out);

/* ---- simulation ---- */

typedef struct vs_trajectory vs_trajectory;

typedef struct vs_summary {
  double velocity_mps; /* leftward positive */
  double power_w;
  double efficiency_cmspw; /* NaN when power is zero */
  double cot;              /* NaN when velocity is zero */
} vs_summary;

vs_status vs_simulate(const vs_robot* robot, const vs_pattern* pattern,
                      const vs_sim_options* options, vs_trajectory** out);
vs_status vs_trajectory_summary(const vs_trajectory* traj,
                                const vs_pattern* pattern,
                                const vs_sim_options* options,
                                double robot_mass, vs_summary* out);
vs_status vs_trajectory_save_csv(const vs_trajectory* traj, const char* path);
void vs_trajectory_free(vs_trajectory* traj);

/* ---- sweep ---- */

typedef struct vs_optimum {
  vs_pattern pattern;
  char battery_pos[16];
  double value;
  int valid; /* 0 when no eligible record existed */
} vs_optimum;

typedef struct vs_sweep_report {
  vs_optimum max_velocity_left;
  vs_optimum max_velocity_right;
  vs_optimum max_efficiency;
  vs_optimum min_cot;
  int n_records;
  int n_failed;
} vs_sweep_report;

/* Runs the sweep described by the JSON spec file, writing result.csv,
 * journal.csv and manifest.json into out_dir. workers <= 0 uses the spec
 * value. resume != 0 skips records already journaled for this spec. */
vs_status vs_sweep_run(const char* spec_path, const char* out_dir, int workers,
                       int resume, vs_sweep_report* report);

/* ---- compare ---- */

/* Computes per-(frequency, phase) RMSE/PCC maps between a sweep result CSV
 * and an experiment CSV (cm/s), writing error_map.csv, rmse_histogram.csv
 * and manifest.json into out_dir. */
vs_status vs_compare_run(const char* sim_csv, const char* exp_csv,
                         const char* out_dir, double hist_bin_width_cms,
                         int* n_groups);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* VIBROSHEET_H */
