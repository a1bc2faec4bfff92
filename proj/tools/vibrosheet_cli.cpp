// Command-line front end. Links only the public C API so it exercises the
// same surface as external callers. Exit codes: 0 success, 1 usage or
// config error, 2 numerical failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include <CLI11.hpp>

#include <vibrosheet/vibrosheet.h>

namespace {

int exit_code(vs_status st) {
  if (st == VS_OK) return 0;
  if (st == VS_ERR_NUMERIC) return 2;
  return 1;
}

int fail_with(vs_status st) {
  std::fprintf(stderr, "error: %s\n", vs_last_error());
  return exit_code(st);
}

// %.6g everywhere so command output diffs are stable across runs.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void print_optimum(const char* name, const vs_optimum& o) {
  if (!o.valid) {
    std::printf("%s: none (no eligible runs)\n", name);
    return;
  }
  std::printf("%s: %s at freq=%s phase=%s duty_left=%s duty_right=%s battery=%s\n",
              name, num(o.value).c_str(), num(o.pattern.freq_hz).c_str(),
              num(o.pattern.phase_deg).c_str(), num(o.pattern.duty_left).c_str(),
              num(o.pattern.duty_right).c_str(), o.battery_pos);
}

int default_workers() {
  const char* env = std::getenv("VIBROSHEET_WORKERS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (end == env || *end || n < 1) {
    std::fprintf(stderr, "error: VIBROSHEET_WORKERS must be a positive integer\n");
    std::exit(1);
  }
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vibration-driven sheet robot simulator"};
  app.require_subcommand(1);

  // simulate: flags override built-in defaults; the config file supplies the
  // robot only (flags > file > defaults).
  auto* sim = app.add_subcommand("simulate", "run one actuation pattern");
  std::string sim_config, sim_out;
  vs_pattern pattern;
  vs_pattern_init(&pattern);
  vs_sim_options opt;
  vs_sim_options_init(&opt);
  sim->add_option("--config", sim_config, "robot config JSON")->required();
  sim->add_option("--freq", pattern.freq_hz, "drive frequency, Hz");
  sim->add_option("--phase", pattern.phase_deg, "right channel phase lag, deg");
  sim->add_option("--duty-left", pattern.duty_left, "left duty ratio 0..1");
  sim->add_option("--duty-right", pattern.duty_right, "right duty ratio 0..1");
  sim->add_option("--v-high", pattern.v_high, "drive voltage, V");
  sim->add_option("--dt", opt.dt, "integrator step, s");
  sim->add_option("--gravity", opt.gravity, "m/s^2");
  sim->add_option("--transient", opt.transient_s, "settling window, s");
  sim->add_option("--measure", opt.measure_s, "measurement window, s");
  sim->add_option("--out", sim_out, "trajectory CSV path");

  auto* val = app.add_subcommand("validate", "check a robot config");
  std::string val_config;
  val->add_option("--config", val_config, "robot config JSON")->required();

  auto* swp = app.add_subcommand("sweep", "run a pattern grid sweep");
  std::string swp_spec, swp_out;
  int swp_workers = default_workers();
  bool swp_resume = false;
  swp->add_option("--spec", swp_spec, "sweep spec JSON")->required();
  swp->add_option("--out", swp_out, "output directory")->required();
  swp->add_option("--workers", swp_workers,
                  "worker threads (default: VIBROSHEET_WORKERS or spec)");
  swp->add_flag("--resume", swp_resume, "reuse journaled results");

  auto* cmp = app.add_subcommand("compare", "sim vs experiment error maps");
  std::string cmp_sim, cmp_exp, cmp_out;
  double cmp_bin = 0.25;
  cmp->add_option("--sim", cmp_sim, "sweep result CSV")->required();
  cmp->add_option("--exp", cmp_exp, "experiment CSV (cm/s)")->required();
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp->add_option("--bin-width", cmp_bin, "RMSE histogram bin width, cm/s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage problems are exit 1 per the contract; --help stays 0
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*val) {
    char buf[4096];
    int n = vs_validate_file(val_config.c_str(), buf, sizeof(buf));
    if (n < 0) {
      std::fprintf(stderr, "error: %s\n", vs_last_error());
      return 1;
    }
    if (n == 0) {
      std::printf("ok\n");
      return 0;
    }
    std::printf("%s\n", buf);
    return 1;
  }

  if (*sim) {
    vs_robot* robot = nullptr;
    vs_status st = vs_robot_load_file(sim_config.c_str(), &robot);
    if (st != VS_OK) return fail_with(st);
    vs_trajectory* traj = nullptr;
    st = vs_simulate(robot, &pattern, &opt, &traj);
    if (st != VS_OK) {
      vs_robot_free(robot);
      return fail_with(st);
    }
    vs_summary s;
    st = vs_trajectory_summary(traj, &pattern, &opt, vs_robot_total_mass(robot), &s);
    if (st == VS_OK && !sim_out.empty())
      st = vs_trajectory_save_csv(traj, sim_out.c_str());
    vs_trajectory_free(traj);
    vs_robot_free(robot);
    if (st != VS_OK) return fail_with(st);
    std::printf("velocity_mps=%s power_w=%s efficiency_cmspw=%s cot=%s\n",
                num(s.velocity_mps).c_str(), num(s.power_w).c_str(),
                num(s.efficiency_cmspw).c_str(), num(s.cot).c_str());
    return 0;
  }

  if (*swp) {
    vs_sweep_report report;
    vs_status st = vs_sweep_run(swp_spec.c_str(), swp_out.c_str(), swp_workers,
                                swp_resume ? 1 : 0, &report);
    if (st != VS_OK) return fail_with(st);
    std::printf("runs=%d failed=%d\n", report.n_records, report.n_failed);
    print_optimum("max velocity left", report.max_velocity_left);
    print_optimum("max velocity right", report.max_velocity_right);
    print_optimum("max efficiency", report.max_efficiency);
    print_optimum("min cot", report.min_cot);
    return 0;
  }

  if (*cmp) {
    int n_groups = 0;
    vs_status st = vs_compare_run(cmp_sim.c_str(), cmp_exp.c_str(),
                                  cmp_out.c_str(), cmp_bin, &n_groups);
    if (st != VS_OK) return fail_with(st);
    std::printf("groups=%d\n", n_groups);
    return 0;
  }

  return 1;
}
