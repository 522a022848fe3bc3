#include "oampump/oampump.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "app/experiments.hpp"
#include "core/dynamics.hpp"
#include "core/multistage.hpp"
#include "core/topology.hpp"

using namespace oampump;

struct oampump_model {
  RiceMeleParams params;
};

struct oampump_trajectory {
  Trajectory traj;
};

namespace {

thread_local std::string last_error;

oampump_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return OAMPUMP_ERR_INVALID_ARGUMENT;
    case ErrorCode::Config: return OAMPUMP_ERR_CONFIG;
    case ErrorCode::GapClosed: return OAMPUMP_ERR_GAP_CLOSED;
    case ErrorCode::EdgeLeak: return OAMPUMP_ERR_EDGE_LEAK;
    case ErrorCode::StepFailure: return OAMPUMP_ERR_STEP_FAILURE;
    case ErrorCode::Unstable: return OAMPUMP_ERR_UNSTABLE;
    case ErrorCode::Unrepresentable: return OAMPUMP_ERR_UNREPRESENTABLE;
  }
  return OAMPUMP_ERR_INTERNAL;
}

oampump_status fail(oampump_status s, const std::string& what) {
  last_error = what;
  return s;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
oampump_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(OAMPUMP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(OAMPUMP_ERR_INTERNAL, e.what());
  }
}

void copy_out(const std::string& text, char* buf, std::size_t len) {
  if (!buf || len == 0) return;
  const std::size_t n = std::min(text.size(), len - 1);
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
}

}  // namespace

extern "C" {

const char* oampump_version(void) { return "1.0.0"; }

const char* oampump_status_name(oampump_status s) {
  switch (s) {
    case OAMPUMP_OK: return "ok";
    case OAMPUMP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case OAMPUMP_ERR_CONFIG: return "config";
    case OAMPUMP_ERR_GAP_CLOSED: return "gap_closed";
    case OAMPUMP_ERR_EDGE_LEAK: return "edge_leak";
    case OAMPUMP_ERR_STEP_FAILURE: return "step_failure";
    case OAMPUMP_ERR_UNSTABLE: return "unstable";
    case OAMPUMP_ERR_UNREPRESENTABLE: return "unrepresentable";
    case OAMPUMP_ERR_IO: return "io";
    case OAMPUMP_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case OAMPUMP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int oampump_exit_code(oampump_status s) {
  switch (s) {
    case OAMPUMP_OK: return 0;
    case OAMPUMP_ERR_INVALID_ARGUMENT:
    case OAMPUMP_ERR_CONFIG:
    case OAMPUMP_ERR_UNREPRESENTABLE:
    case OAMPUMP_ERR_IO:
      return 2;
    default:
      return 3;
  }
}

const char* oampump_last_error(void) { return last_error.c_str(); }

oampump_status oampump_model_create(double j0, double j1, oampump_model** out) {
  return guarded([&] {
    if (!out) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "out is NULL");
    *out = nullptr;
    RiceMeleParams p{j0, j1};
    p.validate();
    *out = new oampump_model{p};
    return OAMPUMP_OK;
  });
}

void oampump_model_destroy(oampump_model* model) { delete model; }

oampump_status oampump_model_bands(const oampump_model* model, double k, double beta0, double beta1,
                                   double* lower, double* upper) {
  return guarded([&] {
    if (!model || !lower || !upper) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "NULL argument");
    const double e = bloch_hamiltonian(k, {beta0, beta1}, model->params).norm();
    *lower = -e;
    *upper = e;
    return OAMPUMP_OK;
  });
}

oampump_status oampump_model_chern(const oampump_model* model, double period, int clockwise, int n_k,
                                   int n_t, int* lower, int* upper) {
  return guarded([&] {
    if (!model || !lower || !upper) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "NULL argument");
    const PumpSchedule s = default_pump_loop(model->params, period,
                                             clockwise ? Orientation::Clockwise : Orientation::Counterclockwise);
    *lower = chern_number(s, model->params, Band::Lower, n_k, n_t);
    *upper = chern_number(s, model->params, Band::Upper, n_k, n_t);
    return OAMPUMP_OK;
  });
}

oampump_status oampump_pump_run(const oampump_model* model, double period, double cycles, int l0,
                                oampump_band band, double dt, oampump_trajectory** out) {
  return guarded([&] {
    if (!model || !out) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "NULL argument");
    *out = nullptr;
    if (l0 % 2 != 0) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "l0 must be even");
    if (!(cycles >= 0.0) || !(dt > 0.0) || !(period > 0.0))
      return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "period, cycles and dt must be positive");
    PumpProblem pr;
    pr.params = model->params;
    pr.schedule = default_pump_loop(model->params, period, Orientation::Clockwise, cycles);
    const int n = std::max(42, 2 * (2 * static_cast<int>(std::ceil(cycles)) + 16));
    const LatticeConfig lat = LatticeConfig::centered(l0, n);
    const Band b = band == OAMPUMP_BAND_UPPER ? Band::Upper : Band::Lower;
    std::vector<double> times = uniform_times(0.0, cycles * period, dt);
    for (int m = 1; m <= static_cast<int>(std::floor(2 * cycles + 1e-9)); ++m) times.push_back(0.5 * m * period);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(), [](double a, double c) { return c - a < 1e-9; }),
                times.end());
    auto* t = new oampump_trajectory{evolve(wannier_state(lat, model->params, {0, 0}, b, l0 / 2), pr, times)};
    *out = t;
    return OAMPUMP_OK;
  });
}

void oampump_trajectory_destroy(oampump_trajectory* traj) { delete traj; }

size_t oampump_trajectory_samples(const oampump_trajectory* traj) { return traj ? traj->traj.size() : 0; }

oampump_status oampump_trajectory_sample(const oampump_trajectory* traj, size_t index, double* time,
                                         double* mean_l) {
  return guarded([&] {
    if (!traj || !time || !mean_l) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "NULL argument");
    if (index >= traj->traj.size()) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "sample index out of range");
    *time = traj->traj.times[index];
    *mean_l = traj->traj.mean_l[index];
    return OAMPUMP_OK;
  });
}

oampump_status oampump_trajectory_probability(const oampump_trajectory* traj, size_t index, int l,
                                              double* p) {
  return guarded([&] {
    if (!traj || !p) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "NULL argument");
    if (index >= traj->traj.size()) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "sample index out of range");
    const auto i = traj->traj.lattice.index_of(l);
    *p = i ? traj->traj.probabilities[index][*i] : 0.0;
    return OAMPUMP_OK;
  });
}

oampump_status oampump_plan_switch(long long delta_l, int base, int stages, int balanced, int* digits,
                                   size_t capacity, size_t* count, double* total_periods) {
  return guarded([&] {
    if (!count) return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "count is NULL");
    const StagePlan plan =
        plan_switch(delta_l, base, stages, balanced ? DigitMode::Balanced : DigitMode::Unsigned);
    *count = plan.digits.size();
    if (total_periods) *total_periods = plan.total_periods();
    if (plan.digits.size() > capacity || (!digits && !plan.digits.empty()))
      return fail(OAMPUMP_ERR_BUFFER_TOO_SMALL, "digit buffer holds fewer entries than stages");
    for (std::size_t i = 0; i < plan.digits.size(); ++i) digits[i] = plan.digits[i];
    return OAMPUMP_OK;
  });
}

oampump_status oampump_run_experiment(const char* experiment, const char* config_json, const char* out_dir,
                                      const uint64_t* seed, char* summary, size_t len) {
  const oampump_status s = guarded([&] {
    if (!experiment || !config_json || !out_dir)
      return fail(OAMPUMP_ERR_INVALID_ARGUMENT, "experiment, config and output directory are required");
    const app::json cfg = app::parse_config(config_json);
    std::optional<std::uint64_t> sd;
    if (seed) sd = *seed;
    const app::ExperimentOutput out = app::run_experiment(experiment, cfg, sd);
    try {
      app::write_output(out, out_dir);
    } catch (const Error& e) {
      return fail(OAMPUMP_ERR_IO, e.what());
    }
    copy_out(out.summary.dump(2), summary, len);
    return OAMPUMP_OK;
  });
  if (s != OAMPUMP_OK) {
    const app::json err = {{"error",
                            {{"code", oampump_status_name(s)},
                             {"exit_code", oampump_exit_code(s)},
                             {"message", last_error}}}};
    copy_out(err.dump(), summary, len);
  }
  return s;
}

}  // extern "C"
