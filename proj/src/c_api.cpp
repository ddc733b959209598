#include "ibvs/ibvs.h"

#include <cmath>
#include <exception>
#include <new>
#include <string>

#include "ibvs/harness.hpp"

struct ibvs_scenario {
  ibvs::Scenario scenario;
};

struct ibvs_run {
  ibvs::RunResult result;
};

namespace {

thread_local std::string last_error;

ibvs_status status_of(ibvs::ErrorCode code) {
  using ibvs::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return IBVS_ERR_INVALID_ARGUMENT;
    case ErrorCode::CameraInsideSphere: return IBVS_ERR_CAMERA_INSIDE_SPHERE;
    case ErrorCode::BehindCamera: return IBVS_ERR_BEHIND_CAMERA;
    case ErrorCode::DegenerateNormal: return IBVS_ERR_DEGENERATE_NORMAL;
    case ErrorCode::ZeroObservedDiameter: return IBVS_ERR_ZERO_OBSERVED_DIAMETER;
    case ErrorCode::NotInView: return IBVS_ERR_NOT_IN_VIEW;
    case ErrorCode::SingularInteraction: return IBVS_ERR_SINGULAR_INTERACTION;
    case ErrorCode::EmptyMask: return IBVS_ERR_EMPTY_MASK;
    case ErrorCode::NoBoundary: return IBVS_ERR_NO_BOUNDARY;
    case ErrorCode::TooFewPoints: return IBVS_ERR_TOO_FEW_POINTS;
    case ErrorCode::NoConsensus: return IBVS_ERR_NO_CONSENSUS;
    case ErrorCode::ConfigError: return IBVS_ERR_CONFIG;
    case ErrorCode::IoError: return IBVS_ERR_IO;
  }
  return IBVS_ERR_INTERNAL;
}

ibvs_status fail(ibvs_status status, const char* what) {
  last_error = what;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
ibvs_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return IBVS_OK;
  } catch (const ibvs::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(IBVS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(IBVS_ERR_INTERNAL, e.what());
  }
}

ibvs_status null_argument() { return fail(IBVS_ERR_INVALID_ARGUMENT, "null argument"); }

}  // namespace

extern "C" {

const char* ibvs_version(void) { return "0.1.0"; }

const char* ibvs_status_string(ibvs_status status) {
  switch (status) {
    case IBVS_OK: return "OK";
    case IBVS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case IBVS_ERR_CAMERA_INSIDE_SPHERE: return "CameraInsideSphere";
    case IBVS_ERR_BEHIND_CAMERA: return "BehindCamera";
    case IBVS_ERR_DEGENERATE_NORMAL: return "DegenerateNormal";
    case IBVS_ERR_ZERO_OBSERVED_DIAMETER: return "ZeroObservedDiameter";
    case IBVS_ERR_NOT_IN_VIEW: return "NotInView";
    case IBVS_ERR_SINGULAR_INTERACTION: return "SingularInteraction";
    case IBVS_ERR_EMPTY_MASK: return "EmptyMask";
    case IBVS_ERR_NO_BOUNDARY: return "NoBoundary";
    case IBVS_ERR_TOO_FEW_POINTS: return "TooFewPoints";
    case IBVS_ERR_NO_CONSENSUS: return "NoConsensus";
    case IBVS_ERR_CONFIG: return "ConfigError";
    case IBVS_ERR_IO: return "IoError";
    case IBVS_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* ibvs_last_error(void) { return last_error.c_str(); }

const char* ibvs_outcome_string(ibvs_outcome outcome) {
  switch (outcome) {
    case IBVS_OUTCOME_CONVERGED: return "Converged";
    case IBVS_OUTCOME_TIMEOUT: return "Timeout";
    case IBVS_OUTCOME_TRACK_LOST: return "TrackLostUnrecovered";
  }
  return "Unknown";
}

ibvs_status ibvs_scenario_load(const char* path, ibvs_scenario** out) {
  if (!path || !out) return null_argument();
  *out = nullptr;
  return guarded([&] { *out = new ibvs_scenario{ibvs::load_scenario(path)}; });
}

ibvs_status ibvs_scenario_parse(const char* json_text, ibvs_scenario** out) {
  if (!json_text || !out) return null_argument();
  *out = nullptr;
  return guarded([&] { *out = new ibvs_scenario{ibvs::parse_scenario(json_text)}; });
}

void ibvs_scenario_free(ibvs_scenario* scenario) { delete scenario; }

ibvs_status ibvs_scenario_name(const ibvs_scenario* scenario, const char** out) {
  if (!scenario || !out) return null_argument();
  *out = scenario->scenario.name.c_str();
  return IBVS_OK;
}

ibvs_status ibvs_scenario_seed(const ibvs_scenario* scenario, uint64_t* out) {
  if (!scenario || !out) return null_argument();
  *out = scenario->scenario.rng_seed;
  return IBVS_OK;
}

void ibvs_run_options_init(ibvs_run_options* options) {
  if (options) *options = ibvs_run_options{0, 0, 0, nullptr, 0};
}

ibvs_status ibvs_run_scenario(const ibvs_scenario* scenario, const ibvs_run_options* options, ibvs_run** out) {
  if (!scenario || !out) return null_argument();
  *out = nullptr;
  ibvs::RunOptions opt;
  if (options) {
    if (options->has_seed) opt.seed = options->seed;
    if (options->max_iterations > 0) opt.max_iterations = options->max_iterations;
    if (options->frame_dir) opt.frame_dir = std::string(options->frame_dir);
    opt.analytic_features = options->analytic_features != 0;
  }
  return guarded([&] { *out = new ibvs_run{ibvs::run_scenario(scenario->scenario, opt)}; });
}

void ibvs_run_free(ibvs_run* run) { delete run; }

ibvs_status ibvs_run_outcome(const ibvs_run* run, ibvs_outcome* out) {
  if (!run || !out) return null_argument();
  switch (run->result.outcome) {
    case ibvs::Outcome::Converged: *out = IBVS_OUTCOME_CONVERGED; break;
    case ibvs::Outcome::Timeout: *out = IBVS_OUTCOME_TIMEOUT; break;
    case ibvs::Outcome::TrackLostUnrecovered: *out = IBVS_OUTCOME_TRACK_LOST; break;
  }
  return IBVS_OK;
}

ibvs_status ibvs_run_iterations(const ibvs_run* run, int* out) {
  if (!run || !out) return null_argument();
  *out = run->result.iterations;
  return IBVS_OK;
}

ibvs_status ibvs_run_final_error(const ibvs_run* run, double* out) {
  if (!run || !out) return null_argument();
  *out = run->result.final_error;
  return IBVS_OK;
}

ibvs_status ibvs_run_wall_time(const ibvs_run* run, double* out) {
  if (!run || !out) return null_argument();
  *out = run->result.wall_time_s;
  return IBVS_OK;
}

ibvs_status ibvs_run_seed(const ibvs_run* run, uint64_t* out) {
  if (!run || !out) return null_argument();
  *out = run->result.seed;
  return IBVS_OK;
}

ibvs_status ibvs_run_error_at(const ibvs_run* run, int index, double* out) {
  if (!run || !out) return null_argument();
  if (index < 0 || index >= static_cast<int>(run->result.trace.size()))
    return fail(IBVS_ERR_INVALID_ARGUMENT, "trace index out of range");
  *out = run->result.trace[static_cast<std::size_t>(index)].error_squared;
  return IBVS_OK;
}

ibvs_status ibvs_run_write_trace(const ibvs_run* run, const char* path) {
  if (!run || !path) return null_argument();
  return guarded([&] { ibvs::write_trace_csv(run->result.trace, path); });
}

ibvs_status ibvs_run_write_summary(const ibvs_run* run, const char* path) {
  if (!run || !path) return null_argument();
  return guarded([&] { ibvs::write_summary_json(run->result, path); });
}

ibvs_status ibvs_project_sphere(const double sphere[4], ibvs_ellipse* out) {
  if (!sphere || !out) return null_argument();
  return guarded([&] {
    if (!(sphere[3] > 0.0)) throw ibvs::Error(ibvs::ErrorCode::InvalidArgument, "sphere radius must be positive");
    const ibvs::EllipseParams e = ibvs::project_sphere({ibvs::Vec3(sphere[0], sphere[1], sphere[2]), sphere[3]});
    *out = ibvs_ellipse{e.center.x(), e.center.y(), e.semi_major, e.semi_minor, e.orientation};
  });
}

ibvs_status ibvs_features_from_ellipse(const ibvs_ellipse* ellipse, double features[5]) {
  if (!ellipse || !features) return null_argument();
  return guarded([&] {
    ibvs::EllipseParams e;
    e.center = {ellipse->center_x, ellipse->center_y};
    e.semi_major = ellipse->semi_major;
    e.semi_minor = ellipse->semi_minor;
    e.orientation = ellipse->orientation;
    if (!(e.semi_minor > 0.0) || e.semi_major < e.semi_minor)
      throw ibvs::Error(ibvs::ErrorCode::InvalidArgument, "ellipse needs semi_major >= semi_minor > 0");
    const ibvs::Vector5 v = ibvs::features_from_ellipse(e).as_vector();
    for (int i = 0; i < 5; ++i) features[i] = v(i);
  });
}

}  // extern "C"
