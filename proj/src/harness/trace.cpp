#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ibvs/harness.hpp"

namespace ibvs {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

}  // namespace

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::string out =
      "iter,t,xg,yg,mu20,mu11,mu02,xg_d,yg_d,mu20_d,mu11_d,mu02_d,err2,vx,vy,vz,wx,wy,wz,phase\n";
  const double nan = std::nan("");
  for (const TraceRecord& r : trace) {
    out += std::to_string(r.iteration);
    const Vector5 obs = r.observed ? r.observed->as_vector() : Vector5::Constant(nan);
    const Twist::Vector6 v = r.commanded.as_vector();
    double row[18];
    row[0] = r.time;
    for (int i = 0; i < 5; ++i) row[1 + i] = obs(i);
    for (int i = 0; i < 5; ++i) row[6 + i] = r.desired.as_vector()(i);
    row[11] = r.error_squared;
    for (int i = 0; i < 6; ++i) row[12 + i] = v(i);
    for (int i = 0; i < 18; ++i) {
      out += ',';
      append_number(out, row[i]);
    }
    out += ',';
    out += to_string(r.phase);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path) {
  write_text(trace_csv(trace), path);
}

std::string summary_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["outcome"] = to_string(r.outcome);
  j["iterations"] = r.iterations;
  j["final_error"] = r.final_error;
  j["wall_time_s"] = r.wall_time_s;
  j["seed"] = r.seed;
  j["tracker_resets"] = r.tracker_resets;
  return j.dump(2) + "\n";
}

void write_summary_json(const RunResult& result, const std::string& path) {
  write_text(summary_json(result), path);
}

}  // namespace ibvs
