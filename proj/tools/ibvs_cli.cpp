// Command-line front end for the scenario runner, built on the C API.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "ibvs/ibvs.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitTimeout = 2;
constexpr int kExitTrackLost = 3;
constexpr int kExitConfig = 64;
constexpr int kExitIo = 74;
constexpr int kExitInternal = 70;

constexpr const char* kOutEnv = "IBVS_OUT_DIR";
constexpr const char* kScenarioEnv = "IBVS_SCENARIO_DIR";

struct RunArgs {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> max_iters;
  bool dump_frames = false;
};

fs::path output_root(const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return "ibvs_out";
}

int exit_code(ibvs_outcome outcome) {
  switch (outcome) {
    case IBVS_OUTCOME_CONVERGED: return kExitConverged;
    case IBVS_OUTCOME_TIMEOUT: return kExitTimeout;
    case IBVS_OUTCOME_TRACK_LOST: return kExitTrackLost;
  }
  return kExitInternal;
}

int exit_code(ibvs_status status) {
  switch (status) {
    case IBVS_OK: return 0;
    case IBVS_ERR_CONFIG: return kExitConfig;
    case IBVS_ERR_IO: return kExitIo;
    default: return kExitInternal;
  }
}

int report(ibvs_status status, const std::string& context) {
  std::fprintf(stderr, "error: %s: %s (%s)\n", context.c_str(), ibvs_last_error(), ibvs_status_string(status));
  return exit_code(status);
}

// Loads and runs one scenario file, writing trace.csv and summary.json under
// <root>/<scenario name>/. Returns the process exit code for that run.
int run_one(const fs::path& file, const RunArgs& args, const fs::path& root) {
  ibvs_scenario* scenario = nullptr;
  ibvs_status st = ibvs_scenario_load(file.string().c_str(), &scenario);
  if (st != IBVS_OK) {
    // An unreadable scenario file is a configuration problem for the caller.
    std::fprintf(stderr, "error: %s: %s\n", file.string().c_str(), ibvs_last_error());
    return kExitConfig;
  }
  const char* raw_name = nullptr;
  ibvs_scenario_name(scenario, &raw_name);
  const std::string name = raw_name;
  const fs::path dir = root / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create %s: %s\n", dir.string().c_str(), ec.message().c_str());
    ibvs_scenario_free(scenario);
    return kExitIo;
  }

  ibvs_run_options opt;
  ibvs_run_options_init(&opt);
  if (args.seed) {
    opt.has_seed = 1;
    opt.seed = *args.seed;
  }
  if (args.max_iters) opt.max_iterations = *args.max_iters;
  const std::string frame_dir = (dir / "frames").string();
  if (args.dump_frames) opt.frame_dir = frame_dir.c_str();

  ibvs_run* run = nullptr;
  st = ibvs_run_scenario(scenario, &opt, &run);
  ibvs_scenario_free(scenario);
  if (st != IBVS_OK) return report(st, file.string());

  int code = kExitInternal;
  if ((st = ibvs_run_write_trace(run, (dir / "trace.csv").string().c_str())) != IBVS_OK ||
      (st = ibvs_run_write_summary(run, (dir / "summary.json").string().c_str())) != IBVS_OK) {
    code = report(st, dir.string());
  } else {
    ibvs_outcome outcome;
    int iterations = 0;
    double err = 0.0;
    std::uint64_t seed = 0;
    ibvs_run_outcome(run, &outcome);
    ibvs_run_iterations(run, &iterations);
    ibvs_run_final_error(run, &err);
    ibvs_run_seed(run, &seed);
    std::printf("%-22s %-21s iterations=%-4d err2=%.3e seed=%llu -> %s\n", name.c_str(), ibvs_outcome_string(outcome),
                iterations, err, static_cast<unsigned long long>(seed), dir.string().c_str());
    code = exit_code(outcome);
  }
  ibvs_run_free(run);
  return code;
}

std::vector<fs::path> scenario_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const fs::directory_entry& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

fs::path default_scenario_dir() {
  if (const char* env = std::getenv(kScenarioEnv); env && *env) return env;
  return IBVS_DEFAULT_SCENARIO_DIR;
}

void add_run_flags(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--seed", args.seed, "Override the scenario seed");
  cmd->add_option("--out", args.out, std::string("Output root (default $") + kOutEnv + " or ./ibvs_out)");
  cmd->add_option("--max-iters", args.max_iters, "Iteration limit")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-based visual servoing simulator"};
  app.require_subcommand(1);

  RunArgs args;
  std::string scenario_file;
  CLI::App* run = app.add_subcommand("run", "Run one scenario file");
  run->add_option("scenario", scenario_file, "Scenario JSON file")->required();
  add_run_flags(run, args);
  run->add_flag("--dump-frames", args.dump_frames, "Write per-frame PGM images");

  std::string batch_dir;
  CLI::App* batch = app.add_subcommand("batch", "Run every scenario file in a directory");
  batch->add_option("dir", batch_dir, "Directory of scenario JSON files")->required();
  add_run_flags(batch, args);

  std::optional<std::string> list_dir;
  CLI::App* list = app.add_subcommand("list-scenarios", "List the shipped scenarios");
  list->add_option("--dir", list_dir, "Scenario directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_one(scenario_file, args, output_root(args.out));

    if (*batch) {
      const fs::path root = output_root(args.out);
      int worst = 0;
      for (const fs::path& f : scenario_files(batch_dir)) {
        const int code = run_one(f, args, root);
        if (code != kExitConverged && code != kExitTimeout && code != kExitTrackLost) worst = std::max(worst, code);
      }
      return worst;
    }

    const fs::path dir = list_dir ? fs::path(*list_dir) : default_scenario_dir();
    for (const fs::path& f : scenario_files(dir)) {
      ibvs_scenario* s = nullptr;
      if (ibvs_scenario_load(f.string().c_str(), &s) != IBVS_OK) {
        std::printf("%-22s (invalid: %s)\n", f.stem().string().c_str(), ibvs_last_error());
        continue;
      }
      const char* name = nullptr;
      ibvs_scenario_name(s, &name);
      std::printf("%-22s %s\n", name, f.string().c_str());
      ibvs_scenario_free(s);
    }
    return 0;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
}
