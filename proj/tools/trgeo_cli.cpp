#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "trgeo/scenario.hpp"

namespace {

struct Flags {
  std::string scenario;
  std::string out = "out";
  int threads = 0;
  double tol_scale = 1.0;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "scenario file (JSON)")->required();
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads (default: TRGEO_THREADS or 1)");
  cmd->add_option("--tol-scale", f.tol_scale, "multiplies every tolerance");
}

int threads_from(const Flags& f) {
  if (f.threads > 0) return f.threads;
  if (const char* env = std::getenv("TRGEO_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "trgeo: ignoring invalid TRGEO_THREADS='" << env << "'\n";
  }
  return 1;
}

int run(const Flags& f, const std::string& operation) {
  trgeo::RunOptions opts;
  opts.threads = threads_from(f);
  opts.tol_scale = f.tol_scale;
  opts.required_operation = operation;
  const auto outcome = trgeo::run_scenario(f.scenario, f.out, opts);
  if (outcome.exit_code != 0) std::cerr << "trgeo: " << outcome.diagnostic << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for totally real submanifolds and the J-volume"};
  app.require_subcommand(1);
  Flags flags;
  int code = 0;

  auto* run_cmd = app.add_subcommand("run", "run a scenario file with any operation");
  add_flags(run_cmd, flags);
  run_cmd->callback([&] { code = run(flags, ""); });

  const std::vector<std::pair<std::string, std::vector<std::string>>> groups = {
      {"curve", {"analyze", "classify", "geodesic", "length", "secondvar"}},
      {"jvol", {"compute", "hj"}},
      {"flow", {"run", "bvp", "uniqueness"}},
      {"variation", {"first", "second", "density", "convexity", "mixed", "stability"}},
      {"ambient", {"verify"}},
  };
  for (const auto& [group, ops] : groups) {
    auto* g = app.add_subcommand(group, group + " operations");
    g->require_subcommand(1);
    for (const auto& op : ops) {
      auto* cmd = g->add_subcommand(op);
      add_flags(cmd, flags);
      const std::string full = group + "." + op;
      cmd->callback([&, full] { code = run(flags, full); });
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return code;
}
