// dkl: command-line front end for the experiment runner.
//
//   dkl <experiment> [--config file.ini] [flags]
//
// Flags override values read from --config. Exit codes: 0 success,
// 2 invalid input, 3 resource or cache failure, 1 anything else.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dkl/experiments.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitResource = 3;

struct Overrides {
  std::string config_path;
  std::optional<int> k, m, l, order;
  std::optional<std::uint64_t> limit, seed, samples, top, memory_budget;
  std::optional<unsigned> threads;
  std::optional<double> x_min_fit;
  std::vector<double> x, h, delta, delta_exp;
  std::vector<std::uint64_t> n;
  std::optional<std::string> cache_dir, out;
  bool rebuild_cache = false;
  bool print_config = false;
};

void add_flags(CLI::App* cmd, Overrides& o) {
  cmd->set_help_flag("--help", "print this help");  // -h would clash with --h
  cmd->add_option("--config", o.config_path, "INI experiment file; flags override it");
  cmd->add_option("--k", o.k, "divisor order k");
  cmd->add_option("--m", o.m, "moment power m");
  cmd->add_option("--l", o.l, "half-tuple size l (2 or 3)");
  cmd->add_option("--x", o.x, "X values")->delimiter(',');
  cmd->add_option("--h", o.h, "H values")->delimiter(',');
  cmd->add_option("--n", o.n, "N values")->delimiter(',');
  cmd->add_option("--delta", o.delta, "window widths delta")->delimiter(',');
  cmd->add_option("--delta-exp", o.delta_exp, "delta = N^-e for each e")->delimiter(',');
  cmd->add_option("--limit", o.limit, "divisor table limit (default: derived)");
  cmd->add_option("--order", o.order, "Gauss-Legendre order");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--samples", o.samples, "sample count");
  cmd->add_option("--top", o.top, "records to keep");
  cmd->add_option("--x-min-fit", o.x_min_fit, "lower x for the alpha fit");
  cmd->add_option("--memory-budget", o.memory_budget, "bytes for tuple counting blocks");
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
  cmd->add_option("--cache-dir", o.cache_dir, "directory for DKLB table files");
  cmd->add_option("--out", o.out, "output prefix; writes <out>.csv and <out>.json");
  cmd->add_flag("--rebuild-cache", o.rebuild_cache, "rebuild a corrupt cache file instead of failing");
  cmd->add_flag("--print-config", o.print_config, "print the effective config and exit");
}

dkl::ExperimentConfig effective_config(dkl::ExperimentKind kind, const Overrides& o) {
  dkl::ExperimentConfig c;
  if (!o.config_path.empty()) c = dkl::load_config(o.config_path);
  c.experiment = kind;
  if (o.k) c.k = *o.k;
  if (o.m) c.m = *o.m;
  if (o.l) c.l = *o.l;
  if (o.order) c.order = *o.order;
  if (o.limit) c.limit = *o.limit;
  if (o.seed) c.seed = *o.seed;
  if (o.samples) c.samples = *o.samples;
  if (o.top) c.top = *o.top;
  if (o.memory_budget) c.memory_budget = *o.memory_budget;
  if (o.threads) c.threads = *o.threads;
  if (o.x_min_fit) c.x_min_fit = *o.x_min_fit;
  if (!o.x.empty()) c.x = o.x;
  if (!o.h.empty()) c.h = o.h;
  if (!o.n.empty()) c.n = o.n;
  if (!o.delta.empty()) c.delta = o.delta;
  if (!o.delta_exp.empty()) c.delta_exp = o.delta_exp;
  if (o.cache_dir) c.cache_dir = *o.cache_dir;
  if (o.out) c.out = *o.out;
  if (o.rebuild_cache) c.rebuild_cache = true;
  return c;
}

int exit_code(dkl::ErrorKind kind) {
  switch (kind) {
    case dkl::ErrorKind::resource:
    case dkl::ErrorKind::corruption:
    case dkl::ErrorKind::out_of_range:
    case dkl::ErrorKind::arithmetic:
      return kExitResource;
    default:
      return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dkl: numerics for the divisor-problem error term Delta_k(x)"};
  app.set_version_flag("--version", std::string(dkl::kVersion));
  app.require_subcommand(1);

  Overrides overrides;
  std::optional<dkl::ExperimentKind> chosen;
  for (const auto& [kind, name] : dkl::kExperimentNames) {
    auto* cmd = app.add_subcommand(std::string(name), "run the " + std::string(name) + " experiment");
    add_flags(cmd, overrides);
    cmd->callback([&chosen, k = kind] { chosen = k; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    const auto config = effective_config(*chosen, overrides);
    if (overrides.print_config) {
      std::cout << dkl::serialize(config);
      return 0;
    }
    const auto paths = dkl::run_experiment(config);
    std::cout << "wrote " << paths.csv.string() << " and " << paths.json.string() << "\n";
    return 0;
  } catch (const dkl::ConfigError& e) {
    std::cerr << "dkl: " << e.what() << "\n";
    return kExitValidation;
  } catch (const dkl::Error& e) {
    std::cerr << "dkl: " << dkl::to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "dkl: out of memory\n";
    return kExitResource;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "dkl: file system error: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "dkl: " << e.what() << "\n";
    return 1;
  }
}
