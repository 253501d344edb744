#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "nstorus/experiments.hpp"

namespace {

struct CommonOpts {
  std::string manifest_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool reproducible = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--manifest", opts.manifest_path, "run manifest (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "output directory (overrides manifest)");
  cmd->add_option("--seed", opts.seed, "seed override")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  cmd->add_flag("--reproducible", opts.reproducible, "fixed reduction order");
  cmd->add_option("--threads", opts.threads, "convolution worker threads");
}

int run(const std::string& experiment, const CommonOpts& opts) {
  nstorus::RunManifest manifest;
  try {
    manifest = nstorus::load_manifest(opts.manifest_path);
  } catch (const nstorus::ConfigError& e) {
    std::cout << nstorus::json{{"error",
                                {{"code", "config"},
                                 {"field", e.field},
                                 {"message", e.what()}}}}
                     .dump(2)
              << std::endl;
    return 2;
  }
  manifest.experiment = experiment;
  if (!opts.out_dir.empty()) manifest.output_dir = opts.out_dir;
  if (opts.seed_set) manifest.seed = opts.seed;
  if (opts.reproducible) manifest.reproducible = true;
  if (opts.threads > 0) manifest.config.threads = opts.threads;
  return nstorus::run_experiment(manifest, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Navier-Stokes solver and certification toolkit on the n-torus"};
  app.require_subcommand(1);

  const char* names[] = {"solve", "certify", "decay", "uniqueness", "majorant-check", "props"};
  const char* descriptions[] = {
      "fixed-point solve, momentum residuals, trajectory output",
      "certified constants, existence horizon and global threshold",
      "solve plus coefficient-decay and mean-decay fits",
      "paired solves and the analytic-norm gap",
      "solve with per-iterate majorant domination checks",
      "the full domination-calculus property suite",
  };

  CommonOpts opts[6];
  for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(names[i], descriptions[i]), opts[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0)
      std::cout << nstorus::json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump(2)
                << std::endl;
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (int i = 0; i < 6; ++i)
    if (app.get_subcommand(names[i])->parsed()) return run(names[i], opts[i]);
  return 2;
}
