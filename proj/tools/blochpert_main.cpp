#include <CLI11.hpp>
#include <iostream>

#include "blochpert/experiment.hpp"

using namespace blochpert;

int main(int argc, char** argv) {
  CLI::App app{"Bloch eigenvalue perturbation series with a plane-wave oracle"};
  app.require_subcommand(0, 1);

  std::string config_path, mode_override, out_override;
  long long seed = -1;
  int threads = -1;
  app.add_option("--config", config_path, "experiment config (JSON)")
      ->envname("BLOCHPERT_CONFIG");
  app.add_option("--mode", mode_override, "override the config mode")->envname("BLOCHPERT_MODE");
  app.add_option("--out", out_override, "output path override")->envname("BLOCHPERT_OUT");
  app.add_option("--seed", seed, "RNG seed override")->envname("BLOCHPERT_SEED");
  app.add_option("--threads", threads, "worker threads")->envname("BLOCHPERT_THREADS");

  const std::vector<std::string> modes = {
      "spectrum",    "classify",          "hill",  "predict-nonres", "predict-res",
      "predict-singleres", "bloch", "isoenergetic",   "verify-all"};
  for (auto& m : modes) {
    auto* sub = app.add_subcommand(m, "run the '" + m + "' mode");
    sub->callback([&, m]() { mode_override = m; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (config_path.empty()) throw config_error("--config is required");
    auto spec = experiment::load_config(config_path);
    if (!mode_override.empty()) spec.mode = mode_override;
    if (!out_override.empty()) spec.out_path = out_override;
    if (seed >= 0) spec.seed = static_cast<unsigned long long>(seed);
    if (threads > 0) spec.threads = threads;
    return experiment::run(spec, std::cout);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
