// nfnls <kind> --config <path> [--seed S] [--out DIR]
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nfnls/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"normal-form NLS experiments"};
  std::string kind, config, out;
  long long seed = -1;
  app.add_option("kind", kind, "verify_lemmas | converge | solve | compare | trees | norms")->required();
  app.add_option("--config", config, "key = value config file")->required();
  app.add_option("--seed", seed, "overrides experiment.seed");
  app.add_option("--out", out, "output directory, overrides output.path");
  CLI11_PARSE(app, argc, argv);

  try {
    nfnls::ExperimentConfig cfg = nfnls::load_config(config);
    cfg.kind = nfnls::parse_kind(kind);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!out.empty()) cfg.output_path = out;
    const nfnls::RunReport r = nfnls::run_experiment(cfg);
    for (const auto& c : r.checks)
      std::printf("%s %s: measured %.6g bound %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured, c.bound);
    if (!cfg.output_path.empty()) std::printf("report written to %s\n", cfg.output_path.c_str());
    return r.all_pass() ? 0 : 1;
  } catch (const nfnls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
