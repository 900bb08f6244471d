#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pointproc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"point process identity verification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int parallel = 1;

  CLI::App* verify = app.add_subcommand("verify", "run the configured identity checks");
  verify->add_option("config", config_path, "experiment config file")->required();
  verify->add_option("--parallel", parallel, "run up to N independent checks concurrently");
  verify->add_option("--out", out_dir, "output directory (default: config, then POINTPROC_OUT_DIR)");

  CLI::App* sample = app.add_subcommand("sample", "draw configurations from the model");
  sample->add_option("config", config_path, "experiment config file")->required();
  sample->add_option("--out", out_dir, "output directory");

  CLI::App* oracle = app.add_subcommand("oracle", "dump the exact law of a discrete model");
  oracle->add_option("config", config_path, "experiment config file")->required();
  oracle->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pointproc::kExitUsage;
  }

  if (verify->parsed()) return pointproc::run_verify(config_path, out_dir, parallel, std::cerr);
  if (sample->parsed()) return pointproc::run_sample(config_path, out_dir, std::cerr);
  return pointproc::run_oracle(config_path, out_dir, std::cerr);
}
