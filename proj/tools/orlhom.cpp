#include "orlhom/pipeline.hpp"
#include "orlhom/common.hpp"

#include <CLI11.hpp>

#include <string>

int main(int argc, char** argv) {
  CLI::App app{"orlhom: numerical homogenization of Orlicz-growth energies"};
  app.set_version_flag("--version", std::string(orlhom::kVersion));
  app.require_subcommand(1);

  std::string config_path, out_path;
  int jobs = 0;

  const char* commands[] = {"gamma", "zeta", "phi", "verify", "oracle", "luxemburg"};
  const char* blurbs[] = {
      "periodic cell problems over the sigma grid",
      "stochastic cell estimates zeta(sigma) over the t ladder and seed list",
      "nonconvex stochastic estimates phi(sigma) (multistart upper bounds)",
      "structural property suites on the homogenized density",
      "closed-form reference values (1D power, quadratic laminate)",
      "modular and Luxemburg norm of constant matrix fields",
  };
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], blurbs[i]);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_path, "output CSV path (manifest at <out>.manifest.json)")->required();
    sub->add_option("--jobs", jobs, "parallel solve tasks (default: config key, then logical cores)");
  }

  CLI11_PARSE(app, argc, argv);
  return orlhom::run_pipeline(app.get_subcommands().front()->get_name(), config_path, out_path, jobs);
}
