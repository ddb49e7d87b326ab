#include <cmath>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "hft/harness.hpp"
#include "hft/transport.hpp"

namespace {

int run_with_config(const std::string& path,
                    int (*cmd)(const hft::ExperimentConfig&)) {
  try {
    return cmd(hft::load_config(path));
  } catch (const hft::ConfigError& e) {
    std::fprintf(stderr, "hft: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hft: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heat-flow transport maps on the Gaussian and gamma model spaces"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment JSON file")
        ->required();
  };
  CLI::App* gamma = app.add_subcommand(
      "gamma-check",
      "carre du champ recursion vs closed forms and curvature margins");
  add_config(gamma);
  CLI::App* transport = app.add_subcommand(
      "transport", "build the transport map and gate its invariants");
  add_config(transport);
  CLI::App* verify = app.add_subcommand(
      "verify-all", "run the full verification battery");
  add_config(verify);

  double rho1 = 0.0, rho2 = 0.0, K = 0.0;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "print the Lipschitz bound exp(sqrt(2 pi / rho2) K "
                "e^{K^2/(2 rho1)})");
  bounds->add_option("--rho1", rho1, "first curvature constant")->required();
  bounds->add_option("--rho2", rho2, "second curvature constant")->required();
  bounds->add_option("--K", K, "metric Lipschitz constant of the potential")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (bounds->parsed()) {
    if (!(rho1 > 0.0) || !(rho2 > 0.0) || !(K >= 0.0) || !std::isfinite(rho1) ||
        !std::isfinite(rho2) || !std::isfinite(K)) {
      std::fprintf(stderr,
                   "hft: bounds needs rho1 > 0, rho2 > 0 and K >= 0\n");
      return 2;
    }
    std::printf("%.17g\n", hft::theorem_bound(rho1, rho2, K));
    return 0;
  }
  if (gamma->parsed()) return run_with_config(config_path, hft::cmd_gamma_check);
  if (transport->parsed())
    return run_with_config(config_path, hft::cmd_transport);
  return run_with_config(config_path, hft::cmd_verify_all);
}
