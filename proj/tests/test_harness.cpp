#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "hft/harness.hpp"
#include "hft/transport.hpp"

using namespace hft;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kValidOu = R"({
  "space": "ou",
  "potential": {"kind": "linear", "K_or_c": 1.0},
  "backend": "mehler",
  "grid": {"lo": -5.0, "hi": 5.0, "n": 41},
  "tolerances": {"ode_tol": 1e-8, "quadrature_tol": 1e-12, "horizon_eps": 1e-6},
  "t_schedule": [0.0, 0.25, 1.0],
  "seed": 20240614,
  "output_dir": "out"
})";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hft_harness_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

ExperimentConfig base_ou(const std::string& outname) {
  ExperimentConfig cfg;
  cfg.space = "ou";
  cfg.potential = {"linear", 1.0, ""};
  cfg.backend = "mehler";
  cfg.grid = {-5.0, 5.0, 41};
  cfg.tolerances = {1e-8, 1e-12, 1e-6};
  cfg.t_schedule = {0.0, 0.25, 1.0};
  cfg.seed = 20240614;
  cfg.output_dir = fresh_dir(outname).string();
  return cfg;
}

ExperimentConfig base_laguerre(const std::string& outname) {
  ExperimentConfig cfg = base_ou(outname);
  cfg.space = "laguerre";
  cfg.p = 1.5;
  cfg.potential = {"sqrt", 0.5, ""};
  cfg.backend = "spectral";
  cfg.grid = {0.05, 20.0, 41};
  cfg.tolerances.horizon_eps = 1e-7;
  cfg.t_schedule = {0.25, 1.0};
  return cfg;
}

const json* find_check(const json& report, const std::string& name) {
  for (const json& c : report.at("checks"))
    if (c.at("name") == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("experiment configs are schema validated") {
  const ExperimentConfig ok = parse_config_text(kValidOu);
  CHECK(ok.space == "ou");
  CHECK(ok.backend == "mehler");
  CHECK(ok.potential.kind == "linear");
  CHECK(ok.potential.K_or_c == 1.0);
  CHECK(ok.grid.n == 41);
  CHECK(ok.tolerances.quadrature_tol == 1e-12);
  CHECK(ok.t_schedule.size() == 3);
  CHECK(ok.seed == 20240614);
  CHECK(ok.rho_override == 0.0);

  json lag = json::parse(kValidOu);
  lag["space"] = "laguerre";
  lag["p"] = 1.5;
  lag["backend"] = "spectral";
  lag["grid"]["lo"] = 0.05;
  lag["potential"] = {{"kind", "sqrt"}, {"K_or_c", 0.5}};
  lag["rho_override"] = 0.75;
  const ExperimentConfig lcfg = parse_config_text(lag.dump());
  CHECK(lcfg.p == 1.5);
  CHECK(lcfg.rho_override == 0.75);

  json tab = json::parse(kValidOu);
  tab["potential"] = {{"kind", "tabulated"}, {"table_path", "v.csv"}};
  CHECK(parse_config_text(tab.dump()).potential.table_path == "v.csv");

  auto reject = [](const std::function<void(json&)>& mutate) {
    json j = json::parse(kValidOu);
    mutate(j);
    CHECK_THROWS_AS(parse_config_text(j.dump()), ConfigError);
  };
  auto to_laguerre = [](json& j) {
    j["space"] = "laguerre";
    j["p"] = 1.5;
    j["backend"] = "spectral";
    j["grid"]["lo"] = 0.05;
  };

  reject([](json& j) { j["space"] = "hyperbolic"; });
  reject([&](json& j) { to_laguerre(j); j["p"] = 1.0; });
  reject([&](json& j) { to_laguerre(j); j.erase("p"); });
  reject([](json& j) { j["p"] = 2.0; });  // laguerre-only key on ou
  reject([](json& j) { j["mystery"] = 1; });
  reject([](json& j) { j["potential"]["kind"] = "sqrt"; });  // needs half-line
  reject([](json& j) { j["potential"]["kind"] = "quartic"; });
  reject([](json& j) { j["potential"].erase("K_or_c"); });
  reject([](json& j) { j["potential"]["table_path"] = "v.csv"; });
  reject([](json& j) {
    j["potential"] = {{"kind", "tabulated"}, {"K_or_c", 1.0},
                      {"table_path", "v.csv"}};
  });
  reject([](json& j) { j["backend"] = "exact"; });
  reject([](json& j) { j["backend"] = "spectral"; });  // gamma-only backend
  reject([&](json& j) { to_laguerre(j); j["backend"] = "mehler"; });
  reject([](json& j) { j["grid"]["lo"] = 6.0; });
  reject([](json& j) { j["grid"]["n"] = 1; });
  reject([](json& j) { j["grid"]["n"] = 2.5; });
  reject([&](json& j) { to_laguerre(j); j["grid"]["lo"] = 0.0; });
  reject([](json& j) { j["tolerances"]["ode_tol"] = 0.0; });
  reject([](json& j) { j["tolerances"].erase("horizon_eps"); });
  reject([](json& j) { j["tolerances"]["extra"] = 1.0; });
  reject([](json& j) { j["t_schedule"] = json::array(); });
  reject([](json& j) { j["t_schedule"] = {-0.1, 1.0}; });
  reject([](json& j) { j["t_schedule"] = {0.0}; });  // no positive time
  reject([](json& j) { j["t_schedule"] = {"0.1"}; });
  reject([](json& j) { j["seed"] = -1; });
  reject([](json& j) { j["seed"] = 1.5; });
  reject([](json& j) { j["output_dir"] = ""; });
  reject([](json& j) { j["rho_override"] = 0.0; });

  CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("gamma report certifies the recursion and the curvature margins") {
  ExperimentConfig cfg = base_ou("gamma_ou");
  REQUIRE(cmd_gamma_check(cfg) == 0);
  const fs::path report_path = fs::path(cfg.output_dir) / "gamma_report.json";
  const std::string first = slurp(report_path);
  const json report = json::parse(first);
  CHECK(report.at("status") == "PASS");
  CHECK(report.at("checks").size() == 5);
  for (int n = 1; n <= 3; ++n) {
    const json* c = find_check(
        report, "recursion_matches_closed_form_gamma" + std::to_string(n));
    REQUIRE(c != nullptr);
    CHECK(c->at("status") == "PASS");
    CHECK(c->at("margin").get<double>() > 0.0);
  }
  REQUIRE(cmd_gamma_check(cfg) == 0);
  CHECK(slurp(report_path) == first);  // deterministic given the seed

  ExperimentConfig lag = base_laguerre("gamma_lag");
  REQUIRE(cmd_gamma_check(lag) == 0);
  const json lrep =
      json::parse(slurp(fs::path(lag.output_dir) / "gamma_report.json"));
  CHECK(lrep.at("status") == "PASS");
  CHECK(lrep.at("p").get<double>() == 1.5);

  // rho above the true curvature constant: the margin turns negative
  ExperimentConfig hot = base_ou("gamma_rho");
  hot.rho_override = 1.5;
  CHECK(cmd_gamma_check(hot) == 1);
  const json hrep =
      json::parse(slurp(fs::path(hot.output_dir) / "gamma_report.json"));
  CHECK(hrep.at("status") == "FAIL");
  const json* bad = find_check(hrep, "curvature_gamma2_ge_rho_gamma1");
  REQUIRE(bad != nullptr);
  CHECK(bad->at("status") == "FAIL");
  CHECK(bad->at("margin").get<double>() < 0.0);
}

TEST_CASE("transport bundle: gates, files, determinism") {
  unsetenv("HFT_OUTPUT_DIR");
  ExperimentConfig cfg = base_ou("transport_ou");
  REQUIRE(cmd_transport(cfg) == 0);
  const fs::path out(cfg.output_dir);

  const std::string summary_text = slurp(out / "summary.json");
  const RunSummary sum = summary_from_json(summary_text);
  CHECK(sum.pass());
  CHECK(sum.K == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sum.rho1 == 1.0);
  CHECK(sum.bound ==
        doctest::Approx(62.347985005038982991).epsilon(1e-12));
  CHECK(std::abs(sum.lipschitz - 1.0) <= 1e-4);
  CHECK(sum.ks_distance <= 0.002);
  CHECK(sum.monge_sup <= 1e-4);
  CHECK(sum.checks.size() == 4);
  CHECK(sum.config.space == "ou");
  // the struct -> json -> struct loop loses nothing
  CHECK(summary_to_json(summary_from_json(summary_to_json(sum))) ==
        summary_to_json(sum));

  const std::string csv_text = slurp(out / "transport.csv");
  const TransportTable table = transport_table_from_csv(csv_text);
  REQUIRE(table.x.size() == 41);
  CHECK(transport_table_to_csv(table) == csv_text);  // 17 digits round trip
  double worst = 0.0;
  for (std::size_t i = 0; i < table.x.size(); ++i)
    worst = std::max(worst, std::abs(table.T[i] - (table.x[i] - 1.0)));
  CHECK(worst <= 1e-4);  // K = 1 log-linear perturbation shifts by K

  const json timings = json::parse(slurp(out / "timings.json"));
  CHECK(timings.at("total_ms").get<double>() >= 0.0);

  REQUIRE(cmd_transport(cfg) == 0);
  CHECK(slurp(out / "summary.json") == summary_text);  // byte identical rerun

  // zero log-density perturbation: the map is the identity
  ExperimentConfig idcfg = base_ou("transport_id");
  idcfg.potential.K_or_c = 0.0;
  REQUIRE(cmd_transport(idcfg) == 0);
  const RunSummary idsum =
      summary_from_json(slurp(fs::path(idcfg.output_dir) / "summary.json"));
  CHECK(idsum.K == 0.0);
  CHECK(idsum.bound == 1.0);
  const TransportTable idtab = transport_table_from_csv(
      slurp(fs::path(idcfg.output_dir) / "transport.csv"));
  for (std::size_t i = 0; i < idtab.x.size(); ++i)
    CHECK(std::abs(idtab.T[i] - idtab.x[i]) <= 1e-12);

  // the environment override wins over the config's output_dir
  ExperimentConfig envcfg = base_ou("transport_env_ignored");
  fs::remove_all(envcfg.output_dir);
  const fs::path envdir = fresh_dir("transport_env");
  setenv("HFT_OUTPUT_DIR", envdir.c_str(), 1);
  const int env_rc = cmd_transport(envcfg);
  unsetenv("HFT_OUTPUT_DIR");
  REQUIRE(env_rc == 0);
  CHECK(fs::exists(envdir / "summary.json"));
  CHECK(!fs::exists(fs::path(envcfg.output_dir) / "summary.json"));
}

TEST_CASE("gamma-space transport stays inside its bound") {
  unsetenv("HFT_OUTPUT_DIR");
  ExperimentConfig cfg = base_laguerre("transport_lag");
  REQUIRE(cmd_transport(cfg) == 0);
  const RunSummary sum =
      summary_from_json(slurp(fs::path(cfg.output_dir) / "summary.json"));
  CHECK(sum.pass());
  CHECK(sum.bound == doctest::Approx(9.7364424020473915842).epsilon(1e-12));
  CHECK(sum.lipschitz <= sum.bound + 1e-6);
  CHECK(sum.ks_distance <= 0.01);
  CHECK(sum.monge_sup <= 1e-3);
}

TEST_CASE("tabulated potentials load from csv and flow like their data") {
  unsetenv("HFT_OUTPUT_DIR");
  const fs::path dir = fresh_dir("tabulated");
  std::ostringstream csv;
  csv << "x,V\n";
  for (int i = 0; i <= 50; ++i) {
    const double x = -12.5 + 0.5 * i;
    csv << x << "," << 0.7 * x << "\n";
  }
  const fs::path table = dir / "linear.csv";
  spit(table, csv.str());

  // monotone cubic through linear data reproduces V = 0.7 x exactly
  ExperimentConfig cfg = base_ou("transport_tab");
  cfg.potential = {"tabulated", 0.0, table.string()};
  REQUIRE(cmd_transport(cfg) == 0);
  const RunSummary sum =
      summary_from_json(slurp(fs::path(cfg.output_dir) / "summary.json"));
  CHECK(sum.pass());
  CHECK(sum.K == doctest::Approx(0.7).epsilon(1e-9));
  const TransportTable tab = transport_table_from_csv(
      slurp(fs::path(cfg.output_dir) / "transport.csv"));
  double worst = 0.0;
  for (std::size_t i = 0; i < tab.x.size(); ++i)
    worst = std::max(worst, std::abs(tab.T[i] - (tab.x[i] - 0.7)));
  CHECK(worst <= 1e-4);

  auto reject_table = [&](const std::string& name, const std::string& text) {
    const fs::path bad = dir / name;
    spit(bad, text);
    ExperimentConfig c = base_ou("transport_tab_bad");
    c.potential = {"tabulated", 0.0, bad.string()};
    CHECK_THROWS_AS(cmd_transport(c), ConfigError);
  };
  reject_table("no_header.csv", "0,0\n1,1\n2,2\n3,3\n");
  reject_table("short.csv", "x,V\n0,0\n1,1\n2,2\n");
  reject_table("unsorted.csv", "x,V\n0,0\n2,2\n1,1\n3,3\n");
  reject_table("garbage.csv", "x,V\n0,0\n1,one\n2,2\n3,3\n");
  ExperimentConfig missing = base_ou("transport_tab_missing");
  missing.potential = {"tabulated", 0.0, (dir / "absent.csv").string()};
  CHECK_THROWS_AS(cmd_transport(missing), ConfigError);
}

TEST_CASE("verify-all writes per-check reports and explicit skips") {
  unsetenv("HFT_OUTPUT_DIR");
  ExperimentConfig cfg = base_ou("verify_ou");
  REQUIRE(cmd_verify_all(cfg) == 0);
  const fs::path vdir = fs::path(cfg.output_dir) / "verify";
  const json agg = json::parse(slurp(vdir / "aggregate.json"));
  CHECK(agg.at("status") == "PASS");

  const json* t0 = find_check(agg, "semigroup_inequalities_t0");
  REQUIRE(t0 != nullptr);
  CHECK(t0->at("status") == "SKIPPED");  // schedule had t = 0

  const json* growth = find_check(agg, "growth_profile");
  REQUIRE(growth != nullptr);
  CHECK(growth->at("status") == "SKIPPED");  // half-line statement
  CHECK(growth->at("detail").get<std::string>().find("half-line") !=
        std::string::npos);

  for (const char* name :
       {"semigroup_inequalities", "interpolant_derivative_n0",
        "interpolant_derivative_n1", "interpolant_derivative_n2",
        "herbst_moment", "poincare_logsobolev_transfer", "hessian_envelope"}) {
    const json* c = find_check(agg, name);
    REQUIRE(c != nullptr);
    CHECK(c->at("status") == "PASS");
    CHECK(fs::exists(vdir / (std::string(name) + ".json")));
  }
  const json semi = json::parse(slurp(vdir / "semigroup_inequalities.json"));
  CHECK(semi.at("fingerprint").get<std::string>().find("mehler") !=
        std::string::npos);

  ExperimentConfig lag = base_laguerre("verify_lag");
  lag.grid.n = 21;
  REQUIRE(cmd_verify_all(lag) == 0);
  const json lagg =
      json::parse(slurp(fs::path(lag.output_dir) / "verify/aggregate.json"));
  CHECK(lagg.at("status") == "PASS");
  const json* lgrowth = find_check(lagg, "growth_profile");
  REQUIRE(lgrowth != nullptr);
  CHECK(lgrowth->at("status") == "PASS");  // |T'| <= C sqrt(x) holds here
}

TEST_CASE("the command line maps failures to exit codes") {
  const fs::path dir = fresh_dir("cli");
  auto run_cli = [&](const std::string& args) {
    const std::string cmd =
        std::string(HFT_BINARY) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
  };

  const fs::path bounds_out = dir / "bounds.txt";
  CHECK(run_cli("bounds --rho1 1 --rho2 1 --K 1 > " + bounds_out.string()) ==
        0);
  CHECK(std::strtod(slurp(bounds_out).c_str(), nullptr) ==
        theorem_bound(1.0, 1.0, 1.0));  // 17 digits reproduce the double

  CHECK(run_cli("bounds --rho1 0 --rho2 1 --K 1") == 2);
  CHECK(run_cli("") == 2);                             // missing subcommand
  CHECK(run_cli("transport") == 2);                    // missing --config
  CHECK(run_cli("transport -c /nonexistent.json") == 2);

  const fs::path bad = dir / "bad.json";
  spit(bad, "{ not json");
  CHECK(run_cli("gamma-check -c " + bad.string()) == 2);

  json under = json::parse(kValidOu);  // p below the certification range
  under["space"] = "laguerre";
  under["p"] = 1.0;
  under["backend"] = "fd";
  under["grid"]["lo"] = 0.05;
  const fs::path underp = dir / "p_too_small.json";
  spit(underp, under.dump());
  CHECK(run_cli("gamma-check -c " + underp.string()) == 2);

  json okj = json::parse(kValidOu);
  okj["output_dir"] = (dir / "cli_out").string();
  const fs::path okp = dir / "ok.json";
  spit(okp, okj.dump());
  CHECK(run_cli("gamma-check -c " + okp.string()) == 0);
  CHECK(fs::exists(dir / "cli_out" / "gamma_report.json"));

  json hot = okj;  // override above the true constant: mathematical failure
  hot["rho_override"] = 1.5;
  hot["output_dir"] = (dir / "cli_hot").string();
  const fs::path hotp = dir / "hot.json";
  spit(hotp, hot.dump());
  CHECK(run_cli("gamma-check -c " + hotp.string()) == 1);
}
