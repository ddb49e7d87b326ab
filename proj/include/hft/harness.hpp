#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hft {

/// Invalid configuration, schema violation, or file IO problem.  The CLI
/// maps this to exit code 2; mathematical check failures exit with 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
};

struct ToleranceSpec {
  double ode_tol = 1e-8;
  double quadrature_tol = 1e-12;
  double horizon_eps = 1e-6;
};

struct PotentialSpec {
  std::string kind;  // "linear" | "sqrt" | "tabulated"
  double K_or_c = 0.0;
  std::string table_path;  // tabulated only: CSV with an "x,V" header
};

/**
 * One experiment, loaded from a JSON file and schema-validated before any
 * computation runs.  Validation is strict: unknown keys, backend/space
 * mismatches (mehler is Gaussian-only, spectral is gamma-only), laguerre
 * p < 3/2, sqrt potentials on the real line, non-positive tolerances and
 * malformed schedules are all rejected with ConfigError.
 */
struct ExperimentConfig {
  std::string space;  // "ou" | "laguerre"
  double p = 0.0;     // laguerre only; must be >= 1.5
  PotentialSpec potential;
  std::string backend;  // "mehler" | "spectral" | "fd"
  GridSpec grid;
  ToleranceSpec tolerances;
  std::vector<double> t_schedule;  // entries >= 0; t = 0 rows are SKIPPED
  std::uint64_t seed = 20240614;
  std::string output_dir = "out";
  double rho_override = 0.0;  // 0 means "use the generator's constant"
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Directory reports are written to: the HFT_OUTPUT_DIR environment variable
/// when set, the config's output_dir otherwise.  Created on demand.
std::string resolve_output_dir(const ExperimentConfig& cfg);

struct CheckEntry {
  std::string name;
  std::string status;  // "PASS" | "FAIL" | "SKIPPED"
  double margin = 0.0;
  std::string detail;
};

/**
 * Everything a transport run reports.  Serialized to summary.json with
 * shortest-round-trip number formatting, so a reload reproduces every field
 * bit for bit.  Wall-clock timings live in a separate timings.json: they are
 * the one intentionally non-deterministic output and never touch summary.json
 * (repeat runs of the same config produce byte-identical summaries).
 */
struct RunSummary {
  ExperimentConfig config;
  double K = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double t_max = 0.0;
  double bound = 0.0;      // theorem Lipschitz bound for (rho1, rho2, K)
  double lipschitz = 0.0;  // measured over the grid, generator metric
  double ks_distance = 0.0;
  double monge_sup = 0.0;  // sup discrepancy vs the quantile map, reported
  double ode_error = 0.0;
  double horizon_tail = 0.0;
  int clamped = 0;
  std::vector<CheckEntry> checks;

  bool pass() const;  // no FAIL entries (SKIPPED does not fail a run)
};

std::string summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const std::string& text);

/// Columns of transport.csv.  The writer prints 17 significant digits with
/// ',' separators, '.' decimal points and LF line endings; reading the text
/// back recovers each double exactly.
struct TransportTable {
  std::vector<double> x, T, T_prime, monge, abs_diff;
};

std::string transport_table_to_csv(const TransportTable& t);
TransportTable transport_table_from_csv(const std::string& text);

/**
 * Subcommand drivers.  Each writes its reports under resolve_output_dir and
 * returns the process exit code: 0 all checks pass, 1 a mathematical check
 * failed.  Config and IO errors are thrown as ConfigError (exit 2).
 *
 *   gamma-check   carre du champ recursion vs the closed forms on seeded
 *                 random polynomial jets, plus the curvature certification
 *                 margins for Gamma_2 >= rho Gamma_1 and Gamma_3 >= rho
 *                 Gamma_2; writes gamma_report.json.
 *   transport     builds the heat-flow map, gates monotonicity, the measured
 *                 Lipschitz constant against the theorem bound and the
 *                 pushforward Kolmogorov-Smirnov distance; writes
 *                 transport.csv, summary.json, timings.json.
 *   verify-all    the whole battery (semigroup inequalities, interpolant
 *                 derivative identity, exponential moment transfer, Poincare
 *                 and log-Sobolev transfer, gamma growth profile, hessian
 *                 envelope); writes verify/<check>.json and
 *                 verify/aggregate.json.
 */
int cmd_gamma_check(const ExperimentConfig& cfg);
int cmd_transport(const ExperimentConfig& cfg);
int cmd_verify_all(const ExperimentConfig& cfg);

}  // namespace hft
