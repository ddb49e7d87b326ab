#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <string>
#include <vector>

#include "hft/gamma.hpp"
#include "hft/generator.hpp"
#include "hft/harness.hpp"
#include "hft/jet.hpp"
#include "hft/measures.hpp"
#include "hft/potential.hpp"
#include "hft/semigroup.hpp"
#include "hft/smooth_fn.hpp"
#include "hft/transport.hpp"
#include "hft/verification.hpp"

namespace py = pybind11;
using namespace hft;

namespace {

SemigroupConfig semigroup_config(const std::string& backend,
                                 int quadrature_order, int truncation,
                                 int fd_points, double fd_dt) {
  SemigroupConfig cfg;
  if (backend == "mehler") {
    cfg.backend = Backend::kMehler;
  } else if (backend == "spectral") {
    cfg.backend = Backend::kSpectral;
  } else if (backend == "fd") {
    cfg.backend = Backend::kFiniteDifference;
  } else {
    throw std::invalid_argument("backend must be 'mehler', 'spectral' or 'fd'");
  }
  cfg.quadrature_order = quadrature_order;
  cfg.truncation = truncation;
  cfg.fd_points = fd_points;
  cfg.fd_dt = fd_dt;
  return cfg;
}

CdfOptions cdf_options(int breakpoints, double quad_tol) {
  CdfOptions opt;
  opt.breakpoints = breakpoints;
  opt.quad_tol = quad_tol;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_hft, m) {
  m.doc() =
      "heat-flow transport maps, Bakry-Emery gamma calculus and their "
      "verification battery on the 1d Gaussian and gamma model spaces";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<TruncationError>(m, "TruncationError");

  m.def("theorem_bound", &theorem_bound, py::arg("rho1"), py::arg("rho2"),
        py::arg("K"),
        "Lipschitz bound exp(sqrt(2 pi / rho2) K e^{K^2/(2 rho1)}) of the "
        "heat-flow map");
  m.def("choose_t_max", &choose_t_max, py::arg("K"), py::arg("rho1"),
        py::arg("eps"),
        "flow horizon leaving at most eps of metric displacement unresolved");
  m.def("transfer_constant", &transfer_constant, py::arg("rho1"),
        py::arg("rho2"), py::arg("K"),
        "squared map bound, the constant entering the transferred Poincare "
        "and log-Sobolev inequalities");

  py::class_<Generator1D>(m, "Generator",
                          "diffusion generator L f = a f'' + b f'")
      .def_static("ou", &Generator1D::ou,
                  "Ornstein-Uhlenbeck: a = 1, b = -x, standard Gaussian")
      .def_static("laguerre", &Generator1D::laguerre, py::arg("p"),
                  "Laguerre: a = x, b = p - x, gamma(p) measure")
      .def_property_readonly("rho1", &Generator1D::rho1)
      .def_property_readonly("rho2", &Generator1D::rho2)
      .def_property_readonly("p", &Generator1D::p)
      .def("density", &Generator1D::density, py::arg("x"))
      .def("metric_coord", &Generator1D::metric_coord, py::arg("x"))
      .def("from_metric_coord", &Generator1D::from_metric_coord,
           py::arg("zeta"))
      .def("metric_distance", &Generator1D::metric_distance, py::arg("x"),
           py::arg("y"))
      .def(
          "integrate_mu",
          [](const Generator1D& g, const std::function<double(double)>& f) {
            return g.integrate_mu(f);
          },
          py::arg("f"), "integral of f against the invariant measure")
      .def("__repr__", [](const Generator1D& g) {
        switch (g.kind()) {
          case Generator1D::Kind::kOu:
            return std::string("Generator.ou()");
          case Generator1D::Kind::kLaguerre:
            return "Generator.laguerre(p=" + std::to_string(g.p()) + ")";
          default:
            return std::string("Generator.custom(...)");
        }
      });

  py::class_<SmoothFn>(m, "SmoothFn",
                       "named test function carrying an exact jet")
      .def_property_readonly("name", &SmoothFn::name)
      .def("__call__", &SmoothFn::value, py::arg("x"))
      .def("__repr__",
           [](const SmoothFn& f) { return "SmoothFn(" + f.name() + ")"; });
  m.def("ou_test_suite", &ou_test_suite,
        "the ten Gaussian-space verification functions");
  m.def("laguerre_test_suite", &laguerre_test_suite, py::arg("p"),
        "the ten gamma-space verification functions");

  m.def(
      "gamma_n",
      [](const Generator1D& gen, double x, std::vector<double> derivs, int n) {
        const int order = n == 3 ? 4 : std::max(n, 0);
        derivs.resize(
            std::max(derivs.size(), static_cast<std::size_t>(order) + 1), 0.0);
        return gamma_n_recursive(gen, Jet::from_derivatives(x, derivs, order),
                                 n);
      },
      py::arg("gen"), py::arg("x"), py::arg("derivs"), py::arg("n"),
      "iterated carre du champ Gamma_n at x from the derivative list "
      "[f, f', f'', ...]");
  m.def("laguerre_gamma_explicit",
        py::overload_cast<double, double, double, double, double, int>(
            &laguerre_gamma_explicit),
        py::arg("p"), py::arg("x"), py::arg("d1"), py::arg("d2"),
        py::arg("d3"), py::arg("n"),
        "closed-form gamma-space Gamma_n from the first three derivatives");

  py::class_<CurvatureWitness>(m, "CurvatureWitness")
      .def_readonly("x", &CurvatureWitness::x)
      .def_readonly("taylor_coefficients",
                    &CurvatureWitness::taylor_coefficients)
      .def_readonly("gamma_n", &CurvatureWitness::gamma_n)
      .def_readonly("gamma_n_plus_1", &CurvatureWitness::gamma_n_plus_1);
  py::class_<CurvatureReport>(m, "CurvatureReport")
      .def_readonly("n", &CurvatureReport::n)
      .def_readonly("rho", &CurvatureReport::rho)
      .def_readonly("samples", &CurvatureReport::samples)
      .def_readonly("seed", &CurvatureReport::seed)
      .def_readonly("min_margin", &CurvatureReport::min_margin)
      .def_readonly("min_margin_normalized",
                    &CurvatureReport::min_margin_normalized)
      .def_readonly("worst", &CurvatureReport::worst)
      .def_readonly("ok", &CurvatureReport::pass)
      .def("__repr__", [](const CurvatureReport& r) {
        return "CurvatureReport(n=" + std::to_string(r.n) +
               ", ok=" + (r.pass ? std::string("True") : std::string("False")) +
               ", min_margin=" + std::to_string(r.min_margin) + ")";
      });
  m.def("certify_curvature", &certify_curvature, py::arg("gen"), py::arg("n"),
        py::arg("rho"), py::arg("samples") = 10000,
        py::arg("seed") = 20240614,
        "sampled margins of Gamma_{n+1} >= rho Gamma_n");

  py::class_<SemigroupEvaluator>(m, "Semigroup",
                                 "evaluator for (P_t f)(x) and derivatives")
      .def(py::init([](const Generator1D& gen, const std::string& backend,
                       int quadrature_order, int truncation, int fd_points,
                       double fd_dt) {
             return SemigroupEvaluator(
                 gen, semigroup_config(backend, quadrature_order, truncation,
                                       fd_points, fd_dt));
           }),
           py::arg("gen"), py::arg("backend"),
           py::arg("quadrature_order") = 128, py::arg("truncation") = 200,
           py::arg("fd_points") = 4097, py::arg("fd_dt") = 1e-3)
      .def("pt", &SemigroupEvaluator::pt, py::arg("f"), py::arg("t"),
           py::arg("x"))
      .def("grad_pt", &SemigroupEvaluator::grad_pt, py::arg("f"), py::arg("t"),
           py::arg("x"))
      .def("deriv_pt", &SemigroupEvaluator::deriv_pt, py::arg("f"),
           py::arg("t"), py::arg("x"), py::arg("k"))
      .def(
          "pt_of_values",
          [](const SemigroupEvaluator& ev,
             const std::function<double(double)>& f, double t, double x) {
            return ev.pt_of_values(f, t, x);
          },
          py::arg("f"), py::arg("t"), py::arg("x"),
          "P_t applied to a plain callable (value path, no derivatives)")
      .def_property_readonly("max_derivative_order",
                             &SemigroupEvaluator::max_derivative_order)
      .def_property_readonly("generator", &SemigroupEvaluator::generator);

  py::class_<Potential>(m, "Potential",
                        "log-density perturbation V with d nu = e^{-V} d mu")
      .def_static("zero", &Potential::zero)
      .def_static("linear", &Potential::linear, py::arg("K"))
      .def_static("sqrt_slope", &Potential::sqrt_slope, py::arg("c"))
      .def_static("tabulated", &Potential::tabulated, py::arg("xs"),
                  py::arg("vs"))
      .def("V", &Potential::V, py::arg("x"))
      .def("dV", &Potential::dV, py::arg("x"))
      .def_property_readonly("certified_k", &Potential::certified_k);
  m.def("normalize_potential", &normalize_potential, py::arg("gen"),
        py::arg("pot"), py::arg("tol") = 1e-9);
  m.def("certify_lipschitz", &certify_lipschitz, py::arg("gen"),
        py::arg("pot"), py::arg("n") = 4096,
        "sup sqrt(a) |V'| over the quadrature window");

  py::class_<HeatFlowProblem>(m, "HeatFlowProblem")
      .def_readonly("gen", &HeatFlowProblem::gen)
      .def_readonly("K", &HeatFlowProblem::K)
      .def_readonly("t_max", &HeatFlowProblem::t_max)
      .def_readonly("grid", &HeatFlowProblem::grid)
      .def_readonly("evaluator", &HeatFlowProblem::evaluator)
      .def_readonly("pot", &HeatFlowProblem::pot);
  m.def(
      "make_problem",
      [](const Generator1D& gen, const Potential& pot,
         const std::string& backend, int quadrature_order, int truncation,
         double ode_tol, double eps_horizon, int grid_points,
         std::vector<double> grid) {
        TransportOptions opt;
        opt.ode_tol = ode_tol;
        opt.eps_horizon = eps_horizon;
        opt.grid_points = grid_points;
        opt.grid = std::move(grid);
        return make_problem(
            gen, pot,
            semigroup_config(backend, quadrature_order, truncation, 4097,
                             1e-3),
            opt);
      },
      py::arg("gen"), py::arg("pot"), py::arg("backend"),
      // transport problems evaluate P_t of a perturbed density near t = 0,
      // where the default 200-term expansion can honestly refuse; 400 is the
      // setting the command-line harness fixes for the same job
      py::arg("quadrature_order") = 128, py::arg("truncation") = 400,
      py::arg("ode_tol") = 1e-8, py::arg("eps_horizon") = 1e-6,
      py::arg("grid_points") = 201, py::arg("grid") = std::vector<double>{});
  m.def("velocity", &velocity, py::arg("prob"), py::arg("t"), py::arg("x"),
        "d/dx of V_t = -log P_t e^{-V}");
  m.def("transport_eval", &transport_eval, py::arg("prob"), py::arg("x"),
        "backward characteristic through (t_max, x), the map value T(x)");

  py::class_<TransportMapGrid>(m, "TransportMap")
      .def_readonly("points", &TransportMapGrid::points)
      .def_readonly("values", &TransportMapGrid::values)
      .def_readonly("derivative", &TransportMapGrid::derivative)
      .def_readonly("lipschitz", &TransportMapGrid::lipschitz)
      .def_readonly("bound", &TransportMapGrid::bound)
      .def_readonly("horizon_tail", &TransportMapGrid::horizon_tail)
      .def_readonly("ode_error", &TransportMapGrid::ode_error)
      .def_readonly("clamped", &TransportMapGrid::clamped);
  m.def("transport_grid", &transport_grid, py::arg("prob"),
        "the map over the problem grid; throws if not strictly increasing");
  m.def("velocity_decay_excess", &velocity_decay_excess, py::arg("prob"),
        py::arg("times"), py::arg("xs"),
        "worst sqrt(a)|dx V_t| - K e^{-rho1 t} over the lattice");

  py::class_<HessianCheckResult>(m, "HessianCheckResult")
      .def_readonly("ok", &HessianCheckResult::pass)
      .def_readonly("worst_excess", &HessianCheckResult::worst_excess)
      .def_readonly("worst_ratio", &HessianCheckResult::worst_ratio)
      .def_readonly("t_at", &HessianCheckResult::t_at)
      .def_readonly("x_at", &HessianCheckResult::x_at);
  m.def("hessian_log_pt_bound_check", &hessian_log_pt_bound_check,
        py::arg("prob"), py::arg("times"), py::arg("xs"),
        py::arg("tol") = 1e-6);

  py::class_<MeasureCDF>(m, "MeasureCDF")
      .def_static(
          "from_generator",
          [](const Generator1D& gen, int breakpoints, double quad_tol) {
            return MeasureCDF::from_generator(
                gen, cdf_options(breakpoints, quad_tol));
          },
          py::arg("gen"), py::arg("breakpoints") = 513,
          py::arg("quad_tol") = 1e-12)
      .def_static(
          "perturbed",
          [](const Generator1D& gen, const Potential& pot, int breakpoints,
             double quad_tol) {
            return MeasureCDF::perturbed(gen, pot,
                                         cdf_options(breakpoints, quad_tol));
          },
          py::arg("gen"), py::arg("pot"), py::arg("breakpoints") = 513,
          py::arg("quad_tol") = 1e-12)
      .def("cdf", &MeasureCDF::cdf, py::arg("x"))
      .def("quantile", &MeasureCDF::quantile, py::arg("u"))
      .def("density", &MeasureCDF::density, py::arg("x"))
      .def_property_readonly("total_mass", &MeasureCDF::total_mass);
  m.def("monge_quantile_map", &monge_quantile_map, py::arg("mu"),
        py::arg("nu"), py::arg("x"), "the 1d quantile rearrangement");
  m.def("pushforward_ks_distance", &pushforward_ks_distance, py::arg("xs"),
        py::arg("ts"), py::arg("mu"), py::arg("nu"), py::arg("refine") = 8);

  py::class_<VerificationReport>(m, "VerificationReport")
      .def_readonly("name", &VerificationReport::name)
      .def_readonly("ok", &VerificationReport::pass)
      .def_readonly("margin", &VerificationReport::margin)
      .def_readonly("worst_witness", &VerificationReport::worst_witness)
      .def_readonly("fingerprint", &VerificationReport::fingerprint)
      .def("__repr__", [](const VerificationReport& r) {
        return "VerificationReport(" + r.name +
               ", ok=" + (r.pass ? std::string("True") : std::string("False")) +
               ", margin=" + std::to_string(r.margin) + ")";
      });
  m.def("gamma_n_of_pt", &gamma_n_of_pt, py::arg("ev"), py::arg("f"),
        py::arg("t"), py::arg("x"), py::arg("n"));
  m.def("gamma_n_of_fn", &gamma_n_of_fn, py::arg("gen"), py::arg("f"),
        py::arg("x"), py::arg("n"));
  m.def("semigroup_inequality_suite", &semigroup_inequality_suite,
        py::arg("ev"), py::arg("fns"), py::arg("ts"), py::arg("xs"));
  m.def("interpolant_derivative_check", &interpolant_derivative_check,
        py::arg("ev"), py::arg("f"), py::arg("n"), py::arg("t"), py::arg("ss"),
        py::arg("xs"));
  m.def("herbst_moment_check", &herbst_moment_check, py::arg("ev"),
        py::arg("g"), py::arg("lip"), py::arg("p"), py::arg("q"),
        py::arg("ts"), py::arg("xs"));
  m.def("poincare_transfer_check", &poincare_transfer_check, py::arg("gen"),
        py::arg("pot"), py::arg("transfer"), py::arg("fns"));
  m.def("growth_check", &growth_check, py::arg("map"), py::arg("gen"));
  m.def("compare_transport_to_monge", &compare_transport_to_monge,
        py::arg("map"), py::arg("mu"), py::arg("nu"), py::arg("gen"),
        py::arg("tol") = 1e-3);

  m.def(
      "gamma_check",
      [](const std::string& config_path) {
        return cmd_gamma_check(load_config(config_path));
      },
      py::arg("config_path"),
      "run the gamma-check command; returns the process exit code");
  m.def(
      "transport",
      [](const std::string& config_path) {
        return cmd_transport(load_config(config_path));
      },
      py::arg("config_path"),
      "run the transport command; returns the process exit code");
  m.def(
      "verify_all",
      [](const std::string& config_path) {
        return cmd_verify_all(load_config(config_path));
      },
      py::arg("config_path"),
      "run the verification battery; returns the process exit code");
}
