#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chima/ao_inference.hpp"
#include "chima/composite_fdr.hpp"
#include "chima/errors.hpp"
#include "chima/io.hpp"
#include "chima/pipeline.hpp"
#include "chima/screening.hpp"
#include "chima/simulation.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace chima;

namespace {

Dataset make_dataset(const Vector& exposure, const Matrix& mediators, const Vector& outcome,
                     const std::optional<Matrix>& covariates, const std::optional<std::vector<std::string>>& names) {
  Dataset d;
  d.exposure = exposure;
  d.mediators = mediators;
  d.outcome = outcome;
  if (covariates) d.covariates = *covariates;
  d.mediator_names = names ? *names : synthetic_mediator_names(mediators.cols());
  return validate_dataset(std::move(d));
}

PairedPValues make_pairs(const std::vector<double>& p_alpha, const std::vector<double>& p_beta) {
  if (p_alpha.size() != p_beta.size()) throw ConfigError("python", "p_alpha and p_beta differ in length");
  std::vector<std::pair<double, double>> v;
  for (std::size_t i = 0; i < p_alpha.size(); ++i) v.emplace_back(p_alpha[i], p_beta[i]);
  return PairedPValues::from_values(v);
}

py::dict result_dict(const Dataset& d, const ChimaResult& r) {
  std::vector<std::string> names;
  std::vector<Index> index;
  std::vector<double> a, sa, pa, b, sb, pb, pmax;
  for (const auto& t : r.tests) {
    index.push_back(t.index);
    names.push_back(d.mediator_names[static_cast<std::size_t>(t.index)]);
    a.push_back(t.alpha_hat);
    sa.push_back(t.se_alpha);
    pa.push_back(t.p_alpha);
    b.push_back(t.beta_hat);
    sb.push_back(t.se_beta);
    pb.push_back(t.p_beta);
    pmax.push_back(t.p_max);
  }
  std::vector<std::string> discovered;
  for (Index j : r.discoveries) discovered.push_back(d.mediator_names[static_cast<std::size_t>(j)]);

  py::dict tests;
  tests["index"] = index;
  tests["mediator"] = names;
  tests["alpha_hat"] = a;
  tests["se_alpha"] = sa;
  tests["p_alpha"] = pa;
  tests["beta_hat"] = b;
  tests["se_beta"] = sb;
  tests["p_beta"] = pb;
  tests["p_max"] = pmax;

  py::dict out;
  out["beta_tilde"] = r.beta_tilde;
  out["candidates"] = r.candidates.indices();
  out["tests"] = tests;
  out["sigma_eps2"] = r.sigma_eps2;
  out["pi00"] = r.fdr.pi00;
  out["pi01"] = r.fdr.pi01;
  out["pi10"] = r.fdr.pi10;
  out["t_hat"] = r.fdr.t_hat;
  out["discoveries"] = r.discoveries;
  out["discovered_names"] = discovered;
  return out;
}

py::dict summary_dict(const SimResult& res) {
  py::list rows;
  for (const auto& s : res.summaries) {
    py::dict row;
    row["method"] = method_name(s.method);
    row["screening_rate"] = s.screening_rate;
    if (s.has_inference) {
      row["power"] = s.power;
      row["fdp"] = s.fdp;
    }
    rows.append(row);
  }
  py::dict out;
  out["label"] = res.scenario.structure.label();
  out["summaries"] = rows;
  out["redraws"] = res.redraws;
  return out;
}

}  // namespace

PYBIND11_MODULE(_chima, m) {
  m.doc() = "Correlation-aware high-dimensional mediation analysis";

  auto base = py::register_exception<Error>(m, "ChimaError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def(
      "analyze",
      [](const Vector& exposure, const Matrix& mediators, const Vector& outcome, const std::optional<Matrix>& covariates,
         const std::optional<std::vector<std::string>>& names, double k, double delta, Index d, double lambda,
         double alpha, bool intercept, bool standardize, const std::string& ao_design, const std::string& sigma_eps,
         int threads) {
        const Dataset data = make_dataset(exposure, mediators, outcome, covariates, names);
        ChimaConfig cfg;
        cfg.k = k;
        cfg.delta = delta;
        cfg.d = d;
        cfg.lambda = lambda;
        cfg.alpha = alpha;
        cfg.intercept = intercept;
        cfg.standardize = standardize;
        cfg.ao_design = parse_ao_design(ao_design);
        cfg.sigma_eps_method = parse_sigma_eps_method(sigma_eps);
        cfg.threads = threads;
        ChimaResult r;
        {
          py::gil_scoped_release release;
          r = run_chima(data, cfg);
        }
        return result_dict(data, r);
      },
      py::arg("exposure"), py::arg("mediators"), py::arg("outcome"), py::arg("covariates") = py::none(),
      py::arg("names") = py::none(), py::arg("k") = 1.0, py::arg("delta") = 1.0, py::arg("d") = 0,
      py::arg("lambda_") = 0.5, py::arg("alpha") = 0.05, py::arg("intercept") = false,
      py::arg("standardize") = false, py::arg("ao_design") = "candidates", py::arg("sigma_eps") = "rcv",
      py::arg("threads") = 1, "Run screening, AO inference and composite-null FDR control.");

  m.def(
      "rholp",
      [](const Vector& exposure, const Matrix& mediators, const Vector& outcome, double k,
         const std::optional<Matrix>& covariates) {
        return rholp_estimates(make_dataset(exposure, mediators, outcome, covariates, std::nullopt), k);
      },
      py::arg("exposure"), py::arg("mediators"), py::arg("outcome"), py::arg("k") = 1.0,
      py::arg("covariates") = py::none(), "Ridge-HOLP coefficients ordered (mediators, exposure, covariates).");

  m.def(
      "marginal_alpha",
      [](const Vector& exposure, const Matrix& mediators, bool intercept) {
        const Dataset d = make_dataset(exposure, mediators, Vector::Zero(exposure.size()), std::nullopt, std::nullopt);
        const MarginalAlphaFit fit = marginal_alpha_fit(d, intercept);
        return py::make_tuple(fit.alpha_hat, fit.se_alpha, fit.sigma_u2);
      },
      py::arg("exposure"), py::arg("mediators"), py::arg("intercept") = false,
      "Per-mediator OLS of M_j on X: (alpha_hat, se_alpha, sigma_u2).");

  m.def("default_screen_size", &default_screen_size, py::arg("n"));

  m.def(
      "null_proportions",
      [](const std::vector<double>& p_alpha, const std::vector<double>& p_beta, double lambda) {
        const NullProportions np = estimate_null_proportions(make_pairs(p_alpha, p_beta), lambda);
        return py::make_tuple(np.pi00, np.pi01, np.pi10);
      },
      py::arg("p_alpha"), py::arg("p_beta"), py::arg("lambda_") = 0.5, "Returns (pi00, pi01, pi10).");

  m.def(
      "fdr_hat",
      [](const std::vector<double>& p_alpha, const std::vector<double>& p_beta, double pi00, double pi01, double pi10,
         double t) { return fdr_hat(make_pairs(p_alpha, p_beta), {pi00, pi01, pi10}, t); },
      py::arg("p_alpha"), py::arg("p_beta"), py::arg("pi00"), py::arg("pi01"), py::arg("pi10"), py::arg("t"));

  m.def(
      "threshold",
      [](const std::vector<double>& p_alpha, const std::vector<double>& p_beta, double lambda, double alpha) {
        return fit_fdr_model(make_pairs(p_alpha, p_beta), lambda, alpha).t_hat;
      },
      py::arg("p_alpha"), py::arg("p_beta"), py::arg("lambda_") = 0.5, py::arg("alpha") = 0.05,
      "Largest t in [0, 1] whose estimated FDR is at most alpha.");

  m.def(
      "simulate",
      [](const std::string& scenario_text, int threads) {
        std::istringstream in(scenario_text);
        const SimScenario sc = parse_scenario(in, "<python>");
        SimResult res;
        {
          py::gil_scoped_release release;
          res = run_study(sc, threads);
        }
        return summary_dict(res);
      },
      py::arg("scenario"), py::arg("threads") = 1, "Run a Monte-Carlo study from key=value scenario text.");
}
