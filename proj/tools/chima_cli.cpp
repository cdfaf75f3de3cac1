// chima: command-line front end.
//
//   chima analyze   --exposure X.csv --mediators M.csv --outcome Y.csv [--covariates C.csv] --out DIR
//   chima analyze   --combined data.csv --column-map roles.txt --out DIR
//   chima simulate  scenario.txt [more.txt ...] --out results.tsv
//   chima generate  scenario.txt --out DIR
//   chima compare   A/report.tsv B/report.tsv [--out overlap.txt]
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include "chima/errors.hpp"
#include "chima/io.hpp"
#include "chima/pipeline.hpp"
#include "chima/simulation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_analyze(const chima::AnalyzeConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  std::cerr << "chima: loading data\n";
  const chima::Dataset data = chima::load_dataset(config);
  std::cerr << "chima: n=" << data.n() << " p=" << data.p() << " q=" << data.q() << "\n";
  const chima::ChimaResult result = chima::run_chima(data, config.chima);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const chima::DiscoveryReport report = chima::make_report(data, result, elapsed);
  chima::write_report_files(config.out_dir, report, &config);
  if (!result.dropped_from_refit.empty()) {
    std::cerr << "chima: " << result.dropped_from_refit.size()
              << " collinear candidate(s) dropped from the residual variance refit\n";
  }
  std::cerr << "chima: " << report.candidates << " candidates, " << report.discoveries
            << " discoveries at t_hat=" << chima::format_g6(report.fdr.t_hat) << "\n";
  return kOk;
}

int run_simulate(const std::vector<std::string>& scenarios, const std::string& out_path,
                 std::optional<std::uint64_t> seed, int threads) {
  std::vector<chima::SimScenario> parsed;
  for (const auto& path : scenarios) {
    parsed.push_back(chima::read_scenario(path));
    if (seed) parsed.back().seed = *seed;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw chima::DataError("cli_io", "cannot write " + out_path);
  chima::write_sim_tsv_header(out);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const auto& sc = parsed[i];
    std::cerr << "chima: " << scenarios[i] << ": " << sc.structure.label() << " s11=" << sc.s11 << " n=" << sc.n
              << " p=" << sc.p << " x" << sc.replications << "\n";
    const chima::SimResult result = chima::run_study(sc, threads);
    for (const auto& line : result.failure_log) std::cerr << "chima: redraw: " << line << "\n";
    if (sc.bias_diagnostic) {
      long checks = 0, violations = 0;
      for (const auto& rec : result.replications) {
        checks += rec.bias_checks;
        violations += rec.bias_violations;
      }
      std::cerr << "chima: bias diagnostic: " << violations << " of " << checks
                << " active candidates with |R_j| >= |beta_j|/2\n";
    }
    chima::write_sim_tsv_rows(out, result);
  }
  return kOk;
}

int run_generate(const std::string& scenario_path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  chima::SimScenario sc = chima::read_scenario(scenario_path);
  if (seed) sc.seed = *seed;
  chima::Rng rng = chima::make_substream(sc.seed, 0);
  const chima::ModelTruth truth = chima::gen_coefficients(sc, rng);
  const chima::Dataset data = chima::gen_dataset(sc, truth, rng);

  const chima::fs::path dir(out_dir);
  chima::fs::create_directories(dir);
  auto write = [&](const char* name, const std::vector<std::string>& header, const chima::Matrix& values) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw chima::DataError("cli_io", "cannot write " + (dir / name).string());
    chima::write_csv(out, header, values);
  };
  write("exposure.csv", {"X"}, data.exposure);
  write("mediators.csv", data.mediator_names, data.mediators);
  write("outcome.csv", {"Y"}, data.outcome);

  std::ofstream truth_out(dir / "truth.tsv", std::ios::binary);
  truth_out << "mediator\talpha\tbeta\tactive\n";
  for (chima::Index j = 0; j < data.p(); ++j) {
    if (truth.alpha(j) == 0.0 && truth.beta(j) == 0.0) continue;
    const bool active = truth.alpha(j) != 0.0 && truth.beta(j) != 0.0;
    truth_out << data.mediator_names[static_cast<std::size_t>(j)] << '\t' << chima::format_g6(truth.alpha(j)) << '\t'
              << chima::format_g6(truth.beta(j)) << '\t' << (active ? "true" : "false") << '\n';
  }
  return kOk;
}

int run_compare(const std::string& a, const std::string& b, const std::string& out_path) {
  const auto cmp = chima::compare_discovery_sets(chima::read_report(a), chima::read_report(b));
  if (out_path.empty()) {
    chima::write_comparison(std::cout, cmp);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw chima::DataError("cli_io", "cannot write " + out_path);
    chima::write_comparison(out, cmp);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation-aware high-dimensional mediation analysis"};
  app.require_subcommand(1);

  chima::AnalyzeConfig analyze;
  std::string exposure, mediators, outcome, covariates, combined, column_map, analyze_out = ".";
  int threads = default_threads();
  auto* cmd_analyze = app.add_subcommand("analyze", "Screen, test and report significant mediators");
  cmd_analyze->add_option("--exposure", exposure, "Exposure CSV (one column)");
  cmd_analyze->add_option("--mediators", mediators, "Mediator CSV (one column per mediator)");
  cmd_analyze->add_option("--outcome", outcome, "Outcome CSV (one column)");
  cmd_analyze->add_option("--covariates", covariates, "Covariate CSV");
  cmd_analyze->add_option("--combined", combined, "Single CSV holding every column");
  cmd_analyze->add_option("--column-map", column_map, "Role map for --combined");
  cmd_analyze->add_option("--k", analyze.chima.k, "Ridge constant for screening")->check(CLI::NonNegativeNumber);
  cmd_analyze->add_option("--delta", analyze.chima.delta, "Projection regularisation")->check(CLI::PositiveNumber);
  std::string ao_design = "candidates";
  cmd_analyze->add_option("--ao-design", ao_design, "Projection nuisance design: candidates or all")
      ->check(CLI::IsMember({"candidates", "all"}));
  std::string sigma_eps = "rcv";
  cmd_analyze->add_option("--sigma-eps", sigma_eps, "Residual variance estimator: rcv or refit")
      ->check(CLI::IsMember({"rcv", "refit"}));
  cmd_analyze->add_option("--d", analyze.chima.d, "Number of screened candidates (default ceil(n/log n))");
  cmd_analyze->add_option("--lambda", analyze.chima.lambda, "Null-proportion tuning in (0,1)");
  cmd_analyze->add_option("--alpha", analyze.chima.alpha, "Target FDR level");
  cmd_analyze->add_flag("--standardize", analyze.chima.standardize, "Scale columns before screening");
  cmd_analyze->add_flag("--intercept", analyze.chima.intercept, "Centre data and fit intercepts");
  cmd_analyze->add_option("--seed", analyze.seed, "Recorded in the summary");
  cmd_analyze->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd_analyze->add_option("--out", analyze_out, "Output directory");

  std::vector<std::string> scenarios;
  std::string sim_out = "simulation.tsv";
  std::optional<std::uint64_t> sim_seed;
  auto* cmd_sim = app.add_subcommand("simulate", "Run Monte-Carlo scenarios and write metric tables");
  cmd_sim->add_option("scenarios", scenarios, "Scenario files")->required()->check(CLI::ExistingFile);
  cmd_sim->add_option("--out", sim_out, "Output TSV");
  cmd_sim->add_option("--seed", sim_seed, "Override the scenario seed");
  cmd_sim->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string gen_scenario, gen_out = ".";
  std::optional<std::uint64_t> gen_seed;
  auto* cmd_gen = app.add_subcommand("generate", "Write one simulated dataset as CSV files");
  cmd_gen->add_option("scenario", gen_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  cmd_gen->add_option("--out", gen_out, "Output directory");
  cmd_gen->add_option("--seed", gen_seed, "Override the scenario seed");

  std::string report_a, report_b, cmp_out;
  auto* cmd_cmp = app.add_subcommand("compare", "Overlap of two discovery reports");
  cmd_cmp->add_option("report_a", report_a, "First report.tsv")->required();
  cmd_cmp->add_option("report_b", report_b, "Second report.tsv")->required();
  cmd_cmp->add_option("--out", cmp_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*cmd_analyze) {
      if (!combined.empty()) {
        analyze.combined = combined;
        if (!column_map.empty()) analyze.column_map = column_map;
      } else {
        if (exposure.empty() || mediators.empty() || outcome.empty()) {
          std::cerr << "chima analyze: need --exposure, --mediators and --outcome (or --combined)\n";
          return kUsage;
        }
        analyze.exposure = exposure;
        analyze.mediators = mediators;
        analyze.outcome = outcome;
        if (!covariates.empty()) analyze.covariates = covariates;
      }
      analyze.chima.threads = threads;
      analyze.chima.ao_design = chima::parse_ao_design(ao_design);
      analyze.chima.sigma_eps_method = chima::parse_sigma_eps_method(sigma_eps);
      analyze.out_dir = analyze_out;
      return run_analyze(analyze);
    }
    if (*cmd_sim) return run_simulate(scenarios, sim_out, sim_seed, threads);
    if (*cmd_gen) return run_generate(gen_scenario, gen_out, gen_seed);
    if (*cmd_cmp) return run_compare(report_a, report_b, cmp_out);
  } catch (const chima::ConfigError& e) {
    std::cerr << "chima: error: " << e.what() << "\n";
    return kUsage;
  } catch (const chima::NumericalError& e) {
    std::cerr << "chima: error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "chima: error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
