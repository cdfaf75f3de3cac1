#pragma once

// File formats of the command-line front end.
//
//  * CSV input: header row, comma separated, numeric body, scientific
//    notation accepted, no quoting.
//  * Column map (combined-CSV mode): key=value lines
//      exposure=<column>   outcome=<column>
//      covariates=<c1>,<c2>,...   ignore=<c1>,...
//    every other column is a mediator.
//  * Discovery report TSV: mediator, alpha_hat, se_alpha, p_alpha, beta_hat,
//    se_beta, p_beta, p_max, significant; values with 6 significant digits,
//    rows by ascending p_max.
//  * Summary: key=value lines (header block of the report).
//  * Scenario file: key=value lines, '#' starts a comment.
//  * Simulation TSV: structure, s11, method, metric, mean, replications.

#include "chima/pipeline.hpp"
#include "chima/simulation.hpp"
#include "chima/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace chima {

namespace fs = std::filesystem;

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x header.size()
};

CsvTable read_csv(const fs::path& path);
CsvTable parse_csv(std::istream& in, const std::string& source);
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values);

struct AnalyzeConfig {
  fs::path exposure;
  fs::path mediators;
  fs::path outcome;
  std::optional<fs::path> covariates;
  std::optional<fs::path> combined;
  std::optional<fs::path> column_map;
  ChimaConfig chima;
  std::uint64_t seed = 0;  // recorded in the summary; the analysis has no randomness
  fs::path out_dir = ".";
};

// Reads and validates the input files. Rows are matched by position.
Dataset load_dataset(const AnalyzeConfig& config);

struct ReportRow {
  std::string mediator;
  double alpha_hat = 0, se_alpha = 0, p_alpha = 1;
  double beta_hat = 0, se_beta = 0, p_beta = 1;
  double p_max = 1;
  bool significant = false;
};

struct DiscoveryReport {
  Index n = 0;
  Index p = 0;
  Index candidates = 0;
  FdrModel fdr;
  Index discoveries = 0;
  double elapsed_seconds = 0.0;
  std::vector<ReportRow> rows;
};

DiscoveryReport make_report(const Dataset& data, const ChimaResult& result, double elapsed_seconds);
void write_report_tsv(std::ostream& out, const DiscoveryReport& report);
// Header block; `elapsed_seconds` is the only field that varies between runs.
void write_summary(std::ostream& out, const DiscoveryReport& report, const AnalyzeConfig* config = nullptr);
DiscoveryReport parse_report_tsv(std::istream& in, const std::string& source);
DiscoveryReport read_report(const fs::path& tsv, const std::optional<fs::path>& summary = std::nullopt);
// Writes <out_dir>/report.tsv and <out_dir>/summary.txt.
void write_report_files(const fs::path& out_dir, const DiscoveryReport& report, const AnalyzeConfig* config);

struct SetComparison {
  std::vector<std::string> both;
  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
};

// Set arithmetic over the names of significant rows. Name lists are sorted.
SetComparison compare_discovery_sets(const DiscoveryReport& a, const DiscoveryReport& b);
SetComparison compare_name_sets(std::vector<std::string> a, std::vector<std::string> b);
void write_comparison(std::ostream& out, const SetComparison& cmp);

SimScenario parse_scenario(std::istream& in, const std::string& source);
SimScenario read_scenario(const fs::path& path);
void write_sim_tsv_header(std::ostream& out);
void write_sim_tsv_rows(std::ostream& out, const SimResult& result);

// "%.6g"
std::string format_g6(double v);

}  // namespace chima
