#include "chima/io.hpp"

#include "chima/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace chima {

namespace {

constexpr const char* kModule = "cli_io";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_double(const std::string& text, double& value) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

double parse_field(const std::string& text, const std::string& source, std::size_t line, std::size_t column) {
  double v = 0.0;
  if (!parse_double(text, v)) {
    std::ostringstream os;
    os << source << ":" << line << ": column " << column + 1 << ": cannot parse '" << text << "' as a number";
    throw DataError(kModule, os.str());
  }
  return v;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(kModule, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(kModule, "cannot write " + path.string());
  return out;
}

Vector single_column(const CsvTable& t, const fs::path& path) {
  if (t.values.cols() != 1) {
    throw DataError(kModule, path.string() + ": expected a single column, found " + std::to_string(t.values.cols()));
  }
  return t.values.col(0);
}

void require_rows(Index expected, Index got, const fs::path& ref, const fs::path& other) {
  if (expected != got) {
    std::ostringstream os;
    os << "row count mismatch: " << ref.string() << " has " << expected << " rows but " << other.string()
       << " has " << got;
    throw DataError(kModule, os.str());
  }
}

std::string join(const std::vector<std::string>& names, char sep) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += sep;
    out += names[i];
  }
  return out;
}

Dataset load_combined(const AnalyzeConfig& config) {
  const CsvTable table = read_csv(*config.combined);
  if (!config.column_map) throw ConfigError(kModule, "combined CSV mode needs a column map file");

  std::ifstream in = open_input(*config.column_map);
  std::string exposure_col, outcome_col;
  std::vector<std::string> covariate_cols;
  std::set<std::string> ignored;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(kModule, config.column_map->string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key == "exposure") {
      exposure_col = value;
    } else if (key == "outcome") {
      outcome_col = value;
    } else if (key == "covariates") {
      for (auto& c : split(value, ',')) covariate_cols.push_back(c);
    } else if (key == "ignore") {
      for (auto& c : split(value, ',')) ignored.insert(c);
    } else {
      throw ConfigError(kModule, config.column_map->string() + ":" + std::to_string(line_no) + ": unknown role '" + key + "'");
    }
  }
  if (exposure_col.empty() || outcome_col.empty()) {
    throw ConfigError(kModule, "column map must name both exposure and outcome columns");
  }

  std::map<std::string, Index> position;
  for (std::size_t c = 0; c < table.header.size(); ++c) position[table.header[c]] = static_cast<Index>(c);
  auto column = [&](const std::string& name) {
    const auto it = position.find(name);
    if (it == position.end()) throw DataError(kModule, "column '" + name + "' not found in " + config.combined->string());
    return it->second;
  };

  Dataset raw;
  raw.exposure = table.values.col(column(exposure_col));
  raw.outcome = table.values.col(column(outcome_col));
  std::set<Index> claimed{column(exposure_col), column(outcome_col)};
  raw.covariates.resize(table.values.rows(), static_cast<Index>(covariate_cols.size()));
  for (std::size_t c = 0; c < covariate_cols.size(); ++c) {
    const Index col = column(covariate_cols[c]);
    raw.covariates.col(static_cast<Index>(c)) = table.values.col(col);
    claimed.insert(col);
  }
  for (const auto& name : ignored) claimed.insert(column(name));

  std::vector<Index> mediator_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!claimed.count(static_cast<Index>(c))) {
      mediator_cols.push_back(static_cast<Index>(c));
      raw.mediator_names.push_back(table.header[c]);
    }
  }
  raw.mediators.resize(table.values.rows(), static_cast<Index>(mediator_cols.size()));
  for (std::size_t c = 0; c < mediator_cols.size(); ++c) raw.mediators.col(static_cast<Index>(c)) = table.values.col(mediator_cols[c]);
  return raw;
}

}  // namespace

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError(kModule, source + ": missing header row");
  table.header = split(trim(line), ',');
  const std::size_t cols = table.header.size();

  std::vector<double> body;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != cols) {
      std::ostringstream os;
      os << source << ":" << line_no << ": expected " << cols << " fields, found " << fields.size();
      throw DataError(kModule, os.str());
    }
    for (std::size_t c = 0; c < cols; ++c) body.push_back(parse_field(fields[c], source, line_no, c));
    ++rows;
  }
  table.values.resize(rows, static_cast<Index>(cols));
  for (Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) table.values(r, static_cast<Index>(c)) = body[static_cast<std::size_t>(r) * cols + c];
  }
  return table;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values) {
  out << join(header, ',') << '\n';
  char buf[40];
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

Dataset load_dataset(const AnalyzeConfig& config) {
  Dataset raw;
  if (config.combined) {
    raw = load_combined(config);
  } else {
    const CsvTable med = read_csv(config.mediators);
    const CsvTable exp = read_csv(config.exposure);
    const CsvTable out = read_csv(config.outcome);
    require_rows(med.values.rows(), exp.values.rows(), config.mediators, config.exposure);
    require_rows(med.values.rows(), out.values.rows(), config.mediators, config.outcome);
    raw.mediators = med.values;
    raw.mediator_names = med.header;
    raw.exposure = single_column(exp, config.exposure);
    raw.outcome = single_column(out, config.outcome);
    if (config.covariates) {
      const CsvTable cov = read_csv(*config.covariates);
      require_rows(med.values.rows(), cov.values.rows(), config.mediators, *config.covariates);
      raw.covariates = cov.values;
    }
  }
  Dataset data = validate_dataset(std::move(raw));
  if (config.chima.standardize) {
    for (Index j = 0; j < data.p(); ++j) {
      const auto col = data.mediators.col(j);
      if ((col.array() == col(0)).all()) {
        throw DataError(kModule, "mediator '" + data.mediator_names[static_cast<std::size_t>(j)] +
                                     "' is constant; cannot standardize");
      }
    }
  }
  return data;
}

DiscoveryReport make_report(const Dataset& data, const ChimaResult& result, double elapsed_seconds) {
  DiscoveryReport rep;
  rep.n = data.n();
  rep.p = data.p();
  rep.candidates = static_cast<Index>(result.candidates.size());
  rep.fdr = result.fdr;
  rep.discoveries = static_cast<Index>(result.discoveries.size());
  rep.elapsed_seconds = elapsed_seconds;

  std::vector<TestRecord> tests = result.tests;
  std::stable_sort(tests.begin(), tests.end(), [](const TestRecord& a, const TestRecord& b) {
    if (a.p_max != b.p_max) return a.p_max < b.p_max;
    return a.index < b.index;
  });
  for (const auto& t : tests) {
    ReportRow row;
    row.mediator = data.mediator_names[static_cast<std::size_t>(t.index)];
    row.alpha_hat = t.alpha_hat;
    row.se_alpha = t.se_alpha;
    row.p_alpha = t.p_alpha;
    row.beta_hat = t.beta_hat;
    row.se_beta = t.se_beta;
    row.p_beta = t.p_beta;
    row.p_max = t.p_max;
    row.significant = t.p_max <= result.fdr.t_hat;
    rep.rows.push_back(row);
  }
  return rep;
}

void write_report_tsv(std::ostream& out, const DiscoveryReport& report) {
  out << "mediator\talpha_hat\tse_alpha\tp_alpha\tbeta_hat\tse_beta\tp_beta\tp_max\tsignificant\n";
  for (const auto& r : report.rows) {
    out << r.mediator << '\t' << format_g6(r.alpha_hat) << '\t' << format_g6(r.se_alpha) << '\t'
        << format_g6(r.p_alpha) << '\t' << format_g6(r.beta_hat) << '\t' << format_g6(r.se_beta) << '\t'
        << format_g6(r.p_beta) << '\t' << format_g6(r.p_max) << '\t' << (r.significant ? "true" : "false") << '\n';
  }
}

void write_summary(std::ostream& out, const DiscoveryReport& report, const AnalyzeConfig* config) {
  out << "n=" << report.n << '\n'
      << "p=" << report.p << '\n'
      << "candidates=" << report.candidates << '\n'
      << "pi00=" << format_g6(report.fdr.pi00) << '\n'
      << "pi01=" << format_g6(report.fdr.pi01) << '\n'
      << "pi10=" << format_g6(report.fdr.pi10) << '\n'
      << "lambda=" << format_g6(report.fdr.lambda) << '\n'
      << "alpha=" << format_g6(report.fdr.alpha_level) << '\n'
      << "t_hat=" << format_g6(report.fdr.t_hat) << '\n'
      << "discoveries=" << report.discoveries << '\n';
  if (config) {
    out << "k=" << format_g6(config->chima.k) << '\n'
        << "delta=" << format_g6(config->chima.delta) << '\n'
        << "ao_design=" << ao_design_name(config->chima.ao_design) << '\n'
        << "sigma_eps=" << sigma_eps_method_name(config->chima.sigma_eps_method) << '\n'
        << "intercept=" << (config->chima.intercept ? "true" : "false") << '\n'
        << "standardize=" << (config->chima.standardize ? "true" : "false") << '\n'
        << "seed=" << config->seed << '\n';
  }
  out << "elapsed_seconds=" << format_g6(report.elapsed_seconds) << '\n';
}

DiscoveryReport parse_report_tsv(std::istream& in, const std::string& source) {
  static const std::vector<std::string> expected{"mediator", "alpha_hat", "se_alpha", "p_alpha", "beta_hat",
                                                 "se_beta",  "p_beta",    "p_max",    "significant"};
  std::string line;
  if (!std::getline(in, line) || split(trim(line), '\t') != expected) {
    throw DataError(kModule, source + ": not a discovery report (bad header)");
  }
  DiscoveryReport rep;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), '\t');
    if (f.size() != expected.size()) {
      throw DataError(kModule, source + ":" + std::to_string(line_no) + ": expected 9 fields");
    }
    ReportRow r;
    r.mediator = f[0];
    double* slots[] = {&r.alpha_hat, &r.se_alpha, &r.p_alpha, &r.beta_hat, &r.se_beta, &r.p_beta, &r.p_max};
    for (std::size_t c = 0; c < 7; ++c) *slots[c] = parse_field(f[c + 1], source, line_no, c + 1);
    if (f[8] != "true" && f[8] != "false") {
      throw DataError(kModule, source + ":" + std::to_string(line_no) + ": significant must be true or false");
    }
    r.significant = f[8] == "true";
    rep.rows.push_back(std::move(r));
    rep.discoveries += rep.rows.back().significant ? 1 : 0;
  }
  rep.candidates = static_cast<Index>(rep.rows.size());
  return rep;
}

DiscoveryReport read_report(const fs::path& tsv, const std::optional<fs::path>& summary) {
  std::ifstream in = open_input(tsv);
  DiscoveryReport rep = parse_report_tsv(in, tsv.string());
  if (summary) {
    std::ifstream s = open_input(*summary);
    std::string line;
    std::map<std::string, std::string> kv;
    while (std::getline(s, line)) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto num = [&](const char* key, double fallback) {
      const auto it = kv.find(key);
      double v = fallback;
      if (it != kv.end() && !parse_double(it->second, v)) {
        throw DataError(kModule, summary->string() + ": bad value for " + key);
      }
      return v;
    };
    rep.n = static_cast<Index>(num("n", 0));
    rep.p = static_cast<Index>(num("p", 0));
    rep.candidates = static_cast<Index>(num("candidates", static_cast<double>(rep.candidates)));
    rep.fdr.pi00 = num("pi00", 0);
    rep.fdr.pi01 = num("pi01", 0);
    rep.fdr.pi10 = num("pi10", 0);
    rep.fdr.lambda = num("lambda", 0.5);
    rep.fdr.alpha_level = num("alpha", 0.05);
    rep.fdr.t_hat = num("t_hat", 0);
    rep.discoveries = static_cast<Index>(num("discoveries", static_cast<double>(rep.discoveries)));
    rep.elapsed_seconds = num("elapsed_seconds", 0);
  }
  return rep;
}

void write_report_files(const fs::path& out_dir, const DiscoveryReport& report, const AnalyzeConfig* config) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError(kModule, "cannot create output directory " + out_dir.string());
  {
    std::ofstream out = open_output(out_dir / "report.tsv");
    write_report_tsv(out, report);
  }
  std::ofstream out = open_output(out_dir / "summary.txt");
  write_summary(out, report, config);
}

SetComparison compare_name_sets(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  SetComparison cmp;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(cmp.both));
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(cmp.only_a));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(cmp.only_b));
  return cmp;
}

SetComparison compare_discovery_sets(const DiscoveryReport& a, const DiscoveryReport& b) {
  auto names = [](const DiscoveryReport& r) {
    std::vector<std::string> out;
    for (const auto& row : r.rows) {
      if (row.significant) out.push_back(row.mediator);
    }
    return out;
  };
  return compare_name_sets(names(a), names(b));
}

void write_comparison(std::ostream& out, const SetComparison& cmp) {
  out << "only_a=" << cmp.only_a.size() << '\n'
      << "only_b=" << cmp.only_b.size() << '\n'
      << "both=" << cmp.both.size() << '\n'
      << "only_a_names=" << join(cmp.only_a, ',') << '\n'
      << "only_b_names=" << join(cmp.only_b, ',') << '\n'
      << "both_names=" << join(cmp.both, ',') << '\n';
}

SimScenario parse_scenario(std::istream& in, const std::string& source) {
  SimScenario sc;
  std::string structure = "cs";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(kModule, where() + "expected key=value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    auto number = [&] {
      double v = 0;
      if (!parse_double(value, v)) throw ConfigError(kModule, where() + "invalid value '" + value + "' for " + key);
      return v;
    };
    auto integer = [&] {
      const double v = number();
      if (v != static_cast<double>(static_cast<long long>(v))) {
        throw ConfigError(kModule, where() + key + " must be an integer");
      }
      return static_cast<long long>(v);
    };

    if (key == "n") sc.n = integer();
    else if (key == "p") sc.p = integer();
    else if (key == "s11") sc.s11 = static_cast<int>(integer());
    else if (key == "structure") structure = value;
    else if (key == "rho") sc.structure.rho = number();
    else if (key == "r") sc.structure.factors = static_cast<int>(integer());
    else if (key == "tau") sc.structure.tau = number();
    else if (key == "coef_low") sc.coef_low = number();
    else if (key == "coef_high") sc.coef_high = number();
    else if (key == "gamma") sc.gamma = number();
    else if (key == "x_variance") sc.x_variance = number();
    else if (key == "x_param") {
      if (value != "variance" && value != "sd") throw ConfigError(kModule, where() + "x_param must be variance or sd");
      sc.x_param_is_sd = value == "sd";
    }
    else if (key == "eps_variance") sc.eps_variance = number();
    else if (key == "replications") sc.replications = static_cast<int>(integer());
    else if (key == "alpha") sc.alpha = number();
    else if (key == "seed") {
      std::uint64_t seed = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (ec != std::errc() || ptr != value.data() + value.size()) throw ConfigError(kModule, where() + "invalid seed");
      sc.seed = seed;
    }
    else if (key == "k") sc.k = number();
    else if (key == "delta") sc.delta = number();
    else if (key == "lambda") sc.lambda = number();
    else if (key == "d") sc.d = integer();
    else if (key == "baseline_d") sc.baseline_d = integer();
    else if (key == "ao_design") sc.ao_design = parse_ao_design(value);
    else if (key == "sigma_eps") sc.sigma_eps_method = parse_sigma_eps_method(value);
    else if (key == "methods") {
      sc.methods.clear();
      for (const auto& m : split(value, ',')) sc.methods.push_back(parse_method(m));
    }
    else if (key == "bias_diagnostic") {
      if (value != "true" && value != "false") throw ConfigError(kModule, where() + "bias_diagnostic must be true or false");
      sc.bias_diagnostic = value == "true";
    }
    else throw ConfigError(kModule, where() + "unknown key '" + key + "'");
  }

  if (structure == "cs") sc.structure.kind = CovarianceKind::compound_symmetry;
  else if (structure == "toeplitz") sc.structure.kind = CovarianceKind::toeplitz;
  else if (structure == "factor") sc.structure.kind = CovarianceKind::factor;
  else throw ConfigError(kModule, source + ": unknown structure '" + structure + "' (cs, toeplitz, factor)");
  sc.validate();
  return sc;
}

SimScenario read_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(kModule, "cannot open scenario file " + path.string());
  return parse_scenario(in, path.string());
}

void write_sim_tsv_header(std::ostream& out) {
  out << "structure\ts11\tmethod\tmetric\tmean\treplications\n";
}

void write_sim_tsv_rows(std::ostream& out, const SimResult& result) {
  const auto& sc = result.scenario;
  auto row = [&](const MethodSummary& s, const char* metric, double value) {
    out << sc.structure.label() << '\t' << sc.s11 << '\t' << method_name(s.method) << '\t' << metric << '\t'
        << format_g6(value) << '\t' << sc.replications << '\n';
  };
  for (const auto& s : result.summaries) {
    row(s, "screening_rate", s.screening_rate);
    if (s.has_inference) {
      row(s, "power", s.power);
      row(s, "fdp", s.fdp);
    }
  }
}

}  // namespace chima
