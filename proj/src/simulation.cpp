#include "chima/simulation.hpp"

#include "chima/ao_inference.hpp"
#include "chima/errors.hpp"
#include "chima/parallel.hpp"
#include "chima/screening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>

namespace chima {

namespace {

constexpr const char* kModule = "simulation";
constexpr int kMaxAttempts = 10;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void fill_normal(Eigen::Ref<Matrix> out, Rng& rng) {
  std::normal_distribution<double> normal;
  for (Index c = 0; c < out.cols(); ++c) {
    for (Index r = 0; r < out.rows(); ++r) out(r, c) = normal(rng);
  }
}

Vector normal_vector(Index n, Rng& rng) {
  Vector v(n);
  fill_normal(v, rng);
  return v;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t attempt) {
  return splitmix64(splitmix64(splitmix64(master) ^ replication) ^ attempt);
}

Rng make_substream(std::uint64_t master, std::uint64_t replication, std::uint64_t attempt) {
  return Rng(substream_seed(master, replication, attempt));
}

std::string CovarianceStructure::label() const {
  switch (kind) {
    case CovarianceKind::compound_symmetry:
      return "CS(" + format_number(rho) + ")";
    case CovarianceKind::toeplitz:
      return "Toeplitz(" + format_number(rho) + ")";
    case CovarianceKind::factor:
      return "Factor(r=" + std::to_string(factors) + ",tau=" + format_number(tau) + ")";
  }
  return "unknown";
}

void CovarianceStructure::validate(Index p) const {
  switch (kind) {
    case CovarianceKind::compound_symmetry:
      if (!(rho > -1.0 && rho < 1.0)) throw ConfigError(kModule, "rho must lie in (-1, 1), got " + format_number(rho));
      if (p > 1 && rho < -1.0 / static_cast<double>(p - 1)) {
        throw ConfigError(kModule, "compound symmetry with rho = " + format_number(rho) +
                                       " is not positive definite for p = " + std::to_string(p));
      }
      break;
    case CovarianceKind::toeplitz:
      if (!(rho > -1.0 && rho < 1.0)) throw ConfigError(kModule, "rho must lie in (-1, 1), got " + format_number(rho));
      break;
    case CovarianceKind::factor:
      if (factors < 1) throw ConfigError(kModule, "factor model needs r >= 1");
      if (!(tau > 0.0)) throw ConfigError(kModule, "factor model needs tau > 0");
      break;
  }
}

std::string method_name(Method m) {
  switch (m) {
    case Method::chima:
      return "CHIMA";
    case Method::alpha_sis:
      return "alpha_sis";
    case Method::product_sis:
      return "product_sis";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "CHIMA" || name == "chima") return Method::chima;
  if (name == "alpha_sis") return Method::alpha_sis;
  if (name == "product_sis") return Method::product_sis;
  throw ConfigError(kModule, "unknown method '" + name + "'");
}

void SimScenario::validate() const {
  if (n < 4) throw ConfigError(kModule, "n must be >= 4");
  if (s11 < 2 || s11 % 2 != 0) throw ConfigError(kModule, "s11 must be a positive even number");
  if (2 * static_cast<Index>(s11) > p) throw ConfigError(kModule, "coefficient scheme needs p >= 2 * s11");
  if (!(coef_low > 0.0 && coef_low <= coef_high)) throw ConfigError(kModule, "need 0 < coef_low <= coef_high");
  if (!(x_variance > 0.0) || !(eps_variance > 0.0)) throw ConfigError(kModule, "variances must be positive");
  if (replications < 1) throw ConfigError(kModule, "replications must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(kModule, "alpha must lie in (0, 1)");
  if (!(k >= 0.0)) throw ConfigError(kModule, "k must be >= 0");
  if (!(delta > 0.0)) throw ConfigError(kModule, "delta must be > 0");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError(kModule, "lambda must lie in (0, 1)");
  if (d < 0 || d > p || baseline_d < 0 || baseline_d > p) throw ConfigError(kModule, "screen sizes must lie in [0, p]");
  if (methods.empty()) throw ConfigError(kModule, "no methods selected");
  structure.validate(p);
}

ChimaConfig SimScenario::chima_config() const {
  ChimaConfig c;
  c.k = k;
  c.delta = delta;
  c.d = d;
  c.lambda = lambda;
  c.alpha = alpha;
  c.ao_design = ao_design;
  c.sigma_eps_method = sigma_eps_method;
  c.threads = 1;
  return c;
}

ModelTruth gen_coefficients(const SimScenario& scenario, Rng& rng) {
  const Index p = scenario.p;
  const Index s = scenario.s11;
  if (s < 2 || s % 2 != 0 || 2 * s > p) {
    throw ConfigError(kModule, "coefficient scheme infeasible for p = " + std::to_string(p) +
                                   ", s11 = " + std::to_string(s));
  }
  std::uniform_real_distribution<double> magnitude(scenario.coef_low, scenario.coef_high);
  std::bernoulli_distribution positive(0.5);
  auto draw = [&] {
    const double m = magnitude(rng);
    return positive(rng) ? m : -m;
  };

  Vector alpha = Vector::Zero(p);
  Vector beta = Vector::Zero(p);
  for (Index j = 0; j < s + s / 2; ++j) alpha(j) = draw();
  for (Index j = 0; j < s; ++j) beta(j) = draw();
  for (Index j = s + s / 2; j < 2 * s; ++j) beta(j) = draw();
  return ModelTruth::from_coefficients(std::move(alpha), std::move(beta), scenario.gamma);
}

Matrix gen_errors(const CovarianceStructure& structure, Index n, Index p, Rng& rng) {
  structure.validate(p);
  Matrix u(n, p);
  switch (structure.kind) {
    case CovarianceKind::compound_symmetry: {
      const double rho = structure.rho;
      if (rho >= 0.0) {
        const Vector shared = normal_vector(n, rng);
        fill_normal(u, rng);
        u *= std::sqrt(1.0 - rho);
        u.colwise() += std::sqrt(rho) * shared;
      } else {
        // u = sqrt(1-rho) z + b (sum_j z_j) 1 with p b^2 + 2 sqrt(1-rho) b = rho.
        fill_normal(u, rng);
        const double a = std::sqrt(1.0 - rho);
        const double pd = static_cast<double>(p);
        const double b = (-a + std::sqrt(std::max(0.0, a * a + pd * rho))) / pd;
        const Vector row_sums = u.rowwise().sum();
        u *= a;
        u.colwise() += b * row_sums;
      }
      break;
    }
    case CovarianceKind::toeplitz: {
      const double rho = structure.rho;
      const double innov = std::sqrt(1.0 - rho * rho);
      fill_normal(u, rng);
      for (Index j = 1; j < p; ++j) u.col(j) = rho * u.col(j - 1) + innov * u.col(j);
      break;
    }
    case CovarianceKind::factor: {
      const Index r = structure.factors;
      Matrix loadings(r, p);
      fill_normal(loadings, rng);
      Matrix factors(n, r);
      fill_normal(factors, rng);
      fill_normal(u, rng);
      u *= structure.tau;
      u.noalias() += factors * loadings;
      break;
    }
  }
  return u;
}

Matrix covariance_matrix(const CovarianceStructure& structure, Index p) {
  structure.validate(p);
  Matrix sigma(p, p);
  switch (structure.kind) {
    case CovarianceKind::compound_symmetry:
      sigma.setConstant(structure.rho);
      sigma.diagonal().setOnes();
      return sigma;
    case CovarianceKind::toeplitz:
      for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) sigma(i, j) = std::pow(structure.rho, static_cast<double>(std::abs(i - j)));
      }
      return sigma;
    case CovarianceKind::factor:
      break;
  }
  throw ConfigError(kModule, "factor covariance depends on the drawn loadings");
}

Matrix sample_mvn_cholesky(const Matrix& sigma, Index n, Rng& rng) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError(kModule, "covariance matrix is not positive definite");
  Matrix z(n, sigma.rows());
  fill_normal(z, rng);
  return z * llt.matrixU();
}

Dataset gen_dataset(const SimScenario& scenario, const ModelTruth& truth, Rng& rng, SimDraws* draws) {
  const Index n = scenario.n;
  const Index p = scenario.p;
  if (truth.alpha.size() != p || truth.beta.size() != p) throw ConfigError(kModule, "truth does not match p");

  Dataset data;
  data.mediators = gen_errors(scenario.structure, n, p, rng);
  if (draws) draws->errors = data.mediators;

  const double x_sd = scenario.x_param_is_sd ? scenario.x_variance : std::sqrt(scenario.x_variance);
  data.exposure = x_sd * normal_vector(n, rng);
  const Vector noise = std::sqrt(scenario.eps_variance) * normal_vector(n, rng);
  if (draws) {
    draws->exposure = data.exposure;
    draws->noise = noise;
  }

  for (Index j = 0; j < p; ++j) {
    if (truth.alpha(j) != 0.0) data.mediators.col(j) += truth.alpha(j) * data.exposure;
  }
  data.outcome = truth.gamma * data.exposure + noise;
  for (Index j = 0; j < p; ++j) {
    if (truth.beta(j) != 0.0) data.outcome += truth.beta(j) * data.mediators.col(j);
  }
  data.covariates.resize(n, 0);
  data.mediator_names = synthetic_mediator_names(p);
  return data;
}

double ReplicationMetrics::screening_rate() const {
  return active > 0 ? static_cast<double>(captured) / static_cast<double>(active) : 0.0;
}

double ReplicationMetrics::power() const {
  return active > 0 ? static_cast<double>(true_pos) / static_cast<double>(active) : 0.0;
}

double ReplicationMetrics::fdp() const {
  const Index discoveries = true_pos + false_pos;
  return static_cast<double>(false_pos) / static_cast<double>(std::max<Index>(1, discoveries));
}

ReplicationMetrics evaluate_replication(const ModelTruth& truth, const std::vector<Index>& candidates,
                                        const std::vector<Index>& discoveries) {
  auto is_active = [&](Index j) {
    return std::binary_search(truth.active_set.begin(), truth.active_set.end(), j);
  };
  ReplicationMetrics m;
  m.active = static_cast<Index>(truth.active_set.size());
  for (Index j : candidates) m.captured += is_active(j) ? 1 : 0;
  for (Index j : discoveries) {
    if (is_active(j)) {
      ++m.true_pos;
    } else {
      ++m.false_pos;
    }
  }
  return m;
}

namespace {

ReplicationRecord run_replication(const SimScenario& scenario, Rng& rng) {
  const ModelTruth truth = gen_coefficients(scenario, rng);
  const Dataset data = gen_dataset(scenario, truth, rng);
  const Index baseline_d = scenario.baseline_d > 0 ? scenario.baseline_d : std::min(baseline_screen_size(scenario.n), scenario.p);

  ReplicationRecord rec;
  for (Method m : scenario.methods) {
    switch (m) {
      case Method::chima: {
        std::vector<std::pair<Index, double>> bias;
        std::mutex guard;
        ProjectionObserver observer;
        if (scenario.bias_diagnostic) {
          observer = [&](Index j, const Vector& v) {
            if (std::binary_search(truth.active_set.begin(), truth.active_set.end(), j)) {
              const double r = ao_bias(data, truth, j, v);
              std::lock_guard lock(guard);
              bias.emplace_back(j, r);
            }
          };
        }
        const ChimaResult res = run_chima(data, scenario.chima_config(), observer);
        rec.metrics.push_back(evaluate_replication(truth, res.candidates.indices(), res.discoveries));
        for (const auto& [j, r] : bias) {
          ++rec.bias_checks;
          if (std::abs(r) >= std::abs(truth.beta(j)) / 2.0) ++rec.bias_violations;
        }
        break;
      }
      case Method::alpha_sis:
      case Method::product_sis: {
        const auto strategy = m == Method::alpha_sis ? BaselineStrategy::alpha_sis : BaselineStrategy::product_sis;
        const CandidateSet s = baseline_screen(data, strategy, baseline_d);
        rec.metrics.push_back(evaluate_replication(truth, s.indices(), {}));
        break;
      }
    }
  }
  return rec;
}

}  // namespace

SimResult run_study(const SimScenario& scenario, int threads) {
  scenario.validate();
  SimResult result;
  result.scenario = scenario;
  result.replications.resize(static_cast<std::size_t>(scenario.replications));
  std::vector<std::vector<std::string>> failures(static_cast<std::size_t>(scenario.replications));

  parallel_for(scenario.replications, threads, [&](std::int64_t r) {
    for (int attempt = 0;; ++attempt) {
      Rng rng = make_substream(scenario.seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(attempt));
      try {
        ReplicationRecord rec = run_replication(scenario, rng);
        rec.replication = static_cast<int>(r);
        rec.attempts = attempt + 1;
        result.replications[static_cast<std::size_t>(r)] = std::move(rec);
        return;
      } catch (const Error& e) {
        std::ostringstream os;
        os << "replication " << r << " attempt " << attempt << ": " << e.what();
        failures[static_cast<std::size_t>(r)].push_back(os.str());
        if (attempt + 1 >= kMaxAttempts) throw;
      }
    }
  });

  for (auto& f : failures) {
    result.redraws += static_cast<int>(f.size());
    for (auto& line : f) result.failure_log.push_back(std::move(line));
  }

  const double reps = static_cast<double>(scenario.replications);
  for (std::size_t mi = 0; mi < scenario.methods.size(); ++mi) {
    MethodSummary s;
    s.method = scenario.methods[mi];
    s.has_inference = s.method == Method::chima;
    for (const auto& rec : result.replications) {
      s.screening_rate += rec.metrics[mi].screening_rate() / reps;
      s.power += rec.metrics[mi].power() / reps;
      s.fdp += rec.metrics[mi].fdp() / reps;
    }
    result.summaries.push_back(s);
  }
  return result;
}

}  // namespace chima
