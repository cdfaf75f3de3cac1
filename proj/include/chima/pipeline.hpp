#pragma once

// End-to-end mediation analysis: screen, test each candidate, control FDR.

#include "chima/ao_inference.hpp"
#include "chima/composite_fdr.hpp"
#include "chima/types.hpp"

#include <functional>
#include <vector>

namespace chima {

struct ChimaConfig {
  double k = 1.0;
  double delta = 1.0;
  Index d = 0;  // 0 selects ceil(n / log n)
  double lambda = 0.5;
  double alpha = 0.05;
  // Centre Y and every column of Z before screening/AO and add an intercept to
  // every regression. Off for data generated without intercepts.
  bool intercept = false;
  // Scale Z columns to unit sample SD before RHOLP only.
  bool standardize = false;
  AoDesign ao_design = AoDesign::candidates;
  SigmaEpsMethod sigma_eps_method = SigmaEpsMethod::refitted_cross_validation;
  int threads = 1;
};

struct ChimaResult {
  Vector beta_tilde;  // RHOLP mediator coefficients, length p
  CandidateSet candidates;
  std::vector<TestRecord> tests;  // one per candidate, in candidate order
  double sigma_eps2 = 0.0;
  std::vector<Index> dropped_from_refit;
  Index projection_fallbacks = 0;
  FdrModel fdr;
  std::vector<Index> discoveries;  // ascending mediator index
};

// Called once per candidate with its projection direction. Must be safe to
// call concurrently when config.threads > 1.
using ProjectionObserver = std::function<void(Index j, const Vector& v)>;

ChimaResult run_chima(const Dataset& data, const ChimaConfig& config, const ProjectionObserver& observer = {});

}  // namespace chima
