#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spl/latent.hpp"
#include "spl/regularizer.hpp"
#include "spl/rng.hpp"

namespace spl {

// Property suites behind `spl verify`. Each suite checks the closed forms
// against an independent route (grid search, quadrature, penalty formulas).

struct SuiteResult {
  std::string name;
  bool pass = true;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::string detail;  // first failure, or a short summary
  double seconds = 0.0;
};

struct VerifyOptions {
  bool quick = false;           // smaller sample counts, for smoke tests
  std::uint64_t seed = 20160101;
  LatentLossFn latent;          // defaults to latent_loss; overridable to inject faults
};

std::vector<std::string> suite_names();

// Throws Errc::InvalidParameter for an unknown suite name.
std::vector<SuiteResult> run_verify(const VerifyOptions& options, const std::optional<std::string>& only = {});

std::string render_verify_table(const std::vector<SuiteResult>& results);

// One regularizer of each kind with representative parameters.
std::vector<RegularizerSpec> regularizer_catalog();

// Same kind with gamma/alpha redrawn log-uniformly in [0.2, 5].
RegularizerSpec randomize_parameters(const RegularizerSpec& reg, Rng& rng);

// Age parameter log-uniform in [0.1, 10]; loss either near a weight breakpoint
// (either side) or uniform over [0, 1.5 * last breakpoint].
struct LossAgeSample {
  double loss = 0.0;
  double lambda = 1.0;
};
LossAgeSample sample_loss_age(const RegularizerSpec& reg, Rng& rng);

}  // namespace spl
