#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spl/kv.hpp"

namespace spl {

enum class RegularizerKind { Hard, Linear, Mixture, Log, Exp };

std::string_view to_string(RegularizerKind kind);
RegularizerKind parse_regularizer_kind(std::string_view name);

// A self-paced regularizer f(v, lambda). `gamma` is set only for Mixture,
// `alpha` only for Log and Exp; the factories enforce positivity.
struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::Hard;
  std::optional<double> gamma;
  std::optional<double> alpha;

  static RegularizerSpec hard();
  static RegularizerSpec linear();
  static RegularizerSpec mixture(double gamma);
  static RegularizerSpec log(double alpha);
  static RegularizerSpec exp(double alpha);

  // Throws Errc::InvalidSpec when the parameter set does not match the kind.
  void validate() const;
  std::string describe() const;

  KvDocument to_kv() const;
  static RegularizerSpec from_kv(const KvDocument& doc);

  bool operator==(const RegularizerSpec&) const = default;
};

// f(v, lambda). Log diverges to +inf at v = 0 (its KL form has log(1/v)).
double evaluate_regularizer(const RegularizerSpec& reg, double v, double lambda);

// Closed-form argmin over v in [0,1] of v*loss + f(v, lambda).
double optimal_weight(const RegularizerSpec& reg, double loss, double lambda);

// Loss thresholds where the weight function changes branch, ascending.
// Hard/Linear/Log/Exp: {lambda}; Mixture: {(lambda*gamma/(lambda+gamma))^2, lambda^2}.
std::vector<double> weight_breakpoints(const RegularizerSpec& reg, double lambda);

// v*loss + f(v, lambda) with v-independent terms dropped. Same argmin as the
// full objective but without the large additive constants of Log/Exp.
double weight_objective(const RegularizerSpec& reg, double v, double loss, double lambda);

inline constexpr int kDefaultBruteForceResolution = 100000;

// Grid search over {0, 1/(r-1), ..., 1}; first minimum wins on ties.
double brute_force_weight(const RegularizerSpec& reg, double loss, double lambda,
                          int resolution = kDefaultBruteForceResolution);

// Axiom checks run against any (f, v*) pair so deliberately broken
// regularizers can be fed through the same checker.
struct RegularizerFunctions {
  std::function<double(double v, double lambda)> value;
  std::function<double(double loss, double lambda)> weight;
  // Hard and Mixture reach both limits exactly at finite losses.
  bool exact_limits = false;
};

RegularizerFunctions functions_of(const RegularizerSpec& reg);

// f with weight obtained by brute-force minimization; for ad-hoc regularizers.
RegularizerFunctions functions_from_value(std::function<double(double, double)> value,
                                          int resolution = 10001);

enum class AxiomCondition { Convexity, LossMonotone, AgeMonotone };

std::string_view to_string(AxiomCondition c);

struct AxiomViolation {
  AxiomCondition condition;
  double loss = 0.0;    // unused for convexity
  double lambda = 0.0;
  double v = 0.0;       // convexity midpoint, or the offending weight
  std::string detail;
};

struct AxiomReport {
  bool convex = true;
  bool loss_monotone = true;
  bool age_monotone = true;
  std::optional<AxiomViolation> first_violation;

  bool all_pass() const { return convex && loss_monotone && age_monotone; }
};

AxiomReport check_axioms(const RegularizerFunctions& fns, std::span<const double> loss_grid,
                         std::span<const double> lambda_grid);
AxiomReport check_axioms(const RegularizerSpec& reg, std::span<const double> loss_grid,
                         std::span<const double> lambda_grid);

// Grids used by `spl verify` and the tests.
std::vector<double> standard_loss_grid();
std::vector<double> standard_lambda_grid();

}  // namespace spl
