#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spl/data.hpp"
#include "spl/error.hpp"
#include "spl/kv.hpp"
#include "spl/priors.hpp"
#include "spl/regularizer.hpp"

namespace spl {

enum class LossKind { SquaredError, Absolute, Logistic, Hinge };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct LossModel {
  LossKind kind = LossKind::SquaredError;
  double ridge_strength = 0.0;  // coefficient of ||w||^2 / 2; the intercept is not penalized

  bool is_classification() const { return kind == LossKind::Logistic || kind == LossKind::Hinge; }
  void validate() const;
  KvDocument to_kv() const;
  static LossModel from_kv(const KvDocument& doc);
};

struct ModelParams {
  Eigen::VectorXd w;
  double b = 0.0;

  static ModelParams zeros(Eigen::Index d) { return {Eigen::VectorXd::Zero(d), 0.0}; }
  double norm() const { return std::sqrt(w.squaredNorm() + b * b); }
  KvDocument to_kv() const;
  bool operator==(const ModelParams& o) const { return w.size() == o.w.size() && w == o.w && b == o.b; }
};

// Decision values x_i . w + b.
Eigen::VectorXd decision_values(const ModelParams& params, const SampleView& data);

std::vector<double> compute_losses(const ModelParams& params, const SampleView& data, const LossModel& model);

// sum_i v_i l_i(w) + ridge/2 ||w||^2
double weighted_objective(const ModelParams& params, const SampleView& data, std::span<const double> weights,
                          const LossModel& model);

std::vector<double> majorization_step(const RegularizerSpec& reg, std::span<const double> losses, double lambda,
                                      const PriorSet* prior = nullptr);

struct MinimizationOptions {
  int max_steps = 500;
  double relative_tolerance = 1e-8;
};

struct MinimizationResult {
  ModelParams params;
  double objective = 0.0;
  int steps = 0;  // gradient steps taken; 0 for the closed-form squared-error solve
};

// Squared error: exact weighted ridge solve. Other losses: (sub)gradient
// descent from params0 with backtracking; never increases the objective.
MinimizationResult minimization_step(const ModelParams& params0, const SampleView& data,
                                     std::span<const double> weights, const LossModel& model,
                                     const MinimizationOptions& options = {});

// Gradient of the weighted ridge objective (squared error only); for tests.
Eigen::VectorXd weighted_ridge_gradient(const ModelParams& params, const SampleView& data,
                                        std::span<const double> weights, double ridge_strength);

double latent_objective(const RegularizerSpec& reg, std::span<const double> losses, double lambda);

struct AgeSchedule {
  std::optional<double> lambda0;
  std::optional<double> quantile0 = 0.1;
  double growth = 1.3;
  int max_outer = 100;
  bool stop_when_all_included = false;
  // Growth stops once lambda reaches this value.
  double lambda_max = std::numeric_limits<double>::infinity();

  static AgeSchedule fixed(double lambda0, int max_outer = 100);
  static AgeSchedule quantile(double q, int max_outer = 100);

  void validate() const;
  KvDocument to_kv() const;
  static AgeSchedule from_kv(const KvDocument& doc);
};

struct IterationLog {
  int outer = 0;
  int inner = 0;
  double lambda = 0.0;
  std::vector<double> losses;   // at the anchor w^k
  std::vector<double> weights;  // majorization output at w^k
  double latent_objective = 0.0;    // at w^k, including the ridge term
  double weighted_objective = 0.0;  // at w^{k+1}
  ModelParams params;               // w^{k+1}
  int inner_iterations = 0;         // gradient steps inside the minimization

  std::size_t active_weights() const;
};

struct RunError {
  int outer = 0;
  int inner = 0;
  Errc code = Errc::InvalidParameter;
  std::string message;
};

struct SplRunRecord {
  std::vector<IterationLog> iterations;
  ModelParams final_params;
  double lambda0 = 0.0;
  std::uint64_t seed = 0;
  std::optional<RunError> error;

  bool ok() const { return !error.has_value(); }
  // Inner steps where the latent objective rose by more than `slack` within a fixed-lambda span.
  std::size_t descent_violations(double slack = 1e-9) const;
};

inline constexpr double kAllIncludedThreshold = 1.0 - 1e-6;

// Self-paced training: for each age parameter, alternate majorization (weights)
// and minimization (weighted fit) `inner_mm_steps` times, then grow lambda.
// Errors inside the loop are caught and stored in the record.
SplRunRecord run_spl(const RegularizerSpec& reg, const SampleView& data, const LossModel& model,
                     const AgeSchedule& schedule, const PriorSet& prior, int inner_mm_steps, std::uint64_t seed);

// Unit weights, minimization repeated until the objective settles.
ModelParams batch_train(const SampleView& data, const LossModel& model, int max_rounds = 300);

// One row per inner iteration.
std::string render_run_log_csv(const SplRunRecord& record);

}  // namespace spl
