#include "spl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "spl/latent.hpp"

namespace spl {

namespace {

void require_shape(const ModelParams& params, const SampleView& data) {
  if (params.w.size() != data.dim()) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("model has {} weights but data has {} features", params.w.size(), data.dim()));
  }
  if (data.labels.size() != data.size()) {
    throw Error(Errc::DimensionMismatch, "labels and features differ in length");
  }
}

void require_weights(std::span<const double> weights, const SampleView& data) {
  if (static_cast<Eigen::Index>(weights.size()) != data.size()) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("{} weights for {} samples", weights.size(), data.size()));
  }
  for (double v : weights) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::InvalidParameter, fmt::format("weight {} outside [0,1]", v));
  }
}

void require_sign_labels(const SampleView& data) {
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double y = data.labels[i];
    if (y != 1.0 && y != -1.0) {
      throw Error(Errc::InvalidLabel, fmt::format("classification label {} at row {} is not +-1", y, i));
    }
  }
}

// log(1 + exp(-m)) without overflow.
double logistic_loss(double m) { return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

// d/dm of the per-sample loss at margin/residual. Hinge at m = 1 and
// absolute at r = 0 take the zero subgradient.
double loss_derivative(LossKind kind, double y, double f) {
  switch (kind) {
    case LossKind::SquaredError: return -2.0 * (y - f);
    case LossKind::Absolute: {
      const double r = y - f;
      return r > 0.0 ? -1.0 : (r < 0.0 ? 1.0 : 0.0);
    }
    case LossKind::Logistic: {
      const double m = y * f;
      const double s = m > 0.0 ? std::exp(-m) / (1.0 + std::exp(-m)) : 1.0 / (1.0 + std::exp(m));
      return -y * s;
    }
    case LossKind::Hinge: return y * f < 1.0 ? -y : 0.0;
  }
  return 0.0;
}

double loss_value(LossKind kind, double y, double f) {
  switch (kind) {
    case LossKind::SquaredError: return (y - f) * (y - f);
    case LossKind::Absolute: return std::abs(y - f);
    case LossKind::Logistic: return logistic_loss(y * f);
    case LossKind::Hinge: return std::max(0.0, 1.0 - y * f);
  }
  return 0.0;
}

double objective_from_decisions(const Eigen::VectorXd& f, const SampleView& data, std::span<const double> weights,
                                const LossModel& model, const Eigen::VectorXd& w) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double v = weights[static_cast<std::size_t>(i)];
    if (v != 0.0) total += v * loss_value(model.kind, data.labels[i], f[i]);
  }
  return total + 0.5 * model.ridge_strength * w.squaredNorm();
}

MinimizationResult solve_weighted_ridge(const SampleView& data, std::span<const double> weights, double ridge) {
  const Eigen::Index n = data.size();
  const Eigen::Index d = data.dim();
  const Eigen::Map<const Eigen::VectorXd> v(weights.data(), n);
  const double total_weight = v.sum();

  MinimizationResult out;
  out.params = ModelParams::zeros(d);
  if (total_weight == 0.0) {
    if (ridge <= 0.0) throw Error(Errc::SingularSystem, "all weights are zero and the ridge strength is zero");
    return out;  // only the ridge term remains: w = 0, intercept pinned to 0
  }

  // Normal equations for theta = [w; b] on the augmented design [X 1].
  Eigen::MatrixXd m(d + 1, d + 1);
  Eigen::VectorXd rhs(d + 1);
  const Eigen::MatrixXd vx = data.features.array().colwise() * v.array();
  m.topLeftCorner(d, d) = 2.0 * data.features.transpose() * vx;
  m.topLeftCorner(d, d).diagonal().array() += ridge;
  m.topRightCorner(d, 1) = 2.0 * vx.colwise().sum().transpose();
  m.bottomLeftCorner(1, d) = m.topRightCorner(d, 1).transpose();
  m(d, d) = 2.0 * total_weight;
  rhs.head(d) = 2.0 * vx.transpose() * data.labels;
  rhs(d) = 2.0 * v.dot(data.labels);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  const auto diag = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || diag.minCoeff() <= 1e-13 * diag.maxCoeff()) {
    throw Error(Errc::SingularSystem, "weighted normal equations are singular; add ridge strength");
  }
  Eigen::VectorXd theta = ldlt.solve(rhs);
  theta += ldlt.solve(rhs - m * theta);  // one refinement pass
  out.params.w = theta.head(d);
  out.params.b = theta(d);
  return out;
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::SquaredError: return "squared";
    case LossKind::Absolute: return "absolute";
    case LossKind::Logistic: return "logistic";
    case LossKind::Hinge: return "hinge";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "squared" || name == "least_square") return LossKind::SquaredError;
  if (name == "absolute") return LossKind::Absolute;
  if (name == "logistic") return LossKind::Logistic;
  if (name == "hinge") return LossKind::Hinge;
  throw Error(Errc::InvalidSpec, fmt::format("unknown loss kind '{}'", name));
}

void LossModel::validate() const {
  if (!(ridge_strength >= 0.0)) throw Error(Errc::InvalidParameter, "ridge strength must be nonnegative");
}

KvDocument LossModel::to_kv() const {
  KvDocument doc;
  doc.set("kind", std::string(to_string(kind)));
  doc.set("ridge", ridge_strength);
  return doc;
}

LossModel LossModel::from_kv(const KvDocument& doc) {
  LossModel m{parse_loss_kind(doc.get_string("kind")), doc.get_double_or("ridge", 0.0)};
  m.validate();
  return m;
}

KvDocument ModelParams::to_kv() const {
  KvDocument doc;
  doc.set("dim", static_cast<std::int64_t>(w.size()));
  doc.set("b", b);
  for (Eigen::Index j = 0; j < w.size(); ++j) doc.set(fmt::format("w{}", j + 1), w[j]);
  return doc;
}

Eigen::VectorXd decision_values(const ModelParams& params, const SampleView& data) {
  require_shape(params, data);
  return (data.features * params.w).array() + params.b;
}

std::vector<double> compute_losses(const ModelParams& params, const SampleView& data, const LossModel& model) {
  require_shape(params, data);
  if (model.is_classification()) require_sign_labels(data);
  const Eigen::VectorXd f = decision_values(params, data);
  std::vector<double> out(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) out[static_cast<std::size_t>(i)] = loss_value(model.kind, data.labels[i], f[i]);
  return out;
}

double weighted_objective(const ModelParams& params, const SampleView& data, std::span<const double> weights,
                          const LossModel& model) {
  require_shape(params, data);
  require_weights(weights, data);
  return objective_from_decisions(decision_values(params, data), data, weights, model, params.w);
}

std::vector<double> majorization_step(const RegularizerSpec& reg, std::span<const double> losses, double lambda,
                                      const PriorSet* prior) {
  if (prior && !prior->empty()) return apply_priors(reg, losses, lambda, *prior).weights;
  std::vector<double> out(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) out[i] = optimal_weight(reg, losses[i], lambda);
  return out;
}

Eigen::VectorXd weighted_ridge_gradient(const ModelParams& params, const SampleView& data,
                                        std::span<const double> weights, double ridge_strength) {
  require_shape(params, data);
  require_weights(weights, data);
  const Eigen::Map<const Eigen::VectorXd> v(weights.data(), data.size());
  const Eigen::VectorXd r = data.labels - decision_values(params, data);
  const Eigen::VectorXd vr = v.cwiseProduct(r);
  Eigen::VectorXd g(data.dim() + 1);
  g.head(data.dim()) = -2.0 * data.features.transpose() * vr + ridge_strength * params.w;
  g(data.dim()) = -2.0 * vr.sum();
  return g;
}

MinimizationResult minimization_step(const ModelParams& params0, const SampleView& data,
                                     std::span<const double> weights, const LossModel& model,
                                     const MinimizationOptions& options) {
  require_shape(params0, data);
  require_weights(weights, data);
  model.validate();
  if (model.is_classification()) require_sign_labels(data);

  if (model.kind == LossKind::SquaredError) {
    auto out = solve_weighted_ridge(data, weights, model.ridge_strength);
    out.objective = weighted_objective(out.params, data, weights, model);
    // Guard against a closed-form answer that rounds above the start point.
    const double start = weighted_objective(params0, data, weights, model);
    if (out.objective > start) {
      out.params = params0;
      out.objective = start;
    }
    return out;
  }

  const Eigen::Index n = data.size();
  MinimizationResult out;
  out.params = params0;
  if (model.ridge_strength > 0.0 && std::all_of(weights.begin(), weights.end(), [](double v) { return v == 0.0; })) {
    // Only the ridge term remains; the intercept is unpenalized and kept.
    out.params.w.setZero();
    return out;
  }
  Eigen::VectorXd f = decision_values(out.params, data);
  out.objective = objective_from_decisions(f, data, weights, model, out.params.w);

  // Step scale from a curvature bound of the weighted design.
  double scale = model.ridge_strength;
  for (Eigen::Index i = 0; i < n; ++i) scale += weights[static_cast<std::size_t>(i)] * (data.features.row(i).squaredNorm() + 1.0);
  double step = 1.0 / std::max(scale, 1e-12);

  Eigen::VectorXd dloss(n);
  bool settled = false;
  for (int it = 0; it < options.max_steps && !settled; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = weights[static_cast<std::size_t>(i)];
      dloss[i] = v == 0.0 ? 0.0 : v * loss_derivative(model.kind, data.labels[i], f[i]);
    }
    const Eigen::VectorXd gw = data.features.transpose() * dloss + model.ridge_strength * out.params.w;
    const double gb = dloss.sum();
    const double gnorm2 = gw.squaredNorm() + gb * gb;
    if (gnorm2 == 0.0) break;

    bool accepted = false;
    step *= 2.0;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      ModelParams trial{out.params.w - step * gw, out.params.b - step * gb};
      Eigen::VectorXd ft = (data.features * trial.w).array() + trial.b;
      const double obj = objective_from_decisions(ft, data, weights, model, trial.w);
      if (obj <= out.objective - 1e-4 * step * gnorm2) {
        const double previous = out.objective;
        out.params = std::move(trial);
        f = std::move(ft);
        out.objective = obj;
        out.steps = it + 1;
        accepted = true;
        settled = previous - obj < options.relative_tolerance * std::abs(previous);
        break;
      }
    }
    if (!accepted) break;
  }
  return out;
}

double latent_objective(const RegularizerSpec& reg, std::span<const double> losses, double lambda) {
  double total = 0.0;
  for (double l : losses) total += latent_loss(reg, l, lambda);
  return total;
}

AgeSchedule AgeSchedule::fixed(double lambda0, int max_outer) {
  AgeSchedule s;
  s.lambda0 = lambda0;
  s.quantile0.reset();
  s.max_outer = max_outer;
  return s;
}

AgeSchedule AgeSchedule::quantile(double q, int max_outer) {
  AgeSchedule s;
  s.quantile0 = q;
  s.max_outer = max_outer;
  return s;
}

void AgeSchedule::validate() const {
  if (lambda0.has_value() == quantile0.has_value()) {
    throw Error(Errc::InvalidParameter, "age schedule needs exactly one of lambda0 and quantile0");
  }
  if (lambda0 && !(*lambda0 > 0.0)) throw Error(Errc::InvalidParameter, "lambda0 must be positive");
  if (quantile0 && !(*quantile0 > 0.0 && *quantile0 <= 1.0)) {
    throw Error(Errc::InvalidParameter, "quantile0 must lie in (0,1]");
  }
  if (!(growth > 1.0)) throw Error(Errc::InvalidParameter, "growth must exceed 1");
  if (max_outer < 1) throw Error(Errc::InvalidParameter, "max_outer must be at least 1");
  if (!(lambda_max > 0.0)) throw Error(Errc::InvalidParameter, "lambda_max must be positive");
}

KvDocument AgeSchedule::to_kv() const {
  KvDocument doc;
  if (lambda0) doc.set("lambda0", *lambda0);
  if (quantile0) doc.set("quantile0", *quantile0);
  doc.set("growth", growth);
  doc.set("max_outer", max_outer);
  doc.set("stop_when_all_included", stop_when_all_included);
  doc.set("lambda_max", lambda_max);
  return doc;
}

AgeSchedule AgeSchedule::from_kv(const KvDocument& doc) {
  AgeSchedule s;
  if (doc.contains("lambda0")) {
    s.lambda0 = doc.get_double("lambda0");
    s.quantile0.reset();
  }
  if (doc.contains("quantile0")) s.quantile0 = doc.get_double("quantile0");
  s.growth = doc.get_double_or("growth", s.growth);
  s.max_outer = static_cast<int>(doc.get_int_or("max_outer", s.max_outer));
  s.stop_when_all_included = doc.get_bool_or("stop_when_all_included", s.stop_when_all_included);
  s.lambda_max = doc.get_double_or("lambda_max", s.lambda_max);
  s.validate();
  return s;
}

std::size_t IterationLog::active_weights() const {
  return static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](double v) { return v > 0.0; }));
}

std::size_t SplRunRecord::descent_violations(double slack) const {
  std::size_t count = 0;
  for (std::size_t k = 1; k < iterations.size(); ++k) {
    const auto& prev = iterations[k - 1];
    const auto& cur = iterations[k];
    if (cur.outer == prev.outer && cur.latent_objective > prev.latent_objective + slack) ++count;
  }
  return count;
}

namespace {

struct SeedSelection {
  double lambda0 = 1.0;
  std::size_t count = 0;  // samples the first majorization must include
};

// Age parameter that admits the ceil(q n) smallest initial losses. When the
// boundary falls inside a run of equal losses, lambda0 sits on that value and
// the caller breaks the tie by sample index.
SeedSelection quantile_seed(std::span<const double> losses, double q) {
  const std::size_t n = losses.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9)), 1, n);
  SeedSelection seed;
  seed.count = k;
  const double inside = losses[order[k - 1]];
  if (k == n) {
    seed.lambda0 = std::max(std::nextafter(inside, std::numeric_limits<double>::infinity()),
                            std::numeric_limits<double>::min());
  } else {
    const double outside = losses[order[k]];
    seed.lambda0 = outside > inside ? 0.5 * (inside + outside) : inside;
  }
  if (!(seed.lambda0 > 0.0)) seed.lambda0 = std::numeric_limits<double>::min();
  return seed;
}

// At loss == lambda the hard weight subproblem is indifferent between 0 and 1;
// include tied samples in index order until `count` samples are in.
void break_hard_ties(std::span<const double> losses, std::span<const double> lambdas, std::size_t count,
                     std::vector<double>& weights) {
  auto included = static_cast<std::size_t>(std::count(weights.begin(), weights.end(), 1.0));
  for (std::size_t i = 0; i < losses.size() && included < count; ++i) {
    if (weights[i] == 0.0 && losses[i] == lambdas[i]) {
      weights[i] = 1.0;
      ++included;
    }
  }
}

}  // namespace

SplRunRecord run_spl(const RegularizerSpec& reg, const SampleView& data, const LossModel& model,
                     const AgeSchedule& schedule, const PriorSet& prior, int inner_mm_steps, std::uint64_t seed) {
  SplRunRecord record;
  record.seed = seed;
  record.final_params = ModelParams::zeros(data.dim());
  int outer = 0;
  int inner = 0;
  try {
    reg.validate();
    model.validate();
    schedule.validate();
    if (data.size() < 1) throw Error(Errc::InvalidParameter, "dataset is empty");
    if (inner_mm_steps < 1) throw Error(Errc::InvalidParameter, "inner_mm_steps must be at least 1");
    prior.validate(static_cast<std::size_t>(data.size()));

    ModelParams params = ModelParams::zeros(data.dim());
    std::optional<SeedSelection> seeded;
    double lambda = 0.0;
    if (schedule.quantile0) {
      seeded = quantile_seed(compute_losses(params, data, model), *schedule.quantile0);
      lambda = seeded->lambda0;
    } else {
      lambda = *schedule.lambda0;
    }
    record.lambda0 = lambda;

    for (outer = 0; outer < schedule.max_outer; ++outer) {
      bool all_included = false;
      for (inner = 0; inner < inner_mm_steps; ++inner) {
        IterationLog log;
        log.outer = outer;
        log.inner = inner;
        log.lambda = lambda;
        log.losses = compute_losses(params, data, model);
        PriorWeights solved = apply_priors(reg, log.losses, lambda, prior);
        if (seeded && outer == 0 && inner == 0 && reg.kind == RegularizerKind::Hard) {
          break_hard_ties(log.losses, solved.lambdas, seeded->count, solved.weights);
        }
        log.latent_objective = prior_latent_objective(reg, log.losses, solved, prior) +
                               0.5 * model.ridge_strength * params.w.squaredNorm();
        log.weights = std::move(solved.weights);
        auto step = minimization_step(params, data, log.weights, model);
        params = std::move(step.params);
        log.weighted_objective = step.objective;
        log.inner_iterations = step.steps;
        log.params = params;
        all_included = std::all_of(log.weights.begin(), log.weights.end(),
                                   [](double v) { return v >= kAllIncludedThreshold; });
        record.iterations.push_back(std::move(log));
      }
      record.final_params = params;
      if (schedule.stop_when_all_included && all_included) break;
      lambda = std::min(lambda * schedule.growth, std::max(schedule.lambda_max, lambda));
    }
  } catch (const Error& e) {
    record.error = RunError{outer, inner, e.code(), e.what()};
  }
  return record;
}

ModelParams batch_train(const SampleView& data, const LossModel& model, int max_rounds) {
  const std::vector<double> ones(static_cast<std::size_t>(data.size()), 1.0);
  auto result = minimization_step(ModelParams::zeros(data.dim()), data, ones, model);
  if (model.kind == LossKind::SquaredError) return result.params;
  for (int round = 1; round < max_rounds; ++round) {
    const double before = result.objective;
    result = minimization_step(result.params, data, ones, model);
    if (before - result.objective <= 1e-12 * std::abs(before)) break;
  }
  return result.params;
}

std::string render_run_log_csv(const SplRunRecord& record) {
  std::string out = "outer_iter,inner_iter,lambda,latent_objective,weighted_objective,n_active_weights,param_norm\n";
  for (const auto& it : record.iterations) {
    out += fmt::format("{},{},{},{},{},{},{}\n", it.outer, it.inner, format_double(it.lambda),
                       format_double(it.latent_objective), format_double(it.weighted_objective), it.active_weights(),
                       format_double(it.params.norm()));
  }
  return out;
}

}  // namespace spl
