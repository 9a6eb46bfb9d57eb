#include "spl/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "spl/error.hpp"

namespace spl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_weight(double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(Errc::InvalidParameter, fmt::format("weight {} outside [0,1]", v));
  }
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0)) {
    throw Error(Errc::InvalidParameter, fmt::format("age parameter must be positive, got {}", lambda));
  }
}

void require_loss(double loss) {
  if (!(loss >= 0.0)) {
    throw Error(Errc::NegativeLoss, fmt::format("loss must be nonnegative, got {}", loss));
  }
}

double mixture_lower(double lambda, double gamma) {
  const double s = lambda * gamma / (lambda + gamma);
  return s * s;
}

}  // namespace

std::string_view to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::Hard: return "hard";
    case RegularizerKind::Linear: return "linear";
    case RegularizerKind::Mixture: return "mixture";
    case RegularizerKind::Log: return "log";
    case RegularizerKind::Exp: return "exp";
  }
  return "?";
}

RegularizerKind parse_regularizer_kind(std::string_view name) {
  if (name == "hard") return RegularizerKind::Hard;
  if (name == "linear") return RegularizerKind::Linear;
  if (name == "mixture") return RegularizerKind::Mixture;
  if (name == "log") return RegularizerKind::Log;
  if (name == "exp") return RegularizerKind::Exp;
  throw Error(Errc::InvalidSpec, fmt::format("unknown regularizer kind '{}'", name));
}

RegularizerSpec RegularizerSpec::hard() { return {RegularizerKind::Hard, std::nullopt, std::nullopt}; }
RegularizerSpec RegularizerSpec::linear() { return {RegularizerKind::Linear, std::nullopt, std::nullopt}; }

RegularizerSpec RegularizerSpec::mixture(double gamma) {
  RegularizerSpec r{RegularizerKind::Mixture, gamma, std::nullopt};
  r.validate();
  return r;
}

RegularizerSpec RegularizerSpec::log(double alpha) {
  RegularizerSpec r{RegularizerKind::Log, std::nullopt, alpha};
  r.validate();
  return r;
}

RegularizerSpec RegularizerSpec::exp(double alpha) {
  RegularizerSpec r{RegularizerKind::Exp, std::nullopt, alpha};
  r.validate();
  return r;
}

void RegularizerSpec::validate() const {
  const bool wants_gamma = kind == RegularizerKind::Mixture;
  const bool wants_alpha = kind == RegularizerKind::Log || kind == RegularizerKind::Exp;
  if (wants_gamma != gamma.has_value()) {
    throw Error(Errc::InvalidSpec, fmt::format("{} regularizer: gamma must be {}", to_string(kind),
                                               wants_gamma ? "set" : "absent"));
  }
  if (wants_alpha != alpha.has_value()) {
    throw Error(Errc::InvalidSpec, fmt::format("{} regularizer: alpha must be {}", to_string(kind),
                                               wants_alpha ? "set" : "absent"));
  }
  if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) {
    throw Error(Errc::InvalidSpec, fmt::format("mixture gamma must be positive, got {}", *gamma));
  }
  if (alpha && !(*alpha > 0.0 && std::isfinite(*alpha))) {
    throw Error(Errc::InvalidSpec, fmt::format("{} alpha must be positive, got {}", to_string(kind), *alpha));
  }
}

std::string RegularizerSpec::describe() const {
  if (gamma) return fmt::format("{}(gamma={})", to_string(kind), *gamma);
  if (alpha) return fmt::format("{}(alpha={})", to_string(kind), *alpha);
  return std::string(to_string(kind));
}

KvDocument RegularizerSpec::to_kv() const {
  KvDocument doc;
  doc.set("kind", std::string(to_string(kind)));
  if (gamma) doc.set("gamma", *gamma);
  if (alpha) doc.set("alpha", *alpha);
  return doc;
}

RegularizerSpec RegularizerSpec::from_kv(const KvDocument& doc) {
  RegularizerSpec r;
  r.kind = parse_regularizer_kind(doc.get_string("kind"));
  if (doc.contains("gamma")) r.gamma = doc.get_double("gamma");
  if (doc.contains("alpha")) r.alpha = doc.get_double("alpha");
  r.validate();
  return r;
}

double evaluate_regularizer(const RegularizerSpec& reg, double v, double lambda) {
  require_weight(v);
  require_lambda(lambda);
  switch (reg.kind) {
    case RegularizerKind::Hard:
      return -lambda * v;
    case RegularizerKind::Linear:
      return lambda * (0.5 * v * v - v);
    case RegularizerKind::Mixture: {
      const double g = *reg.gamma;
      return g * g / (v + g / lambda);
    }
    case RegularizerKind::Log: {
      const double a = *reg.alpha;
      const double c = 1.0 + a * lambda;
      if (v == 0.0) return kInf;
      return (c * std::log(c / v) - c + v) / a;
    }
    case RegularizerKind::Exp: {
      const double a = *reg.alpha;
      const double vlogv = v == 0.0 ? 0.0 : v * std::log(v);
      return (vlogv - a * lambda * v - v + std::exp(a * lambda)) / a;
    }
  }
  return 0.0;
}

double weight_objective(const RegularizerSpec& reg, double v, double loss, double lambda) {
  switch (reg.kind) {
    case RegularizerKind::Hard:
      return v * (loss - lambda);
    case RegularizerKind::Linear:
      return v * loss + lambda * (0.5 * v * v - v);
    case RegularizerKind::Mixture: {
      const double g = *reg.gamma;
      return v * loss + g * g / (v + g / lambda);
    }
    case RegularizerKind::Log: {
      const double a = *reg.alpha;
      if (v == 0.0) return kInf;
      return v * loss + (v - (1.0 + a * lambda) * std::log(v)) / a;
    }
    case RegularizerKind::Exp: {
      const double a = *reg.alpha;
      const double vlogv = v == 0.0 ? 0.0 : v * std::log(v);
      return v * loss + (vlogv - v - a * lambda * v) / a;
    }
  }
  return 0.0;
}

double optimal_weight(const RegularizerSpec& reg, double loss, double lambda) {
  require_loss(loss);
  require_lambda(lambda);
  switch (reg.kind) {
    case RegularizerKind::Hard:
      return loss < lambda ? 1.0 : 0.0;
    case RegularizerKind::Linear:
      return loss < lambda ? 1.0 - loss / lambda : 0.0;
    case RegularizerKind::Mixture: {
      const double g = *reg.gamma;
      if (loss <= mixture_lower(lambda, g)) return 1.0;
      if (loss >= lambda * lambda) return 0.0;
      return std::clamp(g * (1.0 / std::sqrt(loss) - 1.0 / lambda), 0.0, 1.0);
    }
    case RegularizerKind::Log: {
      const double a = *reg.alpha;
      if (loss <= lambda) return 1.0;
      return (1.0 + a * lambda) / (1.0 + a * loss);
    }
    case RegularizerKind::Exp: {
      const double a = *reg.alpha;
      if (loss <= lambda) return 1.0;
      return std::exp(-a * (loss - lambda));
    }
  }
  return 0.0;
}

std::vector<double> weight_breakpoints(const RegularizerSpec& reg, double lambda) {
  require_lambda(lambda);
  if (reg.kind == RegularizerKind::Mixture) return {mixture_lower(lambda, *reg.gamma), lambda * lambda};
  return {lambda};
}

double brute_force_weight(const RegularizerSpec& reg, double loss, double lambda, int resolution) {
  require_loss(loss);
  require_lambda(lambda);
  if (resolution < 2) {
    throw Error(Errc::InvalidParameter, fmt::format("resolution must be at least 2, got {}", resolution));
  }
  const double step = 1.0 / static_cast<double>(resolution - 1);
  double best_v = 0.0;
  double best = kInf;
  for (int i = 0; i < resolution; ++i) {
    const double v = i == resolution - 1 ? 1.0 : i * step;
    const double obj = weight_objective(reg, v, loss, lambda);
    if (obj < best) {
      best = obj;
      best_v = v;
    }
  }
  return best_v;
}

RegularizerFunctions functions_of(const RegularizerSpec& reg) {
  reg.validate();
  RegularizerFunctions fns;
  // Constant-free objective at zero loss; differs from f by a v-independent term.
  fns.value = [reg](double v, double lambda) { return weight_objective(reg, v, 0.0, lambda); };
  fns.weight = [reg](double loss, double lambda) { return optimal_weight(reg, loss, lambda); };
  fns.exact_limits = reg.kind == RegularizerKind::Hard || reg.kind == RegularizerKind::Mixture;
  return fns;
}

RegularizerFunctions functions_from_value(std::function<double(double, double)> value, int resolution) {
  RegularizerFunctions fns;
  fns.value = value;
  fns.weight = [value, resolution](double loss, double lambda) {
    const double step = 1.0 / static_cast<double>(resolution - 1);
    double best_v = 0.0;
    double best = kInf;
    for (int i = 0; i < resolution; ++i) {
      const double v = i == resolution - 1 ? 1.0 : i * step;
      const double obj = v * loss + value(v, lambda);
      if (obj < best) {
        best = obj;
        best_v = v;
      }
    }
    return best_v;
  };
  return fns;
}

std::string_view to_string(AxiomCondition c) {
  switch (c) {
    case AxiomCondition::Convexity: return "convexity";
    case AxiomCondition::LossMonotone: return "loss-monotone";
    case AxiomCondition::AgeMonotone: return "age-monotone";
  }
  return "?";
}

namespace {

void require_grid(std::span<const double> grid, const char* name) {
  if (grid.empty()) throw Error(Errc::EmptyGrid, fmt::format("{} grid is empty", name));
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw Error(Errc::InvalidParameter, fmt::format("{} grid must be sorted ascending", name));
  }
}

void record(AxiomReport& report, AxiomViolation violation) {
  switch (violation.condition) {
    case AxiomCondition::Convexity: report.convex = false; break;
    case AxiomCondition::LossMonotone: report.loss_monotone = false; break;
    case AxiomCondition::AgeMonotone: report.age_monotone = false; break;
  }
  if (!report.first_violation) report.first_violation = std::move(violation);
}

constexpr double kMonotoneSlack = 1e-12;
constexpr double kLimitSlack = 1e-3;

}  // namespace

AxiomReport check_axioms(const RegularizerFunctions& fns, std::span<const double> loss_grid,
                         std::span<const double> lambda_grid) {
  require_grid(loss_grid, "loss");
  require_grid(lambda_grid, "lambda");
  if (loss_grid.front() < 0.0) throw Error(Errc::NegativeLoss, "loss grid contains a negative loss");
  if (!(lambda_grid.front() > 0.0)) throw Error(Errc::InvalidParameter, "lambda grid must be positive");

  AxiomReport report;

  // Condition 1: midpoint convexity on a 1001-point v grid at several spans.
  constexpr int kPoints = 1001;
  std::vector<double> fv(kPoints);
  for (double lambda : lambda_grid) {
    for (int i = 0; i < kPoints; ++i) fv[i] = fns.value(i / double(kPoints - 1), lambda);
    for (int span : {1, 10, 100, 500}) {
      for (int i = span; i + span < kPoints && report.convex; ++i) {
        const double a = fv[i - span];
        const double b = fv[i + span];
        if (std::isinf(a) || std::isinf(b)) continue;
        const double avg = 0.5 * (a + b);
        if (fv[i] > avg + 1e-10 * std::max(1.0, std::abs(avg))) {
          record(report, {AxiomCondition::Convexity, 0.0, lambda, i / double(kPoints - 1),
                          fmt::format("f({}) = {} exceeds chord midpoint {}", i / double(kPoints - 1), fv[i], avg)});
        }
      }
    }
  }

  // Condition 2: v* nonincreasing in loss, tending to 1 at 0+ and 0 at infinity.
  const double near_one = fns.exact_limits ? 1.0 : 1.0 - kLimitSlack;
  const double near_zero = fns.exact_limits ? 0.0 : kLimitSlack;
  for (double lambda : lambda_grid) {
    double prev = fns.weight(loss_grid.front(), lambda);
    for (std::size_t i = 1; i < loss_grid.size() && report.loss_monotone; ++i) {
      const double cur = fns.weight(loss_grid[i], lambda);
      if (cur > prev + kMonotoneSlack) {
        record(report, {AxiomCondition::LossMonotone, loss_grid[i], lambda, cur,
                        fmt::format("weight rises from {} to {} at loss {}", prev, cur, loss_grid[i])});
      }
      prev = cur;
    }
    const double at_zero = fns.weight(1e-8, lambda);
    if (at_zero < near_one) {
      record(report, {AxiomCondition::LossMonotone, 1e-8, lambda, at_zero,
                      fmt::format("weight {} at loss 1e-8 does not approach 1", at_zero)});
    }
    const double at_inf = fns.weight(1e8 * lambda, lambda);
    if (at_inf > near_zero) {
      record(report, {AxiomCondition::LossMonotone, 1e8 * lambda, lambda, at_inf,
                      fmt::format("weight {} at loss {} does not approach 0", at_inf, 1e8 * lambda)});
    }
  }

  // Condition 3: v* nondecreasing in lambda, bounded by 1 as lambda grows.
  for (double loss : loss_grid) {
    double prev = fns.weight(loss, lambda_grid.front());
    for (std::size_t i = 1; i < lambda_grid.size() && report.age_monotone; ++i) {
      const double cur = fns.weight(loss, lambda_grid[i]);
      if (cur + kMonotoneSlack < prev) {
        record(report, {AxiomCondition::AgeMonotone, loss, lambda_grid[i], cur,
                        fmt::format("weight falls from {} to {} at lambda {}", prev, cur, lambda_grid[i])});
      }
      prev = cur;
    }
    const double big_lambda = 1e8 * std::max(1.0, loss);
    const double limit = fns.weight(loss, big_lambda);
    if (limit > 1.0) {
      record(report, {AxiomCondition::AgeMonotone, loss, big_lambda, limit,
                      fmt::format("weight {} exceeds 1 as lambda grows", limit)});
    }
  }
  return report;
}

AxiomReport check_axioms(const RegularizerSpec& reg, std::span<const double> loss_grid,
                         std::span<const double> lambda_grid) {
  return check_axioms(functions_of(reg), loss_grid, lambda_grid);
}

std::vector<double> standard_loss_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(i * 0.025);  // 0 .. 10
  for (double x : {12.5, 15.0, 20.0, 30.0, 50.0, 100.0, 1000.0}) grid.push_back(x);
  return grid;
}

std::vector<double> standard_lambda_grid() {
  return {0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0};
}

}  // namespace spl
