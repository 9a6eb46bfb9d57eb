#include "spl/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "spl/data.hpp"
#include "spl/error.hpp"
#include "spl/priors.hpp"
#include "spl/solver.hpp"

namespace spl {

namespace {

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

class Tally {
 public:
  explicit Tally(std::string name) { result_.name = std::move(name); }

  void check(bool ok, const std::function<std::string()>& describe) {
    ++result_.checks;
    if (!ok) {
      ++result_.failures;
      if (result_.pass) result_.detail = describe();
      result_.pass = false;
    }
  }

  SuiteResult finish(std::string summary) {
    if (result_.pass) result_.detail = std::move(summary);
    return result_;
  }

 private:
  SuiteResult result_;
};

SuiteResult suite_axioms(const VerifyOptions&) {
  Tally tally("axioms");
  const auto losses = standard_loss_grid();
  const auto lambdas = standard_lambda_grid();
  for (const auto& reg : regularizer_catalog()) {
    const auto report = check_axioms(reg, losses, lambdas);
    tally.check(report.all_pass(), [&] {
      return fmt::format("{}: {} fails ({})", reg.describe(), to_string(report.first_violation->condition),
                         report.first_violation->detail);
    });
  }
  // The checker must reject a regularizer whose weight is always 0.
  const auto negated = functions_from_value([](double v, double lambda) { return lambda * v; });
  const auto report = check_axioms(negated, losses, lambdas);
  tally.check(!report.loss_monotone, [] { return std::string("negated regularizer passed the loss-limit check"); });
  return tally.finish("all catalog regularizers satisfy the three conditions; negated f rejected");
}

SuiteResult suite_weights(const VerifyOptions& options) {
  Tally tally("weights");
  Rng rng(options.seed);
  const int per_reg = options.quick ? 60 : 1000;
  double worst = 0.0;
  for (const auto& base : regularizer_catalog()) {
    for (int k = 0; k < per_reg; ++k) {
      const auto reg = randomize_parameters(base, rng);
      const auto s = sample_loss_age(reg, rng);
      const double closed = optimal_weight(reg, s.loss, s.lambda);
      const double grid = brute_force_weight(reg, s.loss, s.lambda, kDefaultBruteForceResolution);
      worst = std::max(worst, std::abs(closed - grid));
      tally.check(std::abs(closed - grid) <= 2e-5 && closed >= 0.0 && closed <= 1.0, [&] {
        return fmt::format("{} loss={} lambda={}: closed form {} vs grid {}", reg.describe(), s.loss, s.lambda,
                           closed, grid);
      });
    }
  }
  return tally.finish(fmt::format("max |closed - grid| = {:.3g}", worst));
}

SuiteResult suite_latent(const VerifyOptions& options) {
  Tally tally("latent");
  Rng rng(options.seed + 1);
  const int per_reg = options.quick ? 10 : 200;
  const long steps = options.quick ? 200000 : 1000000;
  double worst = 0.0;
  for (const auto& base : regularizer_catalog()) {
    for (int k = 0; k < per_reg; ++k) {
      const auto reg = randomize_parameters(base, rng);
      const auto s = sample_loss_age(reg, rng);
      const double closed = options.latent(reg, s.loss, s.lambda);
      const double numeric = latent_loss_numeric(reg, s.loss, s.lambda, steps);
      worst = std::max(worst, std::abs(closed - numeric));
      tally.check(std::abs(closed - numeric) <= 1e-4, [&] {
        return fmt::format("{} loss={} lambda={}: closed form {} vs quadrature {}", reg.describe(), s.loss, s.lambda,
                           closed, numeric);
      });
    }
  }
  return tally.finish(fmt::format("max |closed - quadrature| = {:.3g}", worst));
}

SuiteResult suite_majorization(const VerifyOptions& options) {
  Tally tally("majorization");
  Rng rng(options.seed + 2);
  const int per_reg = options.quick ? 5000 : 100000;
  for (const auto& base : regularizer_catalog()) {
    for (int k = 0; k < per_reg; ++k) {
      const auto reg = randomize_parameters(base, rng);
      const double lambda = log_uniform(rng, 0.1, 10.0);
      const auto bps = weight_breakpoints(reg, lambda);
      // Anchors and evaluation points straddle a breakpoint half the time.
      const auto draw = [&] {
        if (rng.uniform() < 0.5) {
          const double bp = bps[static_cast<std::size_t>(rng.below(bps.size()))];
          return std::clamp(bp * (1.0 + (rng.uniform() - 0.5) * 0.2), 0.0, 10.0 * lambda);
        }
        return 10.0 * lambda * rng.uniform();
      };
      const double anchor = draw();
      const double loss = draw();
      const double f_anchor = options.latent(reg, anchor, lambda);
      const double weight = optimal_weight(reg, anchor, lambda);
      const double q = f_anchor + weight * (loss - anchor);
      const double f = options.latent(reg, loss, lambda);
      tally.check(q >= f - 1e-10, [&] {
        return fmt::format("{} lambda={} anchor={} loss={}: surrogate {} below latent {}", reg.describe(), lambda,
                           anchor, loss, q, f);
      });
      const double tangent = surrogate(reg, anchor, anchor, lambda).q;
      tally.check(std::abs(tangent - options.latent(reg, anchor, lambda)) <= 1e-10, [&] {
        return fmt::format("{} lambda={} anchor={}: surrogate not tight at the anchor", reg.describe(), lambda, anchor);
      });
    }
  }
  return tally.finish("surrogate majorizes and touches at the anchor");
}

SuiteResult suite_ncrp(const VerifyOptions& options) {
  Tally tally("ncrp");
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.25 * i);
  auto report = check_ncrp_equivalence(1.0, grid, options.latent);
  tally.check(report.pass, [&] {
    return fmt::format("lambda=1: CNP deviation {}, MCP deviation {}", report.max_dev_cnp, report.max_dev_mcp);
  });
  Rng rng(options.seed + 3);
  const int count = options.quick ? 1000 : 10000;
  for (int rep = 0; rep < 3; ++rep) {
    const double lambda = rep == 0 ? 3.7 : log_uniform(rng, 0.1, 10.0);
    std::vector<double> pts(count);
    for (auto& p : pts) p = 40.0 * rng.uniform();
    report = check_ncrp_equivalence(lambda, pts, options.latent);
    tally.check(report.pass, [&] {
      return fmt::format("lambda={}: CNP deviation {}, MCP deviation {}", lambda, report.max_dev_cnp,
                         report.max_dev_mcp);
    });
  }
  for (double gamma : {1.5, 3.0, 3.7}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      const auto scad = NcrpSpec::scad(gamma, lambda);
      for (double knot : {lambda, gamma * lambda}) {
        const double left = ncrp_penalty(scad, std::nextafter(knot, 0.0));
        const double right = ncrp_penalty(scad, std::nextafter(knot, 2.0 * knot));
        tally.check(std::abs(left - right) <= 1e-12 * std::max(1.0, knot), [&] {
          return fmt::format("SCAD(gamma={}, lambda={}) jumps at {}: {} vs {}", gamma, lambda, knot, left, right);
        });
      }
    }
  }
  return tally.finish("F_hard = CNP(1, lambda), F_linear = MCP(1, lambda); SCAD continuous");
}

// Exhaustive search over a grid in [0,1]^n with v nonincreasing, for the
// linear-regularizer weight subproblem.
double best_ordered_linear_objective(const std::vector<double>& losses, double lambda, int resolution) {
  const std::size_t n = losses.size();
  std::vector<int> idx(n, 0);
  double best = std::numeric_limits<double>::infinity();
  const auto value = [&](const std::vector<int>& ix) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = ix[i] / double(resolution - 1);
      total += v * losses[i] + lambda * (0.5 * v * v - v);
    }
    return total;
  };
  // Enumerate nonincreasing index tuples.
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int cap) {
    if (pos == n) {
      best = std::min(best, value(idx));
      return;
    }
    for (int k = 0; k <= cap; ++k) {
      idx[pos] = k;
      rec(pos + 1, k);
    }
  };
  rec(0, resolution - 1);
  return best;
}

SuiteResult suite_priors(const VerifyOptions& options) {
  Tally tally("priors");
  Rng rng(options.seed + 4);
  const auto linear = RegularizerSpec::linear();
  const int cases = options.quick ? 6 : 30;
  for (int c = 0; c < cases; ++c) {
    const std::size_t n = 2 + static_cast<std::size_t>(c % 2);
    const double lambda = 0.5 + 1.5 * rng.uniform();
    std::vector<double> losses(n);
    for (auto& l : losses) l = 1.5 * lambda * rng.uniform();
    std::vector<std::size_t> chain(n);
    std::iota(chain.begin(), chain.end(), std::size_t{0});
    const auto v = apply_chain_order(linear, losses, lambda, chain);
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += v[i] * losses[i] + lambda * (0.5 * v[i] * v[i] - v[i]);
    const int resolution = n == 2 ? 2001 : 401;
    const double grid = best_ordered_linear_objective(losses, lambda, resolution);
    // The grid optimum can only be worse than the true optimum.
    tally.check(obj <= grid + 1e-6, [&] {
      return fmt::format("chain order n={} lambda={}: PAV objective {} vs grid {}", n, lambda, obj, grid);
    });
  }
  for (int c = 0; c < cases; ++c) {
    const std::size_t n = 5;
    const double lambda = 0.5 + rng.uniform();
    std::vector<double> losses(n);
    for (auto& l : losses) l = 1.5 * lambda * rng.uniform();
    std::vector<Edge> edges{{0, 1, 1.0}, {1, 2, 0.5}, {3, 4, 2.0}};
    const auto lap = laplacian_from_edges(n, edges);
    const auto smooth = apply_smoothness(losses, lambda, lap, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double plain = optimal_weight(linear, losses[i], lambda);
      tally.check(std::abs(smooth[i] - plain) <= 1e-12, [&] {
        return fmt::format("smoothness beta=0 at {}: {} vs plain {}", i, smooth[i], plain);
      });
    }
  }
  return tally.finish("chain projection optimal on small instances; beta = 0 reproduces plain weights");
}

SuiteResult suite_descent(const VerifyOptions& options) {
  Tally tally("descent");
  const int seeds = options.quick ? 1 : 3;
  for (int s = 0; s < seeds; ++s) {
    const auto reg_problem = generate_regression(120, 4, 0.2, 0.1, 20.0, options.seed + 10 + s);
    const auto cls_problem = generate_weak_labels(std::vector<int>{40, 40, 40}, 4, std::vector<double>{0.05, 0.2, 0.4},
                                                  2.0, options.seed + 20 + s);
    for (const auto& reg : regularizer_catalog()) {
      for (LossKind kind : {LossKind::SquaredError, LossKind::Absolute, LossKind::Logistic, LossKind::Hinge}) {
        const LossModel model{kind, kind == LossKind::SquaredError ? 1e-6 : 0.1};
        const Dataset& data = model.is_classification() ? cls_problem.data : reg_problem.data;
        AgeSchedule schedule = AgeSchedule::quantile(0.3, options.quick ? 4 : 8);
        const auto record = run_spl(reg, data.training_view(), model, schedule, {}, 3, s);
        tally.check(record.ok(), [&] { return fmt::format("{} / {}: {}", reg.describe(), to_string(kind), record.error->message); });
        const auto violations = record.descent_violations(1e-9);
        tally.check(violations == 0, [&] {
          return fmt::format("{} / {}: {} descent violations", reg.describe(), to_string(kind), violations);
        });
      }
    }
  }
  return tally.finish("latent objective nonincreasing within every fixed-lambda span");
}

}  // namespace

std::vector<RegularizerSpec> regularizer_catalog() {
  return {RegularizerSpec::hard(), RegularizerSpec::linear(), RegularizerSpec::mixture(1.0), RegularizerSpec::log(1.0),
          RegularizerSpec::exp(1.0)};
}

RegularizerSpec randomize_parameters(const RegularizerSpec& reg, Rng& rng) {
  RegularizerSpec out = reg;
  if (out.gamma) out.gamma = log_uniform(rng, 0.2, 5.0);
  if (out.alpha) out.alpha = log_uniform(rng, 0.2, 5.0);
  return out;
}

LossAgeSample sample_loss_age(const RegularizerSpec& reg, Rng& rng) {
  LossAgeSample s;
  s.lambda = log_uniform(rng, 0.1, 10.0);
  const auto bps = weight_breakpoints(reg, s.lambda);
  if (rng.uniform() < 0.3) {
    const double bp = bps[static_cast<std::size_t>(rng.below(bps.size()))];
    s.loss = bp * (1.0 + (rng.uniform() - 0.5) * 0.02);
  } else {
    s.loss = 1.5 * bps.back() * rng.uniform();
  }
  return s;
}

std::vector<std::string> suite_names() { return {"axioms", "weights", "latent", "majorization", "ncrp", "priors", "descent"}; }

std::vector<SuiteResult> run_verify(const VerifyOptions& options_in, const std::optional<std::string>& only) {
  VerifyOptions options = options_in;
  if (!options.latent) {
    options.latent = [](const RegularizerSpec& r, double l, double lam) { return latent_loss(r, l, lam); };
  }
  const auto names = suite_names();
  if (only && std::find(names.begin(), names.end(), *only) == names.end()) {
    throw Error(Errc::InvalidParameter, fmt::format("unknown suite '{}'", *only));
  }
  using Suite = SuiteResult (*)(const VerifyOptions&);
  const std::vector<std::pair<std::string, Suite>> suites{
      {"axioms", suite_axioms}, {"weights", suite_weights}, {"latent", suite_latent},
      {"majorization", suite_majorization}, {"ncrp", suite_ncrp}, {"priors", suite_priors},
      {"descent", suite_descent}};
  std::vector<SuiteResult> results;
  for (const auto& [name, fn] : suites) {
    if (only && *only != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r;
    try {
      r = fn(options);
    } catch (const Error& e) {
      r.name = name;
      r.pass = false;
      r.failures = 1;
      r.detail = fmt::format("error: {}", e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(std::move(r));
  }
  return results;
}

std::string render_verify_table(const std::vector<SuiteResult>& results) {
  std::string out = fmt::format("{:<14} {:<6} {:>9} {:>9} {:>8}  {}\n", "suite", "status", "checks", "failures",
                                "seconds", "detail");
  for (const auto& r : results) {
    out += fmt::format("{:<14} {:<6} {:>9} {:>9} {:>8.2f}  {}\n", r.name, r.pass ? "PASS" : "FAIL", r.checks,
                       r.failures, r.seconds, r.detail);
  }
  return out;
}

}  // namespace spl
