#include "spl/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "spl/error.hpp"

namespace spl {

namespace {

void require_inputs(double loss, double lambda) {
  if (!(loss >= 0.0)) throw Error(Errc::NegativeLoss, fmt::format("loss must be nonnegative, got {}", loss));
  if (!(lambda > 0.0)) {
    throw Error(Errc::InvalidParameter, fmt::format("age parameter must be positive, got {}", lambda));
  }
}

}  // namespace

double latent_loss(const RegularizerSpec& reg, double loss, double lambda) {
  require_inputs(loss, lambda);
  switch (reg.kind) {
    case RegularizerKind::Hard:
      return loss < lambda ? loss : lambda;
    case RegularizerKind::Linear:
      return loss < lambda ? loss - loss * loss / (2.0 * lambda) : lambda / 2.0;
    case RegularizerKind::Mixture: {
      const double g = *reg.gamma;
      const double s = 1.0 / (1.0 / lambda + 1.0 / g);
      if (loss < s * s) return loss;
      if (loss < lambda * lambda) return g * (2.0 * std::sqrt(loss) - loss / lambda) - g * s;
      return g * (lambda - s);
    }
    case RegularizerKind::Log: {
      const double a = *reg.alpha;
      if (loss <= lambda) return loss;
      // log1p keeps the tail accurate when a*loss is small.
      return lambda + (1.0 + a * lambda) / a * (std::log1p(a * loss) - std::log1p(a * lambda));
    }
    case RegularizerKind::Exp: {
      const double a = *reg.alpha;
      if (loss <= lambda) return loss;
      return lambda - std::expm1(-a * (loss - lambda)) / a;
    }
  }
  return 0.0;
}

std::optional<double> latent_plateau(const RegularizerSpec& reg, double lambda) {
  switch (reg.kind) {
    case RegularizerKind::Hard: return lambda;
    case RegularizerKind::Linear: return lambda / 2.0;
    case RegularizerKind::Mixture: {
      const double g = *reg.gamma;
      return g * (lambda - 1.0 / (1.0 / lambda + 1.0 / g));
    }
    default: return std::nullopt;
  }
}

double latent_loss_numeric(const RegularizerSpec& reg, double loss, double lambda, long steps) {
  require_inputs(loss, lambda);
  if (steps < 10) throw Error(Errc::InvalidParameter, fmt::format("need at least 10 steps, got {}", steps));
  if (loss == 0.0) return 0.0;

  std::vector<double> knots{0.0};
  for (double b : weight_breakpoints(reg, lambda)) {
    if (b > 0.0 && b < loss) knots.push_back(b);
  }
  knots.push_back(loss);

  const auto weight = [&](double x) { return optimal_weight(reg, x, lambda); };
  double total = 0.0;
  long remaining = steps;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    const bool last = k + 2 == knots.size();
    long n = last ? remaining : std::lround(static_cast<double>(steps) * (b - a) / loss);
    n = std::clamp<long>(n, 1, std::max<long>(1, remaining - static_cast<long>(knots.size() - k - 2)));
    remaining -= n;
    const double h = (b - a) / static_cast<double>(n);
    // The segment end is a breakpoint; take the limit from inside the segment.
    const double right = last ? weight(b) : weight(std::nextafter(b, a));
    double sum = 0.5 * (weight(a) + right);
    for (long i = 1; i < n; ++i) sum += weight(a + static_cast<double>(i) * h);
    total += sum * h;
  }
  return total;
}

std::string_view to_string(NcrpKind kind) {
  switch (kind) {
    case NcrpKind::Cnp: return "cnp";
    case NcrpKind::Mcp: return "mcp";
    case NcrpKind::Scad: return "scad";
    case NcrpKind::Log: return "log";
    case NcrpKind::Exp: return "exp";
  }
  return "?";
}

void NcrpSpec::validate() const {
  const auto bad = [this](const char* what) {
    throw Error(Errc::InvalidSpec, fmt::format("{} penalty: {}", to_string(kind), what));
  };
  switch (kind) {
    case NcrpKind::Cnp:
    case NcrpKind::Mcp:
      if (!(gamma > 0.0)) bad("gamma must be positive");
      if (!(lambda > 0.0)) bad("lambda must be positive");
      break;
    case NcrpKind::Scad:
      if (!(gamma > 1.0)) bad("gamma must exceed 1");
      if (!(lambda > 0.0)) bad("lambda must be positive");
      break;
    case NcrpKind::Log:
    case NcrpKind::Exp:
      if (!(gamma > 0.0)) bad("gamma must be positive");
      if (!(alpha > 0.0)) bad("alpha must be positive");
      break;
  }
}

double ncrp_penalty(const NcrpSpec& spec, double t) {
  spec.validate();
  const double x = std::abs(t);
  const double g = spec.gamma;
  const double l = spec.lambda;
  switch (spec.kind) {
    case NcrpKind::Cnp:
      return g * std::min(x, l);
    case NcrpKind::Mcp:
      return x < g * l ? g * (x - x * x / (2.0 * g * l)) : g * g * l / 2.0;
    case NcrpKind::Scad:
      if (x <= l) return l * x;
      if (x <= g * l) return (x * x - 2.0 * g * l * x + l * l) / (2.0 * (1.0 - g));
      return (g + 1.0) * l * l / 2.0;
    case NcrpKind::Log:
      return std::log1p(spec.alpha * x) / g;
    case NcrpKind::Exp:
      return -std::expm1(-spec.alpha * x) / g;
  }
  return 0.0;
}

EquivalenceReport check_ncrp_equivalence(double lambda, std::span<const double> loss_grid,
                                         const LatentLossFn& latent) {
  if (loss_grid.empty()) throw Error(Errc::EmptyGrid, "loss grid is empty");
  EquivalenceReport report;
  const auto hard = RegularizerSpec::hard();
  const auto linear = RegularizerSpec::linear();
  const auto cnp = NcrpSpec::cnp(1.0, lambda);
  const auto mcp = NcrpSpec::mcp(1.0, lambda);
  for (double loss : loss_grid) {
    report.max_dev_cnp = std::max(report.max_dev_cnp, std::abs(latent(hard, loss, lambda) - ncrp_penalty(cnp, loss)));
    report.max_dev_mcp = std::max(report.max_dev_mcp, std::abs(latent(linear, loss, lambda) - ncrp_penalty(mcp, loss)));
  }
  report.pass = report.max_dev_cnp <= kNcrpIdentityTolerance && report.max_dev_mcp <= kNcrpIdentityTolerance;
  return report;
}

EquivalenceReport check_ncrp_equivalence(double lambda, std::span<const double> loss_grid) {
  return check_ncrp_equivalence(lambda, loss_grid, [](const RegularizerSpec& r, double l, double lam) {
    return latent_loss(r, l, lam);
  });
}

SurrogateValue surrogate(const RegularizerSpec& reg, double loss, double anchor, double lambda) {
  require_inputs(loss, lambda);
  require_inputs(anchor, lambda);
  SurrogateValue out;
  out.anchor_loss = anchor;
  out.anchor_weight = optimal_weight(reg, anchor, lambda);
  out.q = latent_loss(reg, anchor, lambda) + out.anchor_weight * (loss - anchor);
  return out;
}

}  // namespace spl
