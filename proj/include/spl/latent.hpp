#pragma once

#include <functional>
#include <span>
#include <string_view>

#include "spl/regularizer.hpp"

namespace spl {

// Latent loss F(loss) = integral of optimal_weight over [0, loss].
double latent_loss(const RegularizerSpec& reg, double loss, double lambda);

// Composite trapezoid quadrature of optimal_weight with knots forced at every
// weight breakpoint inside (0, loss). Independent of latent_loss; used as its oracle.
double latent_loss_numeric(const RegularizerSpec& reg, double loss, double lambda, long steps);

// Value of F beyond the last breakpoint for Hard/Linear/Mixture; nullopt for Log/Exp,
// whose latent losses keep growing.
std::optional<double> latent_plateau(const RegularizerSpec& reg, double lambda);

enum class NcrpKind { Cnp, Mcp, Scad, Log, Exp };

std::string_view to_string(NcrpKind kind);

// Non-convex regularized penalty. CNP/MCP/SCAD use (gamma, lambda);
// LOG/EXP use (gamma, alpha).
struct NcrpSpec {
  NcrpKind kind = NcrpKind::Cnp;
  double gamma = 1.0;
  double lambda = 1.0;
  double alpha = 1.0;

  static NcrpSpec cnp(double gamma, double lambda) { return {NcrpKind::Cnp, gamma, lambda, 1.0}; }
  static NcrpSpec mcp(double gamma, double lambda) { return {NcrpKind::Mcp, gamma, lambda, 1.0}; }
  static NcrpSpec scad(double gamma, double lambda) { return {NcrpKind::Scad, gamma, lambda, 1.0}; }
  static NcrpSpec log(double gamma, double alpha) { return {NcrpKind::Log, gamma, 1.0, alpha}; }
  static NcrpSpec exp(double gamma, double alpha) { return {NcrpKind::Exp, gamma, 1.0, alpha}; }

  void validate() const;
};

double ncrp_penalty(const NcrpSpec& spec, double t);

using LatentLossFn = std::function<double(const RegularizerSpec&, double loss, double lambda)>;

struct EquivalenceReport {
  double max_dev_cnp = 0.0;  // |F_hard - CNP(gamma=1)|
  double max_dev_mcp = 0.0;  // |F_linear - MCP(gamma=1)|
  bool pass = true;
};

inline constexpr double kNcrpIdentityTolerance = 1e-12;

EquivalenceReport check_ncrp_equivalence(double lambda, std::span<const double> loss_grid);
// Same check against a caller-supplied latent loss (mutation testing).
EquivalenceReport check_ncrp_equivalence(double lambda, std::span<const double> loss_grid,
                                         const LatentLossFn& latent);

struct SurrogateValue {
  double q = 0.0;
  double anchor_loss = 0.0;
  double anchor_weight = 0.0;
};

// First-order upper bound of F at `anchor`, evaluated at `loss`.
SurrogateValue surrogate(const RegularizerSpec& reg, double loss, double anchor, double lambda);

}  // namespace spl
