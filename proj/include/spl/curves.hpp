#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spl/regularizer.hpp"

namespace spl {

// Base losses expressed through the margin m = y f(x) with y in {-1, +1}:
// logistic log(1+e^-m), hinge max(0, 1-m), absolute |1-m|, least-square (1-m)^2.
// The last two equal |y - f| and (y - f)^2 for +-1 labels.
enum class BaseLoss { Logistic, Hinge, Absolute, LeastSquare };

std::string_view to_string(BaseLoss kind);
BaseLoss parse_base_loss(std::string_view name);
std::vector<BaseLoss> all_base_losses();

double base_loss(BaseLoss kind, double margin);

struct CurveRow {
  double loss_input = 0.0;  // margin
  BaseLoss kind = BaseLoss::Logistic;
  double lambda = 0.0;      // +inf is the degenerate "no suppression" curve
  double value = 0.0;       // F_lambda(base_loss(margin))
};

// Latent losses composed with base losses. lambda = +inf yields the base loss
// itself, without evaluating any regularizer formula.
std::vector<CurveRow> latent_curves(const RegularizerSpec& reg, std::span<const double> lambdas,
                                    std::span<const BaseLoss> bases, std::span<const double> margins);

// Columns: loss_input, composed_loss_kind, lambda, latent_loss_value.
std::string render_curves_csv(std::span<const CurveRow> rows);

// "start:stop:step" (inclusive of stop within half a step) or a comma list.
std::vector<double> parse_grid(std::string_view text);

}  // namespace spl
