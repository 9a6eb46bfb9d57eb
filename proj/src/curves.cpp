#include "spl/curves.hpp"

#include <cmath>

#include <fmt/format.h>

#include "spl/error.hpp"
#include "spl/kv.hpp"
#include "spl/latent.hpp"

namespace spl {

std::string_view to_string(BaseLoss kind) {
  switch (kind) {
    case BaseLoss::Logistic: return "logistic";
    case BaseLoss::Hinge: return "hinge";
    case BaseLoss::Absolute: return "absolute";
    case BaseLoss::LeastSquare: return "least_square";
  }
  return "?";
}

BaseLoss parse_base_loss(std::string_view name) {
  if (name == "logistic") return BaseLoss::Logistic;
  if (name == "hinge") return BaseLoss::Hinge;
  if (name == "absolute") return BaseLoss::Absolute;
  if (name == "least_square" || name == "squared") return BaseLoss::LeastSquare;
  throw Error(Errc::InvalidSpec, fmt::format("unknown base loss '{}'", name));
}

std::vector<BaseLoss> all_base_losses() {
  return {BaseLoss::Logistic, BaseLoss::Hinge, BaseLoss::Absolute, BaseLoss::LeastSquare};
}

double base_loss(BaseLoss kind, double margin) {
  switch (kind) {
    case BaseLoss::Logistic:
      return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    case BaseLoss::Hinge: return std::max(0.0, 1.0 - margin);
    case BaseLoss::Absolute: return std::abs(1.0 - margin);
    case BaseLoss::LeastSquare: return (1.0 - margin) * (1.0 - margin);
  }
  return 0.0;
}

std::vector<CurveRow> latent_curves(const RegularizerSpec& reg, std::span<const double> lambdas,
                                    std::span<const BaseLoss> bases, std::span<const double> margins) {
  reg.validate();
  if (margins.empty()) throw Error(Errc::EmptyGrid, "margin grid is empty");
  if (lambdas.empty()) throw Error(Errc::EmptyGrid, "lambda list is empty");
  for (double m : margins) {
    if (!std::isfinite(m)) throw Error(Errc::InvalidParameter, fmt::format("margin {} is not finite", m));
  }
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw Error(Errc::InvalidParameter, fmt::format("lambda {} must be positive", lambda));
  }
  std::vector<CurveRow> rows;
  rows.reserve(lambdas.size() * bases.size() * margins.size());
  for (BaseLoss kind : bases) {
    for (double lambda : lambdas) {
      for (double m : margins) {
        const double loss = base_loss(kind, m);
        const double value = std::isinf(lambda) ? loss : latent_loss(reg, loss, lambda);
        rows.push_back({m, kind, lambda, value});
      }
    }
  }
  return rows;
}

std::string render_curves_csv(std::span<const CurveRow> rows) {
  std::string out = "loss_input,composed_loss_kind,lambda,latent_loss_value\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{}\n", format_double(r.loss_input), to_string(r.kind), format_double(r.lambda),
                       format_double(r.value));
  }
  return out;
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw Error(Errc::Parse, fmt::format("grid '{}' must be start:stop:step", text));
    const double start = parse_double(text.substr(0, c1), "grid start");
    const double stop = parse_double(text.substr(c1 + 1, c2 - c1 - 1), "grid stop");
    const double step = parse_double(text.substr(c2 + 1), "grid step");
    if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop)) {
      throw Error(Errc::InvalidParameter, fmt::format("grid '{}' is empty or unbounded", text));
    }
    const auto count = static_cast<long>(std::floor((stop - start) / step + 0.5));
    for (long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(parse_double(item, "grid"));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace spl
