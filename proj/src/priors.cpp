#include "spl/priors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "spl/error.hpp"
#include "spl/latent.hpp"

namespace spl {

namespace {

void require_ids(std::span<const std::size_t> ids, std::size_t n, bool distinct) {
  std::set<std::size_t> seen;
  for (std::size_t id : ids) {
    if (id >= n) throw Error(Errc::UnknownId, fmt::format("sample id {} out of range (n = {})", id, n));
    if (!seen.insert(id).second && distinct) {
      throw Error(Errc::DuplicateId, fmt::format("sample id {} listed twice", id));
    }
  }
}

void require_ranks(std::span<const int> rank, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(Errc::InvalidRank, fmt::format("rho {} outside (0,1)", rho));
  std::set<int> distinct(rank.begin(), rank.end());
  if (distinct.empty()) return;
  if (*distinct.begin() != 0 || *distinct.rbegin() != static_cast<int>(distinct.size()) - 1) {
    throw Error(Errc::InvalidRank, "group ranks must be contiguous from 0");
  }
}

void require_losses(std::span<const double> losses) {
  for (double l : losses) {
    if (!(l >= 0.0)) throw Error(Errc::NegativeLoss, fmt::format("loss must be nonnegative, got {}", l));
  }
}

std::vector<double> plain_weights(const RegularizerSpec& reg, std::span<const double> losses,
                                  std::span<const double> lambdas) {
  std::vector<double> w(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) w[i] = optimal_weight(reg, losses[i], lambdas[i]);
  return w;
}

// Replaces the chain's entries of `weights` by their ordered projection.
// Linear: exact constrained minimizer (PAV on unclipped targets with weights
// lambda_i, then clip). Other kinds: unit-weight projection of current weights.
void project_chain(const RegularizerSpec& reg, std::span<const double> losses, std::span<const double> lambdas,
                   std::span<const std::size_t> chain, std::vector<double>& weights) {
  if (chain.size() < 2) return;
  std::vector<double> values(chain.size());
  std::vector<double> w(chain.size(), 1.0);
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const std::size_t i = chain[k];
    if (reg.kind == RegularizerKind::Linear) {
      values[k] = 1.0 - losses[i] / lambdas[i];
      w[k] = lambdas[i];
    } else {
      values[k] = weights[i];
    }
  }
  const auto projected = isotonic_nonincreasing(values, w);
  for (std::size_t k = 0; k < chain.size(); ++k) weights[chain[k]] = std::clamp(projected[k], 0.0, 1.0);
}

double smoothness_objective(std::span<const double> v, std::span<const double> losses, std::span<const double> lambdas,
                            const Eigen::MatrixXd& laplacian, double beta) {
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += v[i] * losses[i] + lambdas[i] * (0.5 * v[i] * v[i] - v[i]);
  if (beta != 0.0) {
    const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
    total += beta * vv.dot(laplacian * vv);
  }
  return total;
}

}  // namespace

void PriorSet::validate(std::size_t n) const {
  if (outlier) require_ids(outlier->ids, n, false);
  if (chain) require_ids(chain->chain, n, true);
  if (group) {
    if (group->rank.size() != n) throw Error(Errc::InvalidRank, "group rank map must cover every sample");
    require_ranks(group->rank, group->rho);
  }
  if (smoothness) {
    if (static_cast<std::size_t>(smoothness->laplacian.rows()) != n) {
      throw Error(Errc::DimensionMismatch, "laplacian size does not match the sample count");
    }
    if (!(smoothness->beta >= 0.0)) throw Error(Errc::InvalidParameter, "smoothness beta must be nonnegative");
    validate_laplacian(smoothness->laplacian);
  }
}

std::vector<double> apply_outlier_prior(std::span<const double> weights, std::span<const std::size_t> outlier_ids) {
  require_ids(outlier_ids, weights.size(), false);
  std::vector<double> out(weights.begin(), weights.end());
  for (std::size_t id : outlier_ids) out[id] = 0.0;
  return out;
}

std::vector<double> isotonic_nonincreasing(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw Error(Errc::DimensionMismatch, "PAV values and weights differ in length");
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] > 0.0)) throw Error(Errc::InvalidParameter, "PAV weights must be positive");
    blocks.push_back({values[i], weights[i], 1});
    // Nonincreasing target: merge while the newer block exceeds the older one.
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

std::vector<double> apply_chain_order(const RegularizerSpec& reg, std::span<const double> losses, double lambda,
                                      std::span<const std::size_t> chain) {
  require_losses(losses);
  require_ids(chain, losses.size(), true);
  const std::vector<double> lambdas(losses.size(), lambda);
  auto weights = plain_weights(reg, losses, lambdas);
  project_chain(reg, losses, lambdas, chain, weights);
  return weights;
}

std::vector<double> group_lambdas(double lambda, std::span<const int> rank, double rho) {
  require_ranks(rank, rho);
  if (!(lambda > 0.0)) throw Error(Errc::InvalidParameter, "age parameter must be positive");
  std::vector<double> out(rank.size());
  for (std::size_t i = 0; i < rank.size(); ++i) out[i] = lambda * std::pow(rho, rank[i]);
  return out;
}

std::vector<double> apply_group_partial_order(const RegularizerSpec& reg, std::span<const double> losses,
                                              double lambda, std::span<const int> rank, double rho) {
  if (rank.size() != losses.size()) throw Error(Errc::InvalidRank, "group rank map must cover every sample");
  require_losses(losses);
  return plain_weights(reg, losses, group_lambdas(lambda, rank, rho));
}

Eigen::MatrixXd laplacian_from_edges(std::size_t n, std::span<const Edge> edges) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (const Edge& e : edges) {
    if (e.a >= n || e.b >= n) throw Error(Errc::UnknownId, fmt::format("edge ({}, {}) references an unknown sample", e.a, e.b));
    if (!(e.weight >= 0.0)) {
      throw Error(Errc::NotPositiveSemidefinite, fmt::format("edge ({}, {}) has negative weight {}", e.a, e.b, e.weight));
    }
    if (e.a == e.b) continue;
    const auto a = static_cast<Eigen::Index>(e.a);
    const auto b = static_cast<Eigen::Index>(e.b);
    lap(a, a) += e.weight;
    lap(b, b) += e.weight;
    lap(a, b) -= e.weight;
    lap(b, a) -= e.weight;
  }
  return lap;
}

void validate_laplacian(const Eigen::MatrixXd& laplacian) {
  if (laplacian.rows() != laplacian.cols()) throw Error(Errc::DimensionMismatch, "laplacian must be square");
  const double scale = std::max(1.0, laplacian.cwiseAbs().maxCoeff());
  if ((laplacian - laplacian.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(Errc::NotPositiveSemidefinite, "laplacian is not symmetric");
  }
  if (laplacian.rows() > 0 && laplacian.rowwise().sum().cwiseAbs().maxCoeff() > 1e-8) {
    throw Error(Errc::NotPositiveSemidefinite, "laplacian row sums are not zero");
  }
  if (laplacian.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
      throw Error(Errc::NotPositiveSemidefinite,
                  fmt::format("laplacian has negative eigenvalue {}", eig.eigenvalues().minCoeff()));
    }
  }
}

SmoothnessResult solve_smoothness(std::span<const double> losses, std::span<const double> lambdas,
                                  const Eigen::MatrixXd& laplacian, double beta, std::span<const double> start,
                                  std::span<const std::size_t> fixed_zero, const SmoothnessOptions& options) {
  const std::size_t n = losses.size();
  if (lambdas.size() != n || start.size() != n || static_cast<std::size_t>(laplacian.rows()) != n ||
      static_cast<std::size_t>(laplacian.cols()) != n) {
    throw Error(Errc::DimensionMismatch, "smoothness inputs disagree in size");
  }
  if (!(beta >= 0.0)) throw Error(Errc::InvalidParameter, "smoothness beta must be nonnegative");
  require_losses(losses);

  std::vector<bool> frozen(n, false);
  for (std::size_t id : fixed_zero) {
    if (id >= n) throw Error(Errc::UnknownId, fmt::format("sample id {} out of range", id));
    frozen[id] = true;
  }

  SmoothnessResult result;
  result.weights.assign(start.begin(), start.end());
  auto& v = result.weights;
  for (std::size_t i = 0; i < n; ++i) v[i] = frozen[i] ? 0.0 : std::clamp(v[i], 0.0, 1.0);
  result.objective_trace.push_back(smoothness_objective(v, losses, lambdas, laplacian, beta));

  Eigen::MatrixXd hessian = 2.0 * beta * laplacian;
  for (std::size_t i = 0; i < n; ++i) hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += lambdas[i];
  const auto gradient = [&] {
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd lv = laplacian * vv;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      g(ii) = losses[i] + lambdas[i] * (v[i] - 1.0) + 2.0 * beta * lv(ii);
    }
    return g;
  };
  const auto record = [&] {
    const double obj = smoothness_objective(v, losses, lambdas, laplacian, beta);
    if (obj > result.objective_trace.back() + 1e-12 * std::max(1.0, std::abs(obj))) {
      throw Error(Errc::NotPositiveSemidefinite, "smoothness objective increased during coordinate descent");
    }
    result.objective_trace.push_back(obj);
  };

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i]) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const double curvature = hessian(ii, ii);
      if (!(curvature > 0.0)) {
        throw Error(Errc::NotPositiveSemidefinite, fmt::format("nonpositive curvature at coordinate {}", i));
      }
      double coupling = 0.0;
      if (beta != 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) coupling += laplacian(ii, static_cast<Eigen::Index>(j)) * v[j];
        }
      }
      v[i] = std::clamp((lambdas[i] - losses[i] - 2.0 * beta * coupling) / curvature, 0.0, 1.0);
    }
    result.sweeps = sweep + 1;
    record();

    // Newton step on the coordinates off their bounds, cut back to stay in the box.
    Eigen::VectorXd g = gradient();
    std::vector<Eigen::Index> free;
    double kkt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i]) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const bool at_lower = v[i] <= 0.0 && g(ii) >= 0.0;
      const bool at_upper = v[i] >= 1.0 && g(ii) <= 0.0;
      if (!at_lower && !at_upper) {
        free.push_back(ii);
        kkt = std::max(kkt, std::abs(g(ii)));
      }
    }
    if (kkt < options.tolerance) break;
    const auto m = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd h_ff(m, m);
    Eigen::VectorXd g_f(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      g_f(a) = g(free[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < m; ++b) {
        h_ff(a, b) = hessian(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
      }
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h_ff);
    if (ldlt.info() != Eigen::Success) continue;
    const Eigen::VectorXd d = ldlt.solve(-g_f);
    double t = 1.0;
    for (Eigen::Index a = 0; a < m; ++a) {
      const double vi = v[static_cast<std::size_t>(free[static_cast<std::size_t>(a)])];
      if (d(a) > 0.0) t = std::min(t, (1.0 - vi) / d(a));
      if (d(a) < 0.0) t = std::min(t, -vi / d(a));
    }
    if (!(t > 0.0)) continue;
    for (Eigen::Index a = 0; a < m; ++a) {
      auto& vi = v[static_cast<std::size_t>(free[static_cast<std::size_t>(a)])];
      vi = std::clamp(vi + t * d(a), 0.0, 1.0);
    }
    record();
  }
  return result;
}

std::vector<double> apply_smoothness(std::span<const double> losses, double lambda, const Eigen::MatrixXd& laplacian,
                                     double beta) {
  if (!(lambda > 0.0)) throw Error(Errc::InvalidParameter, "age parameter must be positive");
  validate_laplacian(laplacian);
  const std::vector<double> lambdas(losses.size(), lambda);
  const auto start = plain_weights(RegularizerSpec::linear(), losses, lambdas);
  return solve_smoothness(losses, lambdas, laplacian, beta, start).weights;
}

std::vector<double> apply_smoothness(const RegularizerSpec& reg, std::span<const double> losses, double lambda,
                                     const Eigen::MatrixXd& laplacian, double beta) {
  if (reg.kind != RegularizerKind::Linear) {
    throw Error(Errc::UnsupportedRegularizer,
                fmt::format("smoothness prior requires the linear regularizer, got {}", to_string(reg.kind)));
  }
  return apply_smoothness(losses, lambda, laplacian, beta);
}

PriorWeights apply_priors(const RegularizerSpec& reg, std::span<const double> losses, double lambda,
                          const PriorSet& priors) {
  require_losses(losses);
  PriorWeights out;
  out.lambdas = priors.group ? group_lambdas(lambda, priors.group->rank, priors.group->rho)
                             : std::vector<double>(losses.size(), lambda);
  if (priors.smoothness && reg.kind != RegularizerKind::Linear) {
    throw Error(Errc::UnsupportedRegularizer,
                fmt::format("smoothness prior requires the linear regularizer, got {}", to_string(reg.kind)));
  }
  out.weights = plain_weights(reg, losses, out.lambdas);
  if (priors.chain) project_chain(reg, losses, out.lambdas, priors.chain->chain, out.weights);
  if (priors.smoothness) {
    std::span<const std::size_t> frozen;
    if (priors.outlier) frozen = priors.outlier->ids;
    out.weights = solve_smoothness(losses, out.lambdas, priors.smoothness->laplacian, priors.smoothness->beta,
                                   out.weights, frozen)
                      .weights;
  }
  if (priors.outlier) out.weights = apply_outlier_prior(out.weights, priors.outlier->ids);
  return out;
}

double prior_latent_objective(const RegularizerSpec& reg, std::span<const double> losses, const PriorWeights& solved,
                              const PriorSet& priors) {
  std::vector<bool> skip(losses.size(), false);
  if (priors.outlier) {
    for (std::size_t id : priors.outlier->ids) skip[id] = true;
  }
  double total = 0.0;
  if (!priors.chain && !priors.smoothness) {
    for (std::size_t i = 0; i < losses.size(); ++i) {
      if (!skip[i]) total += latent_loss(reg, losses[i], solved.lambdas[i]);
    }
    return total;
  }
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (skip[i]) continue;
    // min over v of f(v, lambda) is attained at v = 1 for every catalog regularizer.
    total += weight_objective(reg, solved.weights[i], losses[i], solved.lambdas[i]) -
             weight_objective(reg, 1.0, 0.0, solved.lambdas[i]);
  }
  if (priors.smoothness && priors.smoothness->beta != 0.0) {
    const Eigen::Map<const Eigen::VectorXd> v(solved.weights.data(), static_cast<Eigen::Index>(solved.weights.size()));
    total += priors.smoothness->beta * v.dot(priors.smoothness->laplacian * v);
  }
  return total;
}

GroupOrderPrior group_prior_from_dataset(const Dataset& data, double rho) {
  if (!data.group) throw Error(Errc::InvalidRank, "dataset has no group column");
  GroupOrderPrior prior{*data.group, rho};
  require_ranks(prior.rank, rho);
  return prior;
}

std::vector<Edge> load_edges(const std::string& path, const Dataset& data) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, fmt::format("cannot open edge list '{}'", path));
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("a,", 0) == 0) continue;
    std::istringstream row(line);
    std::string a, b, w;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, w)) {
      throw Error(Errc::Parse, fmt::format("{}:{}: expected 'id_a,id_b,weight'", path, line_no));
    }
    const auto where = fmt::format("{}:{}", path, line_no);
    const auto id_a = static_cast<std::int64_t>(parse_double(a, where));
    const auto id_b = static_cast<std::int64_t>(parse_double(b, where));
    edges.push_back({data.index_of(id_a), data.index_of(id_b), parse_double(w, where)});
  }
  return edges;
}

PriorSet priors_from_kv(const KvDocument& doc, const Dataset& data) {
  PriorSet priors;
  const auto to_rows = [&](const std::vector<std::int64_t>& ids) {
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (auto id : ids) rows.push_back(data.index_of(id));
    return rows;
  };
  if (doc.get_bool_or("group.enabled", doc.contains("group.rho"))) {
    priors.group = group_prior_from_dataset(data, doc.get_double_or("group.rho", 0.7));
  }
  if (doc.contains("chain.ids")) priors.chain = ChainOrderPrior{to_rows(doc.get_int_list("chain.ids"))};
  if (doc.contains("outlier.ids")) priors.outlier = OutlierPrior{to_rows(doc.get_int_list("outlier.ids"))};
  if (doc.contains("smoothness.beta")) {
    const auto edges = load_edges(doc.get_string("smoothness.edges"), data);
    priors.smoothness = SmoothnessPrior{laplacian_from_edges(static_cast<std::size_t>(data.size()), edges),
                                        doc.get_double("smoothness.beta")};
  }
  priors.validate(static_cast<std::size_t>(data.size()));
  return priors;
}

}  // namespace spl
