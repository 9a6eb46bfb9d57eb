#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spl/data.hpp"
#include "spl/kv.hpp"
#include "spl/regularizer.hpp"

namespace spl {

// Sample ids here are row indices into the loss / weight vectors.

struct OutlierPrior {
  std::vector<std::size_t> ids;
};

// Weights must be nonincreasing along `chain` (first entry most trusted).
struct ChainOrderPrior {
  std::vector<std::size_t> chain;
};

// rank[i] is the trust rank of sample i's group, 0 = most trusted.
struct GroupOrderPrior {
  std::vector<int> rank;
  double rho = 0.7;
};

struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 1.0;
};

struct SmoothnessPrior {
  Eigen::MatrixXd laplacian;
  double beta = 0.0;
};

// The configured subset of priors. Application order is fixed:
// group order, chain order, smoothness, outlier clamp.
struct PriorSet {
  std::optional<GroupOrderPrior> group;
  std::optional<ChainOrderPrior> chain;
  std::optional<SmoothnessPrior> smoothness;
  std::optional<OutlierPrior> outlier;

  bool empty() const { return !group && !chain && !smoothness && !outlier; }
  // Checks every configured prior against a problem of n samples.
  void validate(std::size_t n) const;
};

std::vector<double> apply_outlier_prior(std::span<const double> weights, std::span<const std::size_t> outlier_ids);

// Weighted pool-adjacent-violators: the weighted least-squares projection of
// `values` onto nonincreasing sequences.
std::vector<double> isotonic_nonincreasing(std::span<const double> values, std::span<const double> weights);

std::vector<double> apply_chain_order(const RegularizerSpec& reg, std::span<const double> losses, double lambda,
                                      std::span<const std::size_t> chain);

// Per-sample age parameters lambda * rho^rank.
std::vector<double> group_lambdas(double lambda, std::span<const int> rank, double rho);

std::vector<double> apply_group_partial_order(const RegularizerSpec& reg, std::span<const double> losses,
                                              double lambda, std::span<const int> rank, double rho);

// Builds a graph Laplacian from an undirected edge list with nonnegative weights.
Eigen::MatrixXd laplacian_from_edges(std::size_t n, std::span<const Edge> edges);
// Symmetry, zero row sums and positive semidefiniteness.
void validate_laplacian(const Eigen::MatrixXd& laplacian);

struct SmoothnessResult {
  std::vector<double> weights;
  std::vector<double> objective_trace;  // objective after each sweep, starting with the initial point
  int sweeps = 0;
};

struct SmoothnessOptions {
  double tolerance = 1e-10;  // on the projected gradient
  int max_sweeps = 10000;
};

// Cyclic coordinate descent, each sweep followed by a Newton step on the free
// coordinates, for
//   sum_i v_i l_i + lambda_i (v_i^2/2 - v_i) + beta v^T L v,  v in [0,1]^n,
// with entries in `fixed_zero` held at 0. Linear regularizer only.
SmoothnessResult solve_smoothness(std::span<const double> losses, std::span<const double> lambdas,
                                  const Eigen::MatrixXd& laplacian, double beta,
                                  std::span<const double> start, std::span<const std::size_t> fixed_zero = {},
                                  const SmoothnessOptions& options = {});

std::vector<double> apply_smoothness(std::span<const double> losses, double lambda, const Eigen::MatrixXd& laplacian,
                                     double beta);
std::vector<double> apply_smoothness(const RegularizerSpec& reg, std::span<const double> losses, double lambda,
                                     const Eigen::MatrixXd& laplacian, double beta);

struct PriorWeights {
  std::vector<double> weights;
  std::vector<double> lambdas;  // effective per-sample age parameter
};

PriorWeights apply_priors(const RegularizerSpec& reg, std::span<const double> losses, double lambda,
                          const PriorSet& priors);

// Latent objective the weight step majorizes: sum of F_{lambda_i}(l_i) over
// non-outliers, or for coupled priors (chain, smoothness) the optimal value of
// the constrained weight subproblem shifted so that zero losses give zero.
double prior_latent_objective(const RegularizerSpec& reg, std::span<const double> losses,
                              const PriorWeights& solved, const PriorSet& priors);

// Key-value form; ids are dataset sample ids, mapped to rows through `data`.
// Keys: group.enabled, group.rho (ranks from the group column); chain.ids;
// outlier.ids; smoothness.beta, smoothness.edges (CSV path, rows id_a,id_b,weight).
PriorSet priors_from_kv(const KvDocument& doc, const Dataset& data);

// Group ranks taken verbatim from the dataset's group column (group g has rank g).
GroupOrderPrior group_prior_from_dataset(const Dataset& data, double rho);

std::vector<Edge> load_edges(const std::string& path, const Dataset& data);

}  // namespace spl
