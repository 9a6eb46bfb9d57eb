#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spl/kv.hpp"

namespace spl {

// What the solver is allowed to see: features and labels only.
struct SampleView {
  const Eigen::MatrixXd& features;
  const Eigen::VectorXd& labels;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

struct Dataset {
  std::vector<std::int64_t> ids;
  Eigen::MatrixXd features;  // n x d
  Eigen::VectorXd labels;
  std::optional<std::vector<int>> group;
  // Planted outliers / flipped labels. Evaluation only.
  std::optional<std::vector<bool>> truth_flag;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  void validate() const;
  SampleView training_view() const { return {features, labels}; }
  // Row index of a sample id; throws Errc::UnknownId.
  std::size_t index_of(std::int64_t id) const;
  std::size_t flagged_count() const;

  bool operator==(const Dataset& other) const;
};

struct RegressionProblem {
  Dataset data;
  Eigen::VectorXd true_w;
};

// Standard-normal features and weights; labels y = Xw* + N(0, sigma^2), then
// floor(outlier_fraction * n) rows shifted by +-outlier_offset (random sign).
RegressionProblem generate_regression(int n, int d, double outlier_fraction, double noise_sigma,
                                      double outlier_offset, std::uint64_t seed);

struct WeakLabelProblem {
  Dataset data;
  Eigen::VectorXd clean_labels;
};

// Two unit-variance Gaussian clouds at +-(margin/2) along a random direction.
// Group g gets exactly floor(flip_rate[g] * n_g) labels flipped; samples are
// shuffled across groups so ids carry no group information.
WeakLabelProblem generate_weak_labels(std::span<const int> n_per_group, int d,
                                      std::span<const double> flip_rate_per_group, double margin,
                                      std::uint64_t seed);

// CSV with header `id,group,y,x1..xd`; the group column is optional.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);
Dataset parse_dataset_csv(const std::string& text, const std::string& source);
std::string render_dataset_csv(const Dataset& data);

struct MetricsReport {
  std::map<int, double> p_at_k;
  double average_precision = 0.0;
  bool ranked = false;  // set by evaluate; AP is written only then
  std::optional<double> param_error;

  KvDocument to_kv() const;
};

// Ranking metrics against clean +-1 labels; ties broken by ascending index.
MetricsReport evaluate(std::span<const double> scores, std::span<const double> clean_labels,
                       std::span<const int> k_list);

// ||w - w*|| / ||w*|| (absolute error when w* = 0).
double relative_param_error(const Eigen::VectorXd& w, const Eigen::VectorXd& w_true);

}  // namespace spl
