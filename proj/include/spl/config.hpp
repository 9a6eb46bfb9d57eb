#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spl/data.hpp"
#include "spl/kv.hpp"
#include "spl/priors.hpp"
#include "spl/regularizer.hpp"
#include "spl/solver.hpp"

namespace spl {

// Where the training data comes from: one of the two generators, or a CSV file.
struct DatasetSource {
  enum class Kind { Regression, WeakLabels, File };
  Kind kind = Kind::Regression;
  std::string path;  // File only
  int n = 200;
  int d = 5;
  double outlier_fraction = 0.2;
  double noise_sigma = 0.1;
  double outlier_offset = 50.0;
  std::vector<int> n_per_group{100, 100, 100};
  std::vector<double> flip_rates{0.05, 0.25, 0.45};
  double margin = 2.0;
};

struct LoadedData {
  Dataset data;
  std::optional<Eigen::VectorXd> true_w;        // generated regression
  std::optional<Eigen::VectorXd> clean_labels;  // generated weak labels
};

// Schema (flat keys):
//   dataset.source = generate_regression | generate_weak_labels | <csv path>
//   dataset.n, dataset.d, dataset.outlier_fraction, dataset.noise_sigma, dataset.outlier_offset
//   dataset.n_per_group, dataset.flip_rates, dataset.margin
//   regularizer.kind, regularizer.gamma, regularizer.alpha
//   loss.kind, loss.ridge
//   schedule.lambda0 | schedule.quantile0, schedule.growth, schedule.max_outer,
//   schedule.stop_when_all_included, schedule.lambda_max
//   prior.group.enabled, prior.group.rho, prior.chain.ids, prior.outlier.ids,
//   prior.smoothness.beta, prior.smoothness.edges
//   seed, inner_mm_steps, metrics.k_list, out
struct RunConfig {
  DatasetSource dataset;
  RegularizerSpec reg = RegularizerSpec::hard();
  LossModel model;
  AgeSchedule schedule;
  KvDocument prior;  // resolved against the dataset once it is loaded
  std::uint64_t seed = 0;
  int inner_mm_steps = 3;
  std::vector<int> k_list{10, 50, 100};
  std::string out_dir = "spl_out";

  // Parse errors name the offending key and the source file.
  static RunConfig from_kv(const KvDocument& doc);
  static RunConfig load(const std::string& path);
  KvDocument to_kv() const;
};

// Generates or reads the dataset; a missing file raises Errc::Io naming the path.
LoadedData load_data(const RunConfig& config);

struct TrainOutcome {
  SplRunRecord record;
  MetricsReport metrics;
  KvDocument metrics_doc;
  KvDocument model_doc;
};

TrainOutcome train(const RunConfig& config);

// Writes run_log.csv, model.kv, metrics.kv and config.kv into config.out_dir.
// With timestamp = true each key-value file starts with a "# generated" line.
TrainOutcome train_to_directory(const RunConfig& config, bool timestamp);

// "# generated <UTC time>" header for key-value outputs.
std::string timestamp_line();

}  // namespace spl
