#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spl/kv.hpp"
#include "spl/regularizer.hpp"
#include "spl/solver.hpp"

namespace spl {

enum class BenchKind { Regression, WeakLabel };

std::string_view to_string(BenchKind kind);

struct RegressionGenerator {
  int n = 500;
  int d = 10;
  double outlier_fraction = 0.3;
  double noise_sigma = 0.1;
  double outlier_offset = 50.0;
};

struct WeakLabelGenerator {
  std::vector<int> n_per_group{200, 200, 200};
  int d = 10;
  std::vector<double> flip_rates{0.05, 0.25, 0.45};
  double margin = 2.0;
};

struct BenchConfig {
  BenchKind kind = BenchKind::Regression;
  std::vector<std::uint64_t> seeds;
  RegressionGenerator regression;
  WeakLabelGenerator weak_label;
  RegularizerSpec reg = RegularizerSpec::hard();
  LossModel model;
  AgeSchedule schedule;
  int inner_mm_steps = 3;
  double group_rho = 0.7;
  std::vector<int> k_list{10, 50, 100};

  // Ten seeds, squared loss, Hard, capped age growth.
  static BenchConfig regression_defaults();
  // Ten seeds, three groups with flip rates 0.05 / 0.25 / 0.45, logistic loss,
  // mixture regularizer (gamma = 1).
  static BenchConfig weak_label_defaults();

  void validate() const;
  KvDocument to_kv() const;
  // Keys under `bench.`; missing keys keep the defaults of the given kind.
  static BenchConfig from_kv(const KvDocument& doc);
};

enum class BenchMethod { Batch, Spl, SplGroup };

std::string_view to_string(BenchMethod method);

struct BenchRow {
  std::uint64_t seed = 0;
  BenchMethod method = BenchMethod::Batch;
  MetricsReport metrics;
  std::size_t descent_violations = 0;
  std::size_t iterations = 0;
  std::optional<std::string> error;
};

struct MethodSummary {
  BenchMethod method = BenchMethod::Batch;
  double mean = 0.0;  // param_error (regression) or AP (weak labels)
  double stddev = 0.0;
  double median = 0.0;
  std::map<int, double> mean_p_at_k;
  std::size_t descent_violations = 0;
  std::size_t failed_runs = 0;
};

struct BenchResult {
  BenchKind kind = BenchKind::Regression;
  std::vector<BenchRow> rows;
  std::vector<MethodSummary> summary;

  // Headline metric of one row (param_error or AP).
  static double headline(const BenchRow& row, BenchKind kind);
  std::vector<double> headline_by_seed(BenchMethod method) const;
  const MethodSummary& summary_of(BenchMethod method) const;
  std::size_t total_descent_violations() const;
  bool ok() const;
};

// Runs BatchTrain, plain SPL and (weak labels only) SPL with the group
// partial-order prior on each seed's generated dataset.
BenchResult run_bench(const BenchConfig& config);

// Mean +- std table over seeds.
std::string render_bench_table(const BenchResult& result);
// One row per (seed, method).
std::string render_bench_csv(const BenchResult& result);

}  // namespace spl
