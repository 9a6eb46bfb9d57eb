#include "spl/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "spl/data.hpp"
#include "spl/error.hpp"

namespace spl {

std::string_view to_string(BenchKind kind) {
  return kind == BenchKind::Regression ? "regression" : "weak_label";
}

std::string_view to_string(BenchMethod method) {
  switch (method) {
    case BenchMethod::Batch: return "batch";
    case BenchMethod::Spl: return "spl";
    case BenchMethod::SplGroup: return "spl_group";
  }
  return "?";
}

namespace {

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> seeds(10);
  std::iota(seeds.begin(), seeds.end(), std::uint64_t{1});
  return seeds;
}

BenchKind parse_bench_kind(const std::string& name) {
  if (name == "regression") return BenchKind::Regression;
  if (name == "weak_label") return BenchKind::WeakLabel;
  throw Error(Errc::InvalidSpec, fmt::format("bench.kind: unknown value '{}'", name));
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

}  // namespace

BenchConfig BenchConfig::regression_defaults() {
  BenchConfig c;
  c.kind = BenchKind::Regression;
  c.seeds = default_seeds();
  c.reg = RegularizerSpec::hard();
  c.model = LossModel{LossKind::SquaredError, 1e-6};
  c.schedule = AgeSchedule{};
  c.schedule.lambda_max = 100.0;
  return c;
}

BenchConfig BenchConfig::weak_label_defaults() {
  BenchConfig c;
  c.kind = BenchKind::WeakLabel;
  c.seeds = default_seeds();
  c.reg = RegularizerSpec::mixture(1.0);
  c.model = LossModel{LossKind::Logistic, 1e-2};
  c.schedule = AgeSchedule{};
  c.schedule.quantile0 = 0.5;
  c.schedule.lambda_max = 5.0;
  return c;
}

void BenchConfig::validate() const {
  if (seeds.empty()) throw Error(Errc::InvalidParameter, "bench.seeds must not be empty");
  reg.validate();
  model.validate();
  schedule.validate();
  if (inner_mm_steps < 1) throw Error(Errc::InvalidParameter, "bench.inner_mm_steps must be at least 1");
  if (!(group_rho > 0.0 && group_rho < 1.0)) throw Error(Errc::InvalidParameter, "bench.group_rho must be in (0, 1)");
  for (int k : k_list) {
    if (k < 1) throw Error(Errc::InvalidParameter, "bench.k_list entries must be positive");
  }
  if (kind == BenchKind::Regression && model.is_classification()) {
    throw Error(Errc::InvalidSpec, "regression bench needs a regression loss");
  }
  if (kind == BenchKind::WeakLabel && !model.is_classification()) {
    throw Error(Errc::InvalidSpec, "weak-label bench needs a classification loss");
  }
}

KvDocument BenchConfig::to_kv() const {
  KvDocument doc;
  doc.set("bench.kind", std::string(to_string(kind)));
  std::string seed_list;
  for (std::size_t i = 0; i < seeds.size(); ++i) seed_list += (i ? "," : "") + std::to_string(seeds[i]);
  doc.set("bench.seeds", seed_list);
  if (kind == BenchKind::Regression) {
    doc.set("bench.n", regression.n);
    doc.set("bench.d", regression.d);
    doc.set("bench.outlier_fraction", regression.outlier_fraction);
    doc.set("bench.noise_sigma", regression.noise_sigma);
    doc.set("bench.outlier_offset", regression.outlier_offset);
  } else {
    std::string sizes, rates;
    for (std::size_t g = 0; g < weak_label.n_per_group.size(); ++g) {
      sizes += (g ? "," : "") + std::to_string(weak_label.n_per_group[g]);
      rates += (g ? "," : "") + format_double(weak_label.flip_rates[g]);
    }
    doc.set("bench.n_per_group", sizes);
    doc.set("bench.d", weak_label.d);
    doc.set("bench.flip_rates", rates);
    doc.set("bench.margin", weak_label.margin);
  }
  doc.merge("regularizer", reg.to_kv());
  doc.merge("loss", model.to_kv());
  doc.merge("schedule", schedule.to_kv());
  doc.set("bench.inner_mm_steps", inner_mm_steps);
  doc.set("bench.group_rho", group_rho);
  std::string ks;
  for (std::size_t i = 0; i < k_list.size(); ++i) ks += (i ? "," : "") + std::to_string(k_list[i]);
  doc.set("bench.k_list", ks);
  return doc;
}

BenchConfig BenchConfig::from_kv(const KvDocument& doc) {
  const BenchKind kind = parse_bench_kind(doc.get_string_or("bench.kind", "regression"));
  BenchConfig c = kind == BenchKind::Regression ? regression_defaults() : weak_label_defaults();
  if (doc.contains("bench.seeds")) {
    c.seeds.clear();
    for (auto s : doc.get_int_list("bench.seeds")) {
      if (s < 0) throw Error(Errc::Parse, "bench.seeds: seeds must be nonnegative");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else if (doc.contains("bench.n_seeds")) {
    const auto count = doc.get_int("bench.n_seeds");
    if (count < 1) throw Error(Errc::Parse, "bench.n_seeds must be positive");
    c.seeds.resize(static_cast<std::size_t>(count));
    std::iota(c.seeds.begin(), c.seeds.end(), std::uint64_t{1});
  }
  if (kind == BenchKind::Regression) {
    c.regression.n = static_cast<int>(doc.get_int_or("bench.n", c.regression.n));
    c.regression.d = static_cast<int>(doc.get_int_or("bench.d", c.regression.d));
    c.regression.outlier_fraction = doc.get_double_or("bench.outlier_fraction", c.regression.outlier_fraction);
    c.regression.noise_sigma = doc.get_double_or("bench.noise_sigma", c.regression.noise_sigma);
    c.regression.outlier_offset = doc.get_double_or("bench.outlier_offset", c.regression.outlier_offset);
  } else {
    if (doc.contains("bench.n_per_group")) {
      c.weak_label.n_per_group.clear();
      for (auto n : doc.get_int_list("bench.n_per_group")) c.weak_label.n_per_group.push_back(static_cast<int>(n));
    }
    c.weak_label.d = static_cast<int>(doc.get_int_or("bench.d", c.weak_label.d));
    if (doc.contains("bench.flip_rates")) c.weak_label.flip_rates = doc.get_double_list("bench.flip_rates");
    c.weak_label.margin = doc.get_double_or("bench.margin", c.weak_label.margin);
  }
  const auto reg_doc = doc.subtree("regularizer");
  if (!reg_doc.entries().empty()) c.reg = RegularizerSpec::from_kv(reg_doc);
  const auto loss_doc = doc.subtree("loss");
  if (!loss_doc.entries().empty()) c.model = LossModel::from_kv(loss_doc);
  const auto schedule_doc = doc.subtree("schedule");
  if (!schedule_doc.entries().empty()) {
    // Keys not given keep the bench default (including the age cap).
    KvDocument merged;
    const bool fixed_start = schedule_doc.contains("lambda0") && !schedule_doc.contains("quantile0");
    const KvDocument defaults = c.schedule.to_kv();
    for (const auto& [k, v] : defaults.entries()) {
      if (!(fixed_start && k == "quantile0")) merged.set(k, v);
    }
    for (const auto& [k, v] : schedule_doc.entries()) merged.set(k, v);
    c.schedule = AgeSchedule::from_kv(merged);
  }
  c.inner_mm_steps = static_cast<int>(doc.get_int_or("bench.inner_mm_steps", c.inner_mm_steps));
  c.group_rho = doc.get_double_or("bench.group_rho", c.group_rho);
  if (doc.contains("bench.k_list")) {
    c.k_list.clear();
    for (auto k : doc.get_int_list("bench.k_list")) c.k_list.push_back(static_cast<int>(k));
  }
  c.validate();
  return c;
}

double BenchResult::headline(const BenchRow& row, BenchKind kind) {
  if (kind == BenchKind::Regression) return row.metrics.param_error.value_or(std::nan(""));
  return row.metrics.average_precision;
}

std::vector<double> BenchResult::headline_by_seed(BenchMethod method) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.method == method) out.push_back(headline(r, kind));
  }
  return out;
}

const MethodSummary& BenchResult::summary_of(BenchMethod method) const {
  for (const auto& s : summary) {
    if (s.method == method) return s;
  }
  throw Error(Errc::InvalidParameter, fmt::format("bench has no '{}' method", to_string(method)));
}

std::size_t BenchResult::total_descent_violations() const {
  std::size_t total = 0;
  for (const auto& r : rows) total += r.descent_violations;
  return total;
}

bool BenchResult::ok() const {
  return std::none_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.error.has_value(); });
}

BenchResult run_bench(const BenchConfig& config) {
  config.validate();
  BenchResult result;
  result.kind = config.kind;
  std::vector<BenchMethod> methods{BenchMethod::Batch, BenchMethod::Spl};
  if (config.kind == BenchKind::WeakLabel) methods.push_back(BenchMethod::SplGroup);

  for (std::uint64_t seed : config.seeds) {
    Dataset data;
    Eigen::VectorXd truth;
    Eigen::VectorXd clean;
    if (config.kind == BenchKind::Regression) {
      const auto& g = config.regression;
      auto problem = generate_regression(g.n, g.d, g.outlier_fraction, g.noise_sigma, g.outlier_offset, seed);
      data = std::move(problem.data);
      truth = std::move(problem.true_w);
    } else {
      const auto& g = config.weak_label;
      auto problem = generate_weak_labels(g.n_per_group, g.d, g.flip_rates, g.margin, seed);
      data = std::move(problem.data);
      clean = std::move(problem.clean_labels);
    }
    const auto view = data.training_view();
    std::vector<int> k_list;
    for (int k : config.k_list) {
      if (k <= data.size()) k_list.push_back(k);
    }

    for (BenchMethod method : methods) {
      BenchRow row;
      row.seed = seed;
      row.method = method;
      ModelParams params = ModelParams::zeros(data.dim());
      try {
        if (method == BenchMethod::Batch) {
          params = batch_train(view, config.model);
        } else {
          PriorSet prior;
          if (method == BenchMethod::SplGroup) prior.group = group_prior_from_dataset(data, config.group_rho);
          const auto record = run_spl(config.reg, view, config.model, config.schedule, prior, config.inner_mm_steps, seed);
          row.descent_violations = record.descent_violations(1e-9);
          row.iterations = record.iterations.size();
          if (!record.ok()) row.error = record.error->message;
          params = record.final_params;
        }
      } catch (const Error& e) {
        row.error = e.what();
      }
      if (config.kind == BenchKind::Regression) {
        row.metrics.param_error = relative_param_error(params.w, truth);
      } else {
        const Eigen::VectorXd scores = decision_values(params, view);
        row.metrics = evaluate(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                               std::span<const double>(clean.data(), static_cast<std::size_t>(clean.size())), k_list);
      }
      result.rows.push_back(std::move(row));
    }
  }

  for (BenchMethod method : methods) {
    MethodSummary s;
    s.method = method;
    const auto values = result.headline_by_seed(method);
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.median = median_of(values);
    for (const auto& r : result.rows) {
      if (r.method != method) continue;
      s.descent_violations += r.descent_violations;
      if (r.error) ++s.failed_runs;
      for (const auto& [k, p] : r.metrics.p_at_k) s.mean_p_at_k[k] += p / n;
    }
    result.summary.push_back(std::move(s));
  }
  return result;
}

std::string render_bench_table(const BenchResult& result) {
  const bool regression = result.kind == BenchKind::Regression;
  std::string out = fmt::format("{:<10} {:>24} {:>12}", "method", regression ? "param_error" : "AP", "median");
  std::vector<int> ks;
  if (!result.summary.empty()) {
    for (const auto& [k, p] : result.summary.front().mean_p_at_k) ks.push_back(k);
  }
  for (int k : ks) out += fmt::format(" {:>8}", fmt::format("P@{}", k));
  out += fmt::format(" {:>10} {:>7}\n", "violations", "failed");
  for (const auto& s : result.summary) {
    out += fmt::format("{:<10} {:>24} {:>12.6f}", to_string(s.method), fmt::format("{:.6f} +- {:.6f}", s.mean, s.stddev),
                       s.median);
    for (int k : ks) out += fmt::format(" {:>8.4f}", s.mean_p_at_k.at(k));
    out += fmt::format(" {:>10} {:>7}\n", s.descent_violations, s.failed_runs);
  }
  return out;
}

std::string render_bench_csv(const BenchResult& result) {
  std::vector<int> ks;
  if (!result.rows.empty()) {
    for (const auto& [k, p] : result.rows.front().metrics.p_at_k) ks.push_back(k);
  }
  std::string out = "seed,method,param_error,average_precision";
  for (int k : ks) out += fmt::format(",p_at_{}", k);
  out += ",descent_violations,iterations,error\n";
  for (const auto& r : result.rows) {
    out += fmt::format("{},{},{},{}", r.seed, to_string(r.method),
                       r.metrics.param_error ? format_double(*r.metrics.param_error) : "",
                       result.kind == BenchKind::WeakLabel ? format_double(r.metrics.average_precision) : "");
    for (int k : ks) out += "," + format_double(r.metrics.p_at_k.at(k));
    std::string err = r.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    out += fmt::format(",{},{},{}\n", r.descent_violations, r.iterations, err);
  }
  return out;
}

}  // namespace spl
