#include "spl/config.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "spl/error.hpp"

namespace spl {

namespace {

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_double(xs[i]);
  return out;
}

std::vector<int> to_ints(const std::vector<std::int64_t>& xs) { return {xs.begin(), xs.end()}; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw Error(Errc::Io, fmt::format("write to '{}' failed", path));
}

}  // namespace

RunConfig RunConfig::from_kv(const KvDocument& doc) {
  RunConfig c;
  const std::string source = doc.get_string_or("dataset.source", "generate_regression");
  auto& ds = c.dataset;
  if (source == "generate_regression") {
    ds.kind = DatasetSource::Kind::Regression;
  } else if (source == "generate_weak_labels") {
    ds.kind = DatasetSource::Kind::WeakLabels;
  } else {
    ds.kind = DatasetSource::Kind::File;
    std::filesystem::path p(source);
    // Relative paths resolve against the config file's directory.
    if (p.is_relative() && doc.source() != "<memory>") {
      p = std::filesystem::path(doc.source()).parent_path() / p;
    }
    ds.path = p.string();
  }
  ds.n = static_cast<int>(doc.get_int_or("dataset.n", ds.n));
  ds.d = static_cast<int>(doc.get_int_or("dataset.d", ds.d));
  ds.outlier_fraction = doc.get_double_or("dataset.outlier_fraction", ds.outlier_fraction);
  ds.noise_sigma = doc.get_double_or("dataset.noise_sigma", ds.noise_sigma);
  ds.outlier_offset = doc.get_double_or("dataset.outlier_offset", ds.outlier_offset);
  if (doc.contains("dataset.n_per_group")) ds.n_per_group = to_ints(doc.get_int_list("dataset.n_per_group"));
  if (doc.contains("dataset.flip_rates")) ds.flip_rates = doc.get_double_list("dataset.flip_rates");
  ds.margin = doc.get_double_or("dataset.margin", ds.margin);

  const auto reg_doc = doc.subtree("regularizer");
  if (!reg_doc.entries().empty()) c.reg = RegularizerSpec::from_kv(reg_doc);
  const auto loss_doc = doc.subtree("loss");
  if (!loss_doc.entries().empty()) {
    c.model = LossModel::from_kv(loss_doc);
  } else if (ds.kind == DatasetSource::Kind::WeakLabels) {
    c.model = LossModel{LossKind::Hinge, 1e-2};
  }
  const auto schedule_doc = doc.subtree("schedule");
  if (!schedule_doc.entries().empty()) c.schedule = AgeSchedule::from_kv(schedule_doc);
  c.prior = doc.subtree("prior");
  const auto seed = doc.get_int_or("seed", 0);
  if (seed < 0) throw Error(Errc::Parse, fmt::format("{}: field 'seed' must be nonnegative", doc.source()));
  c.seed = static_cast<std::uint64_t>(seed);
  c.inner_mm_steps = static_cast<int>(doc.get_int_or("inner_mm_steps", c.inner_mm_steps));
  if (c.inner_mm_steps < 1) {
    throw Error(Errc::Parse, fmt::format("{}: field 'inner_mm_steps' must be at least 1", doc.source()));
  }
  if (doc.contains("metrics.k_list")) c.k_list = to_ints(doc.get_int_list("metrics.k_list"));
  c.out_dir = doc.get_string_or("out", c.out_dir);
  return c;
}

RunConfig RunConfig::load(const std::string& path) { return from_kv(KvDocument::load(path)); }

KvDocument RunConfig::to_kv() const {
  KvDocument doc;
  const auto& ds = dataset;
  switch (ds.kind) {
    case DatasetSource::Kind::Regression:
      doc.set("dataset.source", std::string("generate_regression"));
      doc.set("dataset.n", ds.n);
      doc.set("dataset.d", ds.d);
      doc.set("dataset.outlier_fraction", ds.outlier_fraction);
      doc.set("dataset.noise_sigma", ds.noise_sigma);
      doc.set("dataset.outlier_offset", ds.outlier_offset);
      break;
    case DatasetSource::Kind::WeakLabels:
      doc.set("dataset.source", std::string("generate_weak_labels"));
      doc.set("dataset.n_per_group", join_ints(ds.n_per_group));
      doc.set("dataset.d", ds.d);
      doc.set("dataset.flip_rates", join_doubles(ds.flip_rates));
      doc.set("dataset.margin", ds.margin);
      break;
    case DatasetSource::Kind::File:
      doc.set("dataset.source", ds.path);
      break;
  }
  doc.merge("regularizer", reg.to_kv());
  doc.merge("loss", model.to_kv());
  doc.merge("schedule", schedule.to_kv());
  doc.merge("prior", prior);
  doc.set("seed", static_cast<std::int64_t>(seed));
  doc.set("inner_mm_steps", inner_mm_steps);
  doc.set("metrics.k_list", join_ints(k_list));
  doc.set("out", out_dir);
  return doc;
}

LoadedData load_data(const RunConfig& config) {
  LoadedData out;
  const auto& ds = config.dataset;
  switch (ds.kind) {
    case DatasetSource::Kind::Regression: {
      auto p = generate_regression(ds.n, ds.d, ds.outlier_fraction, ds.noise_sigma, ds.outlier_offset, config.seed);
      out.data = std::move(p.data);
      out.true_w = std::move(p.true_w);
      break;
    }
    case DatasetSource::Kind::WeakLabels: {
      auto p = generate_weak_labels(ds.n_per_group, ds.d, ds.flip_rates, ds.margin, config.seed);
      out.data = std::move(p.data);
      out.clean_labels = std::move(p.clean_labels);
      break;
    }
    case DatasetSource::Kind::File:
      if (!std::filesystem::exists(ds.path)) {
        throw Error(Errc::Io, fmt::format("dataset file '{}' does not exist", ds.path));
      }
      out.data = load_dataset(ds.path);
      break;
  }
  return out;
}

TrainOutcome train(const RunConfig& config) {
  const LoadedData loaded = load_data(config);
  const Dataset& data = loaded.data;
  const PriorSet prior = priors_from_kv(config.prior, data);
  TrainOutcome outcome;
  outcome.record = run_spl(config.reg, data.training_view(), config.model, config.schedule, prior,
                           config.inner_mm_steps, config.seed);
  const auto& params = outcome.record.final_params;

  if (config.model.is_classification()) {
    const Eigen::VectorXd scores = decision_values(params, data.training_view());
    // Against clean labels when known, otherwise against the training labels.
    const Eigen::VectorXd& reference = loaded.clean_labels ? *loaded.clean_labels : data.labels;
    std::vector<int> ks;
    for (int k : config.k_list) {
      if (k <= data.size()) ks.push_back(k);
    }
    outcome.metrics = evaluate(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                               std::span<const double>(reference.data(), static_cast<std::size_t>(reference.size())), ks);
  }
  if (loaded.true_w) outcome.metrics.param_error = relative_param_error(params.w, *loaded.true_w);

  auto& m = outcome.metrics_doc;
  m = outcome.metrics.to_kv();
  m.set("status", std::string(outcome.record.ok() ? "ok" : "error"));
  if (!outcome.record.ok()) {
    m.set("error.code", std::string(to_string(outcome.record.error->code)));
    m.set("error.outer_iter", outcome.record.error->outer);
    m.set("error.inner_iter", outcome.record.error->inner);
    m.set("error.message", outcome.record.error->message);
  }
  m.set("lambda0", outcome.record.lambda0);
  m.set("iterations", static_cast<std::int64_t>(outcome.record.iterations.size()));
  m.set("descent_violations", static_cast<std::int64_t>(outcome.record.descent_violations()));
  if (!outcome.record.iterations.empty()) {
    const auto& last = outcome.record.iterations.back();
    m.set("final_lambda", last.lambda);
    m.set("final_latent_objective", last.latent_objective);
    m.set("final_weighted_objective", last.weighted_objective);
    m.set("final_active_weights", static_cast<std::int64_t>(last.active_weights()));
  }
  outcome.model_doc = params.to_kv();
  return outcome;
}

std::string timestamp_line() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return fmt::format("# generated {}\n", buf);
}

TrainOutcome train_to_directory(const RunConfig& config, bool timestamp) {
  auto outcome = train(config);
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw Error(Errc::Io, fmt::format("cannot create output directory '{}': {}", config.out_dir, ec.message()));
  const auto dir = std::filesystem::path(config.out_dir);
  const std::string header = timestamp ? timestamp_line() : "";
  write_text((dir / "run_log.csv").string(), render_run_log_csv(outcome.record));
  write_text((dir / "model.kv").string(), header + outcome.model_doc.render());
  write_text((dir / "metrics.kv").string(), header + outcome.metrics_doc.render());
  write_text((dir / "config.kv").string(), header + config.to_kv().render());
  return outcome;
}

}  // namespace spl
