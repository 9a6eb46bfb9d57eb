#include "spl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "spl/error.hpp"
#include "spl/rng.hpp"

namespace spl {

void Dataset::validate() const {
  const auto n = static_cast<std::size_t>(size());
  if (n < 1 || dim() < 1) throw Error(Errc::InvalidParameter, "dataset needs at least one sample and one feature");
  if (static_cast<std::size_t>(labels.size()) != n || ids.size() != n) {
    throw Error(Errc::DimensionMismatch, "dataset ids, labels and features disagree in length");
  }
  if (group && group->size() != n) throw Error(Errc::DimensionMismatch, "group column length mismatch");
  if (truth_flag && truth_flag->size() != n) throw Error(Errc::DimensionMismatch, "truth flag length mismatch");
}

std::size_t Dataset::index_of(std::int64_t id) const {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw Error(Errc::UnknownId, fmt::format("unknown sample id {}", id));
  return static_cast<std::size_t>(it - ids.begin());
}

std::size_t Dataset::flagged_count() const {
  if (!truth_flag) return 0;
  return static_cast<std::size_t>(std::count(truth_flag->begin(), truth_flag->end(), true));
}

bool Dataset::operator==(const Dataset& other) const {
  return ids == other.ids && features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() && features == other.features &&
         labels.size() == other.labels.size() && labels == other.labels && group == other.group &&
         truth_flag == other.truth_flag;
}

RegressionProblem generate_regression(int n, int d, double outlier_fraction, double noise_sigma,
                                      double outlier_offset, std::uint64_t seed) {
  if (d < 1 || n < d + 1) throw Error(Errc::InvalidParameter, fmt::format("need n >= d + 1 (n={}, d={})", n, d));
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw Error(Errc::InvalidParameter, fmt::format("outlier fraction {} outside [0,1)", outlier_fraction));
  }
  if (!(noise_sigma >= 0.0)) throw Error(Errc::InvalidParameter, "noise sigma must be nonnegative");

  Rng rng(seed);
  RegressionProblem out;
  out.true_w.resize(d);
  for (int j = 0; j < d; ++j) out.true_w[j] = rng.normal();

  Dataset& data = out.data;
  data.features.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.features(i, j) = rng.normal();
  }
  data.labels = data.features * out.true_w;
  for (int i = 0; i < n; ++i) data.labels[i] += noise_sigma * rng.normal();

  const auto n_out = static_cast<std::size_t>(std::floor(outlier_fraction * n));
  data.truth_flag = std::vector<bool>(n, false);
  for (std::size_t i : rng.sample_without_replacement(n, n_out)) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    data.labels[static_cast<Eigen::Index>(i)] += sign * outlier_offset;
    (*data.truth_flag)[i] = true;
  }
  data.ids.resize(n);
  std::iota(data.ids.begin(), data.ids.end(), std::int64_t{0});
  return out;
}

WeakLabelProblem generate_weak_labels(std::span<const int> n_per_group, int d,
                                      std::span<const double> flip_rate_per_group, double margin,
                                      std::uint64_t seed) {
  if (n_per_group.size() != flip_rate_per_group.size() || n_per_group.empty()) {
    throw Error(Errc::DimensionMismatch, "group sizes and flip rates must be nonempty lists of equal length");
  }
  if (d < 1) throw Error(Errc::InvalidParameter, "dimension must be positive");
  if (!(margin > 0.0)) throw Error(Errc::InvalidParameter, "margin must be positive");
  for (std::size_t g = 0; g < flip_rate_per_group.size(); ++g) {
    const double r = flip_rate_per_group[g];
    if (!(r >= 0.0 && r < 1.0)) throw Error(Errc::InvalidParameter, fmt::format("flip rate {} outside [0,1)", r));
    if (g > 0 && r < flip_rate_per_group[g - 1]) {
      throw Error(Errc::InvalidParameter, "flip rates must be nondecreasing in group index");
    }
    if (n_per_group[g] < 1) throw Error(Errc::InvalidParameter, "every group needs at least one sample");
  }

  Rng rng(seed);
  Eigen::VectorXd direction(d);
  for (int j = 0; j < d; ++j) direction[j] = rng.normal();
  direction.normalize();

  const int n = std::accumulate(n_per_group.begin(), n_per_group.end(), 0);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd clean(n);
  Eigen::VectorXd weak(n);
  std::vector<int> group(n);
  std::vector<bool> flipped(n, false);

  int row = 0;
  for (std::size_t g = 0; g < n_per_group.size(); ++g) {
    const int begin = row;
    for (int i = 0; i < n_per_group[g]; ++i, ++row) {
      const double y = rng.uniform() < 0.5 ? -1.0 : 1.0;
      clean[row] = y;
      weak[row] = y;
      group[row] = static_cast<int>(g);
      for (int j = 0; j < d; ++j) x(row, j) = y * 0.5 * margin * direction[j] + rng.normal();
    }
    const auto n_flip = static_cast<std::size_t>(std::floor(flip_rate_per_group[g] * n_per_group[g]));
    for (std::size_t k : rng.sample_without_replacement(n_per_group[g], n_flip)) {
      const int r = begin + static_cast<int>(k);
      weak[r] = -weak[r];
      flipped[r] = true;
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  WeakLabelProblem out;
  Dataset& data = out.data;
  data.features.resize(n, d);
  data.labels.resize(n);
  out.clean_labels.resize(n);
  data.group = std::vector<int>(n);
  data.truth_flag = std::vector<bool>(n);
  data.ids.resize(n);
  for (int i = 0; i < n; ++i) {
    const int src = order[i];
    data.features.row(i) = x.row(src);
    data.labels[i] = weak[src];
    out.clean_labels[i] = clean[src];
    (*data.group)[i] = group[src];
    (*data.truth_flag)[i] = flipped[src];
    data.ids[i] = i;
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::int64_t parse_int_cell(const std::string& cell, const std::string& where) {
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (cell.empty() || used != cell.size()) throw Error(Errc::Parse, fmt::format("{}: '{}' is not an integer", where, cell));
  return value;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::Parse, fmt::format("{}: empty file", source));
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "id") {
    throw Error(Errc::Parse, fmt::format("{}:1: header must start with 'id'", source));
  }
  const bool has_group = header[1] == "group";
  const std::size_t y_col = has_group ? 2 : 1;
  if (header.size() <= y_col + 0 || header[y_col] != "y") {
    throw Error(Errc::Parse, fmt::format("{}:1: expected 'y' column after {}", source, has_group ? "group" : "id"));
  }
  const std::size_t d = header.size() - y_col - 1;
  if (d < 1) throw Error(Errc::Parse, fmt::format("{}:1: no feature columns", source));
  for (std::size_t j = 0; j < d; ++j) {
    if (header[y_col + 1 + j] != fmt::format("x{}", j + 1)) {
      throw Error(Errc::Parse, fmt::format("{}:1: expected column 'x{}', found '{}'", source, j + 1, header[y_col + 1 + j]));
    }
  }

  std::vector<std::int64_t> ids;
  std::vector<int> groups;
  std::vector<double> ys;
  std::vector<double> xs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto where = fmt::format("{}:{}", source, line_no);
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::Parse, fmt::format("{}: expected {} cells, found {}", where, header.size(), cells.size()));
    }
    ids.push_back(parse_int_cell(cells[0], where));
    if (has_group) groups.push_back(static_cast<int>(parse_int_cell(cells[1], where)));
    ys.push_back(parse_double(cells[y_col], where));
    for (std::size_t j = 0; j < d; ++j) xs.push_back(parse_double(cells[y_col + 1 + j], where));
  }
  if (ids.empty()) throw Error(Errc::Parse, fmt::format("{}: no data rows", source));

  Dataset data;
  const auto n = static_cast<Eigen::Index>(ids.size());
  data.ids = std::move(ids);
  data.labels = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  data.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), n, static_cast<Eigen::Index>(d));
  if (has_group) data.group = std::move(groups);
  std::vector<std::int64_t> sorted = data.ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(Errc::DuplicateId, fmt::format("{}: duplicate sample id", source));
  }
  return data;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, fmt::format("cannot open dataset '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_csv(buffer.str(), path);
}

std::string render_dataset_csv(const Dataset& data) {
  data.validate();
  std::string out = data.group ? "id,group,y" : "id,y";
  for (Eigen::Index j = 0; j < data.dim(); ++j) out += fmt::format(",x{}", j + 1);
  out += '\n';
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out += std::to_string(data.ids[static_cast<std::size_t>(i)]);
    if (data.group) out += fmt::format(",{}", (*data.group)[static_cast<std::size_t>(i)]);
    out += ',';
    out += format_double(data.labels[i]);
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      out += ',';
      out += format_double(data.features(i, j));
    }
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, fmt::format("cannot write dataset '{}'", path));
  out << render_dataset_csv(data);
}

KvDocument MetricsReport::to_kv() const {
  KvDocument doc;
  for (const auto& [k, p] : p_at_k) doc.set(fmt::format("p_at_{}", k), p);
  if (ranked) doc.set("average_precision", average_precision);
  if (param_error) doc.set("param_error", *param_error);
  return doc;
}

MetricsReport evaluate(std::span<const double> scores, std::span<const double> clean_labels,
                       std::span<const int> k_list) {
  if (scores.size() != clean_labels.size()) {
    throw Error(Errc::DimensionMismatch, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  for (int k : k_list) {
    if (k < 1 || static_cast<std::size_t>(k) > n) {
      throw Error(Errc::InvalidParameter, fmt::format("P@{} undefined for {} samples", k, n));
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  MetricsReport report;
  report.ranked = true;
  std::vector<std::size_t> hits_at(n + 1, 0);
  std::size_t hits = 0;
  double precision_sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (clean_labels[order[r]] > 0) {
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    hits_at[r + 1] = hits;
  }
  for (int k : k_list) report.p_at_k[k] = static_cast<double>(hits_at[static_cast<std::size_t>(k)]) / k;
  report.average_precision = hits == 0 ? 0.0 : precision_sum / static_cast<double>(hits);
  return report;
}

double relative_param_error(const Eigen::VectorXd& w, const Eigen::VectorXd& w_true) {
  if (w.size() != w_true.size()) throw Error(Errc::DimensionMismatch, "parameter vectors differ in length");
  const double denom = w_true.norm();
  const double err = (w - w_true).norm();
  return denom > 0.0 ? err / denom : err;
}

}  // namespace spl
