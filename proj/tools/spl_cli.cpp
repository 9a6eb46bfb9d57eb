// spl: verify, train, curves and bench subcommands.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spl/bench.hpp"
#include "spl/config.hpp"
#include "spl/curves.hpp"
#include "spl/error.hpp"
#include "spl/verify.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw spl::Error(spl::Errc::Io, fmt::format("cannot write '{}'", path.string()));
  out << text;
}

int cmd_verify(const std::optional<std::string>& suite, bool quick, std::optional<std::uint64_t> seed) {
  spl::VerifyOptions options;
  options.quick = quick;
  if (seed) options.seed = *seed;
  const auto results = spl::run_verify(options, suite);
  std::cout << spl::render_verify_table(results);
  const bool pass = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  return pass ? 0 : 1;
}

int cmd_train(const std::string& config_path, const std::optional<std::string>& out,
              std::optional<std::uint64_t> seed, bool timestamp) {
  auto config = spl::RunConfig::load(config_path);
  if (out) config.out_dir = *out;
  if (seed) config.seed = *seed;
  const auto outcome = spl::train_to_directory(config, timestamp);
  std::cout << outcome.metrics_doc.render();
  if (!outcome.record.ok()) {
    std::cerr << fmt::format("error: run stopped at outer {} inner {}: {}\n", outcome.record.error->outer,
                             outcome.record.error->inner, outcome.record.error->message);
    return 1;
  }
  return 0;
}

struct CurvesArgs {
  std::optional<std::string> config;
  std::string regularizer = "hard";
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::string lambdas = "0.5,1,2,inf";
  std::string base = "all";
  std::string margins = "-3:3:0.05";
  std::optional<std::string> out;
};

int cmd_curves(CurvesArgs args) {
  spl::RegularizerSpec reg;
  if (args.config) {
    const auto doc = spl::KvDocument::load(*args.config);
    const auto reg_doc = doc.subtree("regularizer");
    if (!reg_doc.entries().empty()) reg = spl::RegularizerSpec::from_kv(reg_doc);
    args.lambdas = doc.get_string_or("curves.lambdas", args.lambdas);
    args.base = doc.get_string_or("curves.base", args.base);
    args.margins = doc.get_string_or("curves.margins", args.margins);
  }
  if (!args.config || args.gamma || args.alpha) {
    reg.kind = spl::parse_regularizer_kind(args.regularizer);
    reg.gamma = args.gamma;
    reg.alpha = args.alpha;
    if (reg.kind == spl::RegularizerKind::Mixture && !reg.gamma) reg.gamma = 1.0;
    if ((reg.kind == spl::RegularizerKind::Log || reg.kind == spl::RegularizerKind::Exp) && !reg.alpha) reg.alpha = 1.0;
  }
  const auto lambdas = spl::parse_grid(args.lambdas);
  const auto margins = spl::parse_grid(args.margins);
  std::vector<spl::BaseLoss> bases;
  if (args.base == "all") {
    bases = spl::all_base_losses();
  } else {
    std::size_t pos = 0;
    while (true) {
      const auto comma = args.base.find(',', pos);
      bases.push_back(spl::parse_base_loss(args.base.substr(pos, comma == std::string::npos ? comma : comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  const auto rows = spl::latent_curves(reg, lambdas, bases, margins);
  const auto csv = spl::render_curves_csv(rows);
  if (args.out) {
    write_file(*args.out, csv);
  } else {
    std::cout << csv;
  }
  return 0;
}

int cmd_bench(const std::optional<std::string>& config_path, const std::string& kind,
              const std::optional<std::string>& out, std::optional<std::uint64_t> seed, bool timestamp) {
  spl::KvDocument doc;
  if (config_path) {
    doc = spl::KvDocument::load(*config_path);
  } else {
    doc.set("bench.kind", kind);
  }
  auto config = spl::BenchConfig::from_kv(doc);
  if (seed) std::iota(config.seeds.begin(), config.seeds.end(), *seed);
  const auto result = spl::run_bench(config);
  const auto table = spl::render_bench_table(result);
  std::cout << table;
  if (out) {
    std::filesystem::create_directories(*out);
    const std::filesystem::path dir(*out);
    const std::string header = timestamp ? spl::timestamp_line() : "";
    write_file(dir / "bench.csv", spl::render_bench_csv(result));
    write_file(dir / "bench_table.txt", table);
    write_file(dir / "config.kv", header + config.to_kv().render());
  }
  for (const auto& r : result.rows) {
    if (r.error) std::cerr << fmt::format("error: seed {} {}: {}\n", r.seed, spl::to_string(r.method), *r.error);
  }
  return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-paced learning as majorization-minimization"};
  app.require_subcommand(1);

  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> suite;
  bool no_timestamp = false;
  bool quick = false;

  auto* verify = app.add_subcommand("verify", "Run the property suites and print a pass/fail table");
  verify->add_option("--suite", suite, "Run a single suite")->check(CLI::IsMember(spl::suite_names()));
  verify->add_flag("--quick", quick, "Smaller sample counts");
  verify->add_option("--seed", seed, "Random seed for sampled checks");

  auto* train = app.add_subcommand("train", "Run self-paced training from a config file");
  train->add_option("--config", config, "Config file (key = value)")->required();
  train->add_option("--out", out, "Output directory (overrides `out`)");
  train->add_option("--seed", seed, "Seed (overrides `seed`)");
  train->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp header line");

  CurvesArgs curves_args;
  auto* curves = app.add_subcommand("curves", "Export latent-loss curves as CSV");
  curves->add_option("--config", curves_args.config, "Config with regularizer.* and curves.* keys");
  curves->add_option("--regularizer", curves_args.regularizer, "hard, linear, mixture, log or exp");
  curves->add_option("--gamma", curves_args.gamma, "Mixture parameter");
  curves->add_option("--alpha", curves_args.alpha, "Log / exp parameter");
  curves->add_option("--lambdas", curves_args.lambdas, "Comma list; `inf` gives the base loss");
  curves->add_option("--base", curves_args.base, "logistic, hinge, absolute, least_square, a comma list or all");
  curves->add_option("--margins", curves_args.margins, "start:stop:step or a comma list");
  curves->add_option("--out", curves_args.out, "Output CSV (stdout if omitted)");

  std::string bench_kind = "regression";
  auto* bench = app.add_subcommand("bench", "Compare batch training, SPL and SPL with the group prior");
  bench->add_option("--config", config, "Bench config (bench.* keys)");
  bench->add_option("--kind", bench_kind, "regression or weak_label (without --config)")
      ->check(CLI::IsMember({"regression", "weak_label"}));
  bench->add_option("--out", out, "Directory for bench.csv, bench_table.txt and config.kv");
  bench->add_option("--seed", seed, "First seed; seeds run consecutively from here");
  bench->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp header line");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) return cmd_verify(suite, quick, seed);
    if (*train) return cmd_train(*config, out, seed, !no_timestamp);
    if (*curves) return cmd_curves(curves_args);
    if (*bench) return cmd_bench(config, bench_kind, out, seed, !no_timestamp);
  } catch (const spl::Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", spl::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
