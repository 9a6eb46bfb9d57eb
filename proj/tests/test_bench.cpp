#include <cmath>

#include "helpers.hpp"
#include "spl/bench.hpp"

using namespace spl;

TEST_SUITE("bench") {

TEST_CASE("zero-noise regression: methods tie") {
  auto config = BenchConfig::regression_defaults();
  config.seeds = {1, 2, 3};
  config.regression = {120, 4, 0.0, 0.0, 0.0};
  const auto result = run_bench(config);
  REQUIRE(result.ok());
  const auto batch = result.headline_by_seed(BenchMethod::Batch);
  const auto spl = result.headline_by_seed(BenchMethod::Spl);
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(std::abs(batch[i] - spl[i]) <= 1e-3);
}

TEST_CASE("zero-noise weak labels: methods tie on ranking") {
  auto config = BenchConfig::weak_label_defaults();
  config.seeds = {1, 2};
  config.weak_label.n_per_group = {60, 60, 60};
  config.weak_label.flip_rates = {0.0, 0.0, 0.0};
  config.weak_label.margin = 12.0;
  const auto result = run_bench(config);
  REQUIRE(result.ok());
  const double a = result.summary_of(BenchMethod::Batch).mean;
  CHECK(std::abs(result.summary_of(BenchMethod::Spl).mean - a) <= 1e-3);
  CHECK(std::abs(result.summary_of(BenchMethod::SplGroup).mean - a) <= 1e-3);
}

TEST_CASE("small regression bench favours SPL") {
  auto config = BenchConfig::regression_defaults();
  config.seeds = {1, 2, 3};
  config.regression = {200, 5, 0.3, 0.1, 50.0};
  const auto result = run_bench(config);
  REQUIRE(result.ok());
  CHECK(result.summary_of(BenchMethod::Spl).median < 0.5 * result.summary_of(BenchMethod::Batch).median);
  CHECK(result.total_descent_violations() == 0);
  CHECK_THROWS_CODE(result.summary_of(BenchMethod::SplGroup), Errc::InvalidParameter);
}

TEST_CASE("output formats") {
  auto config = BenchConfig::weak_label_defaults();
  config.seeds = {4};
  config.weak_label.n_per_group = {30, 30, 30};
  const auto result = run_bench(config);
  const auto csv = render_bench_csv(result);
  CHECK(csv.rfind("seed,method,param_error,average_precision,p_at_10,p_at_50", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto table = render_bench_table(result);
  CHECK(table.find("spl_group") != std::string::npos);
  CHECK(table.find("+-") != std::string::npos);
}

TEST_CASE("config round trip and validation") {
  for (const auto& c : {BenchConfig::regression_defaults(), BenchConfig::weak_label_defaults()}) {
    const auto back = BenchConfig::from_kv(c.to_kv());
    CHECK(back.to_kv().render() == c.to_kv().render());
  }
  auto doc = KvDocument::parse("bench.kind = weak_label\nschedule.lambda0 = 2\nbench.n_seeds = 3\n", "b");
  const auto c = BenchConfig::from_kv(doc);
  CHECK(c.seeds.size() == 3);
  CHECK(*c.schedule.lambda0 == 2.0);
  CHECK(c.schedule.lambda_max == 5.0);  // kept from the defaults
  CHECK_THROWS_CODE(BenchConfig::from_kv(KvDocument::parse("bench.kind = other\n", "b")), Errc::InvalidSpec);
  CHECK_THROWS_CODE(BenchConfig::from_kv(KvDocument::parse("bench.kind = regression\nloss.kind = hinge\n", "b")),
                    Errc::InvalidSpec);
  CHECK_THROWS_CODE(BenchConfig::from_kv(KvDocument::parse("bench.group_rho = 2\n", "b")), Errc::InvalidParameter);
}

}  // TEST_SUITE
