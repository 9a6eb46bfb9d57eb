#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "spl/data.hpp"
#include "spl/latent.hpp"
#include "spl/solver.hpp"
#include "spl/verify.hpp"

using namespace spl;

namespace {

Dataset tiny(std::initializer_list<double> ys, int d = 1) {
  Dataset data;
  const auto n = static_cast<Eigen::Index>(ys.size());
  data.features = Eigen::MatrixXd::Ones(n, d);
  data.labels = Eigen::VectorXd(n);
  Eigen::Index i = 0;
  for (double y : ys) data.labels[i++] = y;
  for (Eigen::Index k = 0; k < n; ++k) data.ids.push_back(k);
  return data;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("losses at zero parameters") {
  const auto data = tiny({2.0});
  const auto p = ModelParams::zeros(1);
  CHECK(compute_losses(p, data.training_view(), {LossKind::SquaredError, 0})[0] == 4.0);
  CHECK(compute_losses(p, data.training_view(), {LossKind::Absolute, 0})[0] == 2.0);
  const auto cls = tiny({1.0, -1.0});
  CHECK(compute_losses(p, cls.training_view(), {LossKind::Hinge, 0})[0] == 1.0);
  for (double l : compute_losses(p, cls.training_view(), {LossKind::Logistic, 0})) {
    CHECK(l == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  CHECK_THROWS_CODE(compute_losses(p, data.training_view(), {LossKind::Hinge, 0}), Errc::InvalidLabel);
  CHECK_THROWS_CODE(compute_losses(ModelParams::zeros(3), data.training_view(), {LossKind::SquaredError, 0}),
                    Errc::DimensionMismatch);
}

TEST_CASE("logistic loss is stable for large margins") {
  auto data = tiny({1.0, -1.0});
  ModelParams p{Eigen::VectorXd::Constant(1, 800.0), 0.0};
  const auto l = compute_losses(p, data.training_view(), {LossKind::Logistic, 0});
  CHECK(l[0] == 0.0);
  CHECK(l[1] == doctest::Approx(800.0));
}

TEST_CASE("majorization examples") {
  const std::vector<double> two{0.5, 2.0};
  CHECK(majorization_step(RegularizerSpec::hard(), two, 1.0) == std::vector<double>{1, 0});
  const std::vector<double> four{0.0, 0.5, 1.0, 2.0};
  CHECK(majorization_step(RegularizerSpec::linear(), four, 1.0) == std::vector<double>{1, 0.5, 0, 0});
  const std::vector<double> zeros(5, 0.0);
  for (const auto& reg : regularizer_catalog()) {
    for (double v : majorization_step(reg, zeros, 0.7)) CHECK(v == 1.0);
  }
  const std::vector<double> negative{-1.0};
  CHECK_THROWS_CODE(majorization_step(RegularizerSpec::hard(), negative, 1.0), Errc::NegativeLoss);
}

TEST_CASE("latent objective examples") {
  const std::vector<double> losses{0.5, 2.0, 3.0};
  CHECK(latent_objective(RegularizerSpec::hard(), losses, 1.0) == 2.5);
  CHECK(latent_objective(RegularizerSpec::linear(), {}, 1.0) == 0.0);
  const std::vector<double> at_lambda{2.0, 2.0};
  CHECK(latent_objective(RegularizerSpec::linear(), at_lambda, 2.0) == 2.0);
}

TEST_CASE("weighted least squares recovers the truth") {
  const auto p = generate_regression(60, 4, 0.0, 0.0, 0.0, 3);
  const std::vector<double> ones(60, 1.0);
  const auto r = minimization_step(ModelParams::zeros(4), p.data.training_view(), ones, {LossKind::SquaredError, 1e-8});
  CHECK((r.params.w - p.true_w).norm() <= 1e-4);
  CHECK(std::abs(r.params.b) <= 1e-4);

  // Zero weights on outlier rows remove them from the fit.
  const auto q = generate_regression(80, 4, 0.3, 0.0, 25.0, 4);
  std::vector<double> clean(80);
  for (std::size_t i = 0; i < 80; ++i) clean[i] = (*q.data.truth_flag)[i] ? 0.0 : 1.0;
  const auto s = minimization_step(ModelParams::zeros(4), q.data.training_view(), clean, {LossKind::SquaredError, 0.0});
  CHECK((s.params.w - q.true_w).norm() <= 1e-4);
}

TEST_CASE("weighted ridge solution has zero gradient") {
  const auto p = generate_regression(100, 5, 0.2, 0.5, 10.0, 5);
  Rng rng(5);
  std::vector<double> v(100);
  for (auto& x : v) x = rng.uniform();
  for (double ridge : {0.0, 0.1, 10.0}) {
    const auto r = minimization_step(ModelParams::zeros(5), p.data.training_view(), v, {LossKind::SquaredError, ridge});
    const auto g = weighted_ridge_gradient(r.params, p.data.training_view(), v, ridge);
    CHECK(g.norm() <= 1e-8 * (1.0 + r.params.norm()));
  }
}

TEST_CASE("all-zero weights leave only the ridge term") {
  const auto p = generate_regression(30, 3, 0.0, 0.1, 0.0, 6);
  const std::vector<double> zeros(30, 0.0);
  const ModelParams start{Eigen::VectorXd::Constant(3, 2.0), 1.0};
  for (LossKind kind : {LossKind::SquaredError, LossKind::Absolute}) {
    const auto r = minimization_step(start, p.data.training_view(), zeros, {kind, 0.5});
    CHECK(r.params.w.norm() == 0.0);
  }
  const std::vector<int> sizes{20};
  const std::vector<double> rates{0.1};
  const auto c = generate_weak_labels(sizes, 3, rates, 2.0, 6);
  const std::vector<double> czeros(20, 0.0);
  for (LossKind kind : {LossKind::Logistic, LossKind::Hinge}) {
    const auto r = minimization_step(start, c.data.training_view(), czeros, {kind, 0.5});
    CHECK(r.params.w.norm() == 0.0);
  }
  CHECK_THROWS_CODE(minimization_step(start, p.data.training_view(), zeros, {LossKind::SquaredError, 0.0}),
                    Errc::SingularSystem);
}

TEST_CASE("rank-deficient design without ridge is an error") {
  Dataset data = tiny({1.0, 2.0, 3.0}, 2);  // two identical all-ones columns plus the intercept
  const std::vector<double> ones(3, 1.0);
  CHECK_THROWS_CODE(minimization_step(ModelParams::zeros(2), data.training_view(), ones, {LossKind::SquaredError, 0.0}),
                    Errc::SingularSystem);
  CHECK_NOTHROW(minimization_step(ModelParams::zeros(2), data.training_view(), ones, {LossKind::SquaredError, 1e-3}));
}

TEST_CASE("gradient losses never increase the objective") {
  const std::vector<int> sizes{40, 40};
  const std::vector<double> rates{0.1, 0.3};
  const auto c = generate_weak_labels(sizes, 3, rates, 2.0, 7);
  const auto r = generate_regression(80, 3, 0.2, 0.1, 10.0, 7);
  Rng rng(7);
  std::vector<double> v(80);
  for (auto& x : v) x = rng.uniform();
  for (LossKind kind : {LossKind::Absolute, LossKind::Logistic, LossKind::Hinge}) {
    const LossModel model{kind, 0.05};
    const auto& data = model.is_classification() ? c.data : r.data;
    const ModelParams start = ModelParams::zeros(3);
    const double before = weighted_objective(start, data.training_view(), v, model);
    const auto out = minimization_step(start, data.training_view(), v, model);
    CHECK(out.objective <= before);
    CHECK(out.objective == doctest::Approx(weighted_objective(out.params, data.training_view(), v, model)));
    CHECK(out.steps > 0);
  }
}

TEST_CASE("schedule validation and round trip") {
  AgeSchedule s;
  CHECK_NOTHROW(s.validate());
  s.lambda0 = 1.0;
  CHECK_THROWS_CODE(s.validate(), Errc::InvalidParameter);
  CHECK_THROWS_CODE(AgeSchedule::quantile(0.0).validate(), Errc::InvalidParameter);
  auto f = AgeSchedule::fixed(2.0, 7);
  f.lambda_max = 9.0;
  const auto back = AgeSchedule::from_kv(f.to_kv());
  CHECK(back.lambda0 == f.lambda0);
  CHECK_FALSE(back.quantile0.has_value());
  CHECK(back.max_outer == 7);
  CHECK(back.lambda_max == 9.0);
  CHECK(std::isinf(AgeSchedule::from_kv(AgeSchedule{}.to_kv()).lambda_max));
}

TEST_CASE("hard seeding includes exactly ceil(q n) samples") {
  const auto p = generate_regression(97, 3, 0.2, 0.1, 20.0, 8);
  const auto rec = run_spl(RegularizerSpec::hard(), p.data.training_view(), {LossKind::SquaredError, 1e-6},
                           AgeSchedule::quantile(0.1, 2), {}, 1, 8);
  REQUIRE(rec.ok());
  std::size_t ones = 0;
  for (double v : rec.iterations[0].weights) ones += v == 1.0;
  CHECK(ones == 10);
}

TEST_CASE("hard seeding breaks loss ties by index") {
  // Logistic losses at w = 0 are all log 2.
  const std::vector<int> sizes{25};
  const std::vector<double> rates{0.0};
  const auto c = generate_weak_labels(sizes, 2, rates, 2.0, 9);
  const auto rec = run_spl(RegularizerSpec::hard(), c.data.training_view(), {LossKind::Logistic, 0.1},
                           AgeSchedule::quantile(0.2, 1), {}, 1, 9);
  REQUIRE(rec.ok());
  const auto& w = rec.iterations[0].weights;
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == (i < 5 ? 1.0 : 0.0));
}

TEST_CASE("single outer iteration descends") {
  const auto p = generate_regression(120, 4, 0.25, 0.2, 15.0, 10);
  for (const auto& reg : regularizer_catalog()) {
    const auto rec = run_spl(reg, p.data.training_view(), {LossKind::SquaredError, 1e-3}, AgeSchedule::quantile(0.3, 1),
                             {}, 5, 10);
    REQUIRE(rec.ok());
    REQUIRE(rec.iterations.size() == 5);
    for (std::size_t k = 1; k < 5; ++k) {
      CHECK(rec.iterations[k].latent_objective <= rec.iterations[k - 1].latent_objective + 1e-9);
    }
  }
}

TEST_CASE("surrogate is tight at each iterate") {
  const auto p = generate_regression(80, 3, 0.2, 0.1, 10.0, 11);
  const auto reg = RegularizerSpec::linear();
  const LossModel model{LossKind::SquaredError, 0.0};
  const auto rec = run_spl(reg, p.data.training_view(), model, AgeSchedule::quantile(0.5, 3), {}, 2, 11);
  REQUIRE(rec.ok());
  for (const auto& it : rec.iterations) {
    double q = 0.0;
    for (double l : it.losses) q += surrogate(reg, l, l, it.lambda).q;
    CHECK(std::abs(q - it.latent_objective) <= 1e-9 * std::max(1.0, std::abs(q)));
  }
}

TEST_CASE("huge initial age equals batch training") {
  const auto p = generate_regression(60, 3, 0.2, 0.1, 10.0, 12);
  const LossModel model{LossKind::SquaredError, 1e-6};
  const auto rec = run_spl(RegularizerSpec::hard(), p.data.training_view(), model, AgeSchedule::fixed(1e12, 2), {}, 1, 12);
  REQUIRE(rec.ok());
  for (double v : rec.iterations[0].weights) CHECK(v == 1.0);
  const auto batch = batch_train(p.data.training_view(), model);
  CHECK((rec.final_params.w - batch.w).norm() <= 1e-10);
}

TEST_CASE("quantile one includes every sample") {
  const auto p = generate_regression(60, 3, 0.2, 0.1, 10.0, 13);
  const LossModel model{LossKind::SquaredError, 1e-6};
  const auto rec = run_spl(RegularizerSpec::hard(), p.data.training_view(), model, AgeSchedule::quantile(1.0, 3), {}, 2, 13);
  REQUIRE(rec.ok());
  for (double v : rec.iterations[0].weights) CHECK(v == 1.0);
  CHECK((rec.final_params.w - batch_train(p.data.training_view(), model).w).norm() <= 1e-8);
}

TEST_CASE("included set grows with age for frozen losses") {
  Rng rng(14);
  std::vector<double> losses(200);
  for (auto& l : losses) l = 5 * rng.uniform();
  std::vector<double> prev(200, 0.0);
  for (double lambda = 0.1; lambda < 10; lambda *= 1.3) {
    const auto w = majorization_step(RegularizerSpec::hard(), losses, lambda);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] >= prev[i]);
    prev = w;
  }
}

TEST_CASE("age cap stops growth") {
  const auto p = generate_regression(50, 2, 0.2, 0.1, 10.0, 15);
  AgeSchedule s = AgeSchedule::fixed(1.0, 20);
  s.lambda_max = 3.0;
  const auto rec = run_spl(RegularizerSpec::hard(), p.data.training_view(), {LossKind::SquaredError, 1e-6}, s, {}, 1, 15);
  REQUIRE(rec.ok());
  CHECK(rec.iterations.back().lambda == 3.0);
  CHECK(rec.iterations[1].lambda == 1.3);
}

TEST_CASE("stop when everything is included") {
  const auto p = generate_regression(50, 2, 0.0, 0.1, 0.0, 16);
  AgeSchedule s = AgeSchedule::fixed(1e6, 50);
  s.stop_when_all_included = true;
  const auto rec = run_spl(RegularizerSpec::hard(), p.data.training_view(), {LossKind::SquaredError, 1e-6}, s, {}, 2, 16);
  CHECK(rec.iterations.size() == 2);
}

TEST_CASE("errors are recorded with the iteration index") {
  const auto p = generate_regression(30, 2, 0.0, 0.1, 0.0, 17);
  // Zero ridge and a tiny age: no sample is included, so the solve is singular.
  const auto rec = run_spl(RegularizerSpec::hard(), p.data.training_view(), {LossKind::SquaredError, 0.0},
                           AgeSchedule::fixed(1e-300, 3), {}, 1, 17);
  REQUIRE_FALSE(rec.ok());
  CHECK(rec.error->code == Errc::SingularSystem);
  CHECK(rec.error->outer == 0);
  CHECK(rec.error->inner == 0);
  const auto bad = run_spl(RegularizerSpec::hard(), p.data.training_view(), {LossKind::SquaredError, 0.0},
                           AgeSchedule::fixed(1.0, 3), {}, 0, 17);
  CHECK_FALSE(bad.ok());
}

TEST_CASE("runs are deterministic") {
  const auto p = generate_regression(80, 3, 0.2, 0.1, 10.0, 18);
  const LossModel model{LossKind::Absolute, 0.01};
  const auto a = run_spl(RegularizerSpec::log(1.0), p.data.training_view(), model, AgeSchedule::quantile(0.3, 4), {}, 2, 1);
  const auto b = run_spl(RegularizerSpec::log(1.0), p.data.training_view(), model, AgeSchedule::quantile(0.3, 4), {}, 2, 1);
  CHECK(render_run_log_csv(a) == render_run_log_csv(b));
  CHECK(a.final_params == b.final_params);
}

TEST_CASE("descent holds under priors") {
  const std::vector<int> sizes{30, 30, 30};
  const std::vector<double> rates{0.05, 0.2, 0.4};
  const auto c = generate_weak_labels(sizes, 3, rates, 2.0, 19);
  const LossModel model{LossKind::Logistic, 0.05};
  PriorSet group;
  group.group = group_prior_from_dataset(c.data, 0.7);
  PriorSet chain;
  chain.chain = ChainOrderPrior{{0, 5, 9, 40}};
  chain.outlier = OutlierPrior{{3}};
  PriorSet smooth;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < 90; i += 2) edges.push_back({i, i + 1, 1.0});
  smooth.smoothness = SmoothnessPrior{laplacian_from_edges(90, edges), 0.5};
  for (const PriorSet* prior : {&group, &chain, &smooth}) {
    const auto reg = prior == &group ? RegularizerSpec::hard() : RegularizerSpec::linear();
    const auto rec = run_spl(reg, c.data.training_view(), model, AgeSchedule::quantile(0.4, 6), *prior, 3, 19);
    REQUIRE(rec.ok());
    CHECK(rec.descent_violations(1e-9) == 0);
  }
}

TEST_CASE("run log columns") {
  const auto p = generate_regression(30, 2, 0.0, 0.1, 0.0, 20);
  const auto rec = run_spl(RegularizerSpec::hard(), p.data.training_view(), {LossKind::SquaredError, 1e-6},
                           AgeSchedule::quantile(0.5, 2), {}, 2, 20);
  const auto csv = render_run_log_csv(rec);
  CHECK(csv.rfind("outer_iter,inner_iter,lambda,latent_objective,weighted_objective,n_active_weights,param_norm\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

}  // TEST_SUITE
