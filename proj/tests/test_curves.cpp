#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "spl/curves.hpp"
#include "spl/latent.hpp"

using namespace spl;

TEST_SUITE("curves") {

TEST_CASE("base losses through the margin") {
  CHECK(base_loss(BaseLoss::LeastSquare, 0.0) == 1.0);
  CHECK(base_loss(BaseLoss::LeastSquare, 3.0) == 4.0);
  CHECK(base_loss(BaseLoss::Hinge, 2.0) == 0.0);
  CHECK(base_loss(BaseLoss::Absolute, -1.0) == 2.0);
  CHECK(base_loss(BaseLoss::Logistic, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(base_loss(BaseLoss::Logistic, -1000.0) == doctest::Approx(1000.0));
  CHECK(parse_base_loss("least_square") == BaseLoss::LeastSquare);
  CHECK_THROWS_CODE(parse_base_loss("cubic"), Errc::InvalidSpec);
}

TEST_CASE("four families for hard with the inf sentinel") {
  const std::vector<double> lambdas{0.5, 1.0, 2.0, std::numeric_limits<double>::infinity()};
  const std::vector<BaseLoss> bases{BaseLoss::LeastSquare};
  const auto margins = parse_grid("-3:3:0.25");
  const auto rows = latent_curves(RegularizerSpec::hard(), lambdas, bases, margins);
  CHECK(rows.size() == 4 * margins.size());
  for (const auto& r : rows) {
    if (std::isinf(r.lambda)) {
      CHECK(r.value == base_loss(BaseLoss::LeastSquare, r.loss_input));
    } else {
      CHECK(r.value == std::min(base_loss(BaseLoss::LeastSquare, r.loss_input), r.lambda));
    }
  }
}

TEST_CASE("single margin row") {
  const std::vector<double> one{1.0};
  const std::vector<double> zero{0.0};
  const std::vector<BaseLoss> bases{BaseLoss::Logistic};
  const auto rows = latent_curves(RegularizerSpec::linear(), one, bases, zero);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].value == latent_loss(RegularizerSpec::linear(), base_loss(BaseLoss::Logistic, 0.0), 1.0));
}

TEST_CASE("mixture plateau in the curves") {
  const std::vector<double> one{1.0};
  const std::vector<double> far{-40.0};
  const std::vector<BaseLoss> bases{BaseLoss::LeastSquare};
  const auto rows = latent_curves(RegularizerSpec::mixture(1.0), one, bases, far);
  CHECK(rows[0].value == doctest::Approx(0.5));
}

TEST_CASE("csv layout") {
  const std::vector<double> lambdas{1.0, std::numeric_limits<double>::infinity()};
  const std::vector<BaseLoss> bases{BaseLoss::Hinge};
  const std::vector<double> margins{0.0};
  const auto csv = render_curves_csv(latent_curves(RegularizerSpec::hard(), lambdas, bases, margins));
  CHECK(csv == "loss_input,composed_loss_kind,lambda,latent_loss_value\n0,hinge,1,1\n0,hinge,inf,1\n");
}

TEST_CASE("grid parsing and errors") {
  CHECK(parse_grid("0:1:0.5") == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(parse_grid("1,2.5,inf")[2] == std::numeric_limits<double>::infinity());
  CHECK_THROWS_CODE(parse_grid("0:1:0"), Errc::InvalidParameter);
  CHECK_THROWS_CODE(parse_grid("1:0:0.1"), Errc::InvalidParameter);
  CHECK_THROWS_CODE(parse_grid("0:1"), Errc::Parse);
  CHECK_THROWS_CODE(parse_grid("a,b"), Errc::Parse);
  const std::vector<double> empty;
  const std::vector<double> one{1.0};
  const std::vector<BaseLoss> bases{BaseLoss::Hinge};
  CHECK_THROWS_CODE(latent_curves(RegularizerSpec::hard(), one, bases, empty), Errc::EmptyGrid);
  const std::vector<double> bad_lambda{-1.0};
  CHECK_THROWS_CODE(latent_curves(RegularizerSpec::hard(), bad_lambda, bases, one), Errc::InvalidParameter);
}

}  // TEST_SUITE
