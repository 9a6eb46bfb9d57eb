#include "helpers.hpp"
#include "spl/latent.hpp"
#include "spl/verify.hpp"

using namespace spl;

TEST_SUITE("verify") {

TEST_CASE("quick run passes every suite") {
  VerifyOptions options;
  options.quick = true;
  const auto results = run_verify(options);
  CHECK(results.size() == suite_names().size());
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
    CHECK(r.checks > 0);
  }
}

TEST_CASE("suite filter") {
  VerifyOptions options;
  options.quick = true;
  const auto results = run_verify(options, std::string("majorization"));
  REQUIRE(results.size() == 1);
  CHECK(results[0].name == "majorization");
  CHECK_THROWS_CODE(run_verify(options, std::string("nope")), Errc::InvalidParameter);
}

TEST_CASE("injected sign error fails the ncrp suite") {
  VerifyOptions options;
  options.quick = true;
  options.latent = [](const RegularizerSpec& reg, double loss, double lambda) {
    if (reg.kind == RegularizerKind::Linear && loss < lambda) return loss + loss * loss / (2 * lambda);
    return latent_loss(reg, loss, lambda);
  };
  const auto results = run_verify(options, std::string("ncrp"));
  REQUIRE(results.size() == 1);
  CHECK_FALSE(results[0].pass);
  CHECK(results[0].failures > 0);
}

TEST_CASE("table rendering") {
  SuiteResult ok{"axioms", true, 3, 0, "fine", 0.1};
  SuiteResult bad{"latent", false, 3, 1, "broken", 0.2};
  const auto table = render_verify_table({ok, bad});
  CHECK(table.find("PASS") != std::string::npos);
  CHECK(table.find("FAIL") != std::string::npos);
  CHECK(table.find("broken") != std::string::npos);
}

}  // TEST_SUITE
