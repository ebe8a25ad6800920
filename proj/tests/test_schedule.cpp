#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "genie/schedule.hpp"

using namespace genie;

TEST_CASE("default schedule endpoints") {
  const NoiseSchedule s = build_schedule(1000, 1e-4, 0.02);
  CHECK(s.alpha_bar[1] == Catch::Approx(0.9999).margin(1e-15));
  CHECK(s.alpha_bar[1000] < 5e-5);   // direct product stays tiny
  CHECK(s.alpha_bar[1000] < 1e-4);
  CHECK(s.beta[1] == Catch::Approx(1e-4));
  CHECK(s.beta[1000] == Catch::Approx(0.02));
}

TEST_CASE("T=2 alpha_bar is the two-factor product") {
  const NoiseSchedule s = build_schedule(2, 0.1, 0.3);
  CHECK(s.alpha_bar[2] == Catch::Approx((1.0 - 0.1) * (1.0 - 0.3)).margin(1e-15));
}

TEST_CASE("stored alpha_bar matches a high-precision recomputation") {
  const NoiseSchedule s = build_schedule(1000, 1e-4, 0.02);
  long double prod = 1.0L;
  for (std::size_t t = 1; t <= s.T; ++t) {
    prod *= 1.0L - static_cast<long double>(s.beta[t]);
    const double rel =
        std::abs(static_cast<double>((static_cast<long double>(s.alpha_bar[t]) - prod) / prod));
    REQUIRE(rel < 1e-12);
  }
}

TEST_CASE("beta is non-decreasing and alpha_bar strictly decreasing in (0,1)") {
  const NoiseSchedule s = build_schedule(500, 1e-4, 0.02);
  for (std::size_t t = 2; t <= s.T; ++t) {
    REQUIRE(s.beta[t] >= s.beta[t - 1]);
    REQUIRE(s.alpha_bar[t] < s.alpha_bar[t - 1]);
    REQUIRE(s.alpha_bar[t] > 0.0);
    REQUIRE(s.alpha_bar[t] < 1.0);
  }
}

TEST_CASE("build_schedule rejects invalid bounds") {
  CHECK_THROWS_AS(build_schedule(1, 1e-4, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.0, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.03, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("noising_step_count follows n = floor(r T)") {
  CHECK(noising_step_count(0.8, 1000) == 800);
  CHECK(noising_step_count(0.0, 1000) == 0);
  CHECK(noising_step_count(0.999, 1000) == 999);
  CHECK(noising_step_count(1.0, 1000) == 1000);
  CHECK(noising_step_count(0.5, 3) == 1);
  CHECK_THROWS_AS(noising_step_count(-0.1, 1000), std::invalid_argument);
  CHECK_THROWS_AS(noising_step_count(1.1, 1000), std::invalid_argument);
}
