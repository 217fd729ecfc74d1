#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ctxpoe/numeric.hpp"
#include "ctxpoe/rng.hpp"

using namespace ctxpoe;

TEST_CASE("log_sum_exp basics") {
  const std::vector<double> v{std::log(0.25), std::log(0.25), std::log(0.5)};
  CHECK(log_sum_exp(v) == Catch::Approx(0.0).margin(1e-14));

  const std::vector<double> one{2.5};
  CHECK(log_sum_exp(one) == Catch::Approx(2.5));

  const std::vector<double> with_inf{kNegInf, 0.0};
  CHECK(log_sum_exp(with_inf) == Catch::Approx(0.0));

  const std::vector<double> all_inf{kNegInf, kNegInf};
  CHECK(log_sum_exp(all_inf) == kNegInf);
}

TEST_CASE("log_sum_exp does not overflow on huge logits") {
  const std::vector<double> v{1000.0, 0.0, -1000.0};
  const double lse = log_sum_exp(v);
  CHECK(std::isfinite(lse));
  CHECK(lse == Catch::Approx(1000.0).margin(1e-9));
}

TEST_CASE("softmax is stable and normalized") {
  const auto p = softmax(std::array<double, 3>{1000.0, 0.0, 0.0});
  CHECK(std::isfinite(p[0]));
  CHECK(p[0] == Catch::Approx(1.0));
  CHECK(p[1] == Catch::Approx(0.0).margin(1e-300));
  const auto u = softmax(std::array<double, 3>{0.0, 0.0, 0.0});
  for (double x : u) CHECK(x == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("mean and population std") {
  const std::vector<double> v{0.0, 2.0};
  CHECK(mean_of(v) == Catch::Approx(1.0));
  CHECK(population_std(v) == Catch::Approx(1.0));
  const std::vector<double> c{3.0, 3.0, 3.0};
  CHECK(population_std(c) == Catch::Approx(0.0));
}

TEST_CASE("FeatureMatrix row access") {
  FeatureMatrix m = FeatureMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  CHECK(m.rows == 2);
  CHECK(m.cols == 2);
  CHECK(m.at(1, 0) == 3.0);
  CHECK(m.row(0)[1] == 2.0);
  CHECK_THROWS_AS(FeatureMatrix::from_rows({{1.0}, {1.0, 2.0}}), InternalError);
}

TEST_CASE("rng stream is deterministic and seed-sensitive") {
  RngStream a(7), b(7), c(8);
  for (int i = 0; i < 16; ++i) {
    const double x = a.uniform01();
    CHECK(x == b.uniform01());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  bool differs = false;
  RngStream a2(7);
  for (int i = 0; i < 16; ++i) differs |= a2.uniform01() != c.uniform01();
  CHECK(differs);
}

TEST_CASE("rng normal moments are sane") {
  RngStream rng(11);
  const int n = 20000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(sum / n == Catch::Approx(0.0).margin(0.03));
  CHECK(sum_sq / n == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("categorical respects cumulative boundaries") {
  RngStream rng(3);
  const std::array<double, 3> probs{0.5, 0.25, 0.25};
  std::array<int, 3> counts{};
  for (int i = 0; i < 40000; ++i) counts[rng.categorical(probs)] += 1;
  CHECK(counts[0] / 40000.0 == Catch::Approx(0.5).margin(0.02));
  CHECK(counts[1] / 40000.0 == Catch::Approx(0.25).margin(0.02));
}
