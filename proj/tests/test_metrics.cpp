#include <cmath>
#include <limits>

#include "ascsense/metrics.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ascsense;

TEST_CASE("type-7 quantiles") {
  CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({3, 1, 4, 1, 5, 9, 2, 6}, 0.5) == doctest::Approx(3.5));
  CHECK(quantile({3, 1, 4, 1, 5, 9, 2, 6}, 0.9) == doctest::Approx(6.9));
  CHECK(median({5.0, std::numeric_limits<double>::quiet_NaN(), 1.0, 3.0}) == doctest::Approx(3.0));
  CHECK(quantile({7.0}, 0.3) == doctest::Approx(7.0));
}

TEST_CASE("gamma metrics") {
  CVec truth(4);
  truth << 1, -1, cd(0, 1), cd(0, -1);
  CVec est = truth;
  est(0) += 0.1;
  // fit is exact up to the single perturbed sample; compare with the closed form
  const auto fit_err = [&] {
    const CVec tc = truth.array() - truth.mean();
    const CVec ec = est.array() - est.mean();
    const cd inner = ec.dot(tc);
    const cd rot = inner / std::abs(inner);  // phase-only rotation
    const CVec aligned = (rot * ec).array() + truth.mean();
    return (aligned - truth).squaredNorm();
  }();
  CHECK(gamma_beta(est, truth) == doctest::Approx(10 * std::log10(truth.squaredNorm() / fit_err)));
  CVec moved = std::polar(1.0, kPi / 3) * (truth.array() + cd(1, 2)).matrix();
  CHECK(gamma_beta(moved, truth) == doctest::Approx(kGammaCapDb));
  CHECK(gamma_ideal(truth, 32, 0.01) == doctest::Approx(10 * std::log10(32 * 1.0 / 0.01)));
}

TEST_CASE("gamma of truth plus noise 10 dB down") {
  double sum = 0.0;
  const int draws = 100;
  for (int i = 0; i < draws; ++i) {
    const CVec truth = testutil::random_vector(1000 + i, 400);
    const CVec noise = std::sqrt(0.1) * testutil::random_vector(5000 + i, 400);
    sum += gamma_beta(truth + noise, truth);
  }
  CHECK(std::abs(sum / draws - 10.0) < 0.5);
}

TEST_CASE("TO error decomposition") {
  const double P = 1.0;
  RVec truth(3), est(3);
  truth << 0.30, 0.50, 0.95;
  est << 0.00, 0.21, 0.64;  // e = 0.30, 0.29, 0.31
  const auto e = to_errors(truth, est, 0.25, P);
  CHECK(e.common == doctest::Approx(0.30));
  CHECK(e.relative(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(e.relative(1) == doctest::Approx(0.01));
  CHECK(e.absolute(0) == doctest::Approx(0.05));
  CHECK(e.absolute(2) == doctest::Approx(0.06));
}

TEST_CASE("target matching minimizes the total cost") {
  RMat c(3, 3);
  c << 4, 1, 3,
       2, 0, 5,
       3, 2, 2;
  // exhaustive optimum: 0->1 (1), 1->0 (2), 2->2 (2) = 5
  const auto m = match_targets(c);
  CHECK(m == std::vector<int>{1, 0, 2});
  RMat d(2, 1);
  d << 1, 0.5;
  const auto short_m = match_targets(d);
  CHECK(short_m == std::vector<int>{-1, 0});
}

TEST_CASE("resolution probability") {
  CHECK(resolution_probability({true, false, true, true}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(resolution_probability({}), Error);
}
