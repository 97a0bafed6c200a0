#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "percdet/perclab.hpp"

using namespace percdet;

TEST_CASE("sample_configuration marginals and determinism") {
  CHECK(sample_configuration(16, 0.0, 3).mask.count() == 0);
  CHECK(sample_configuration(16, 1.0, 3).mask.count() == 256);
  CHECK_THROWS_AS(sample_configuration(16, -0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(sample_configuration(16, 1.1, 3), std::invalid_argument);

  const auto a = sample_configuration(128, 0.3, 99);
  const auto b = sample_configuration(128, 0.3, 99);
  CHECK(a.mask.count() == b.mask.count());
  for (int32_t i = 0; i < 128 * 128; ++i) CHECK(a.mask.test(i) == b.mask.test(i));

  // One sample: marked fraction within 3 binomial standard errors of p.
  const double fraction = static_cast<double>(a.mask.count()) / (128.0 * 128.0);
  const double se = std::sqrt(0.3 * 0.7 / (128.0 * 128.0));
  CHECK(std::fabs(fraction - 0.3) < 3.0 * se);
}

TEST_CASE("cluster stats identities") {
  // p = 0: degenerate, chi = 0, empty tail.
  const auto empty = estimate_cluster_stats(32, 0.0, 200, 7);
  CHECK(empty.degenerate);
  CHECK(empty.chi_hat == 0.0);
  CHECK(empty.tail.empty());

  const auto stats = estimate_cluster_stats(64, 0.3, 500, 7);
  CHECK(!stats.degenerate);
  // chi_hat equals the sum of the tail exactly, by construction.
  double sum = 0.0;
  for (double t : stats.tail) sum += t;
  CHECK(stats.chi_hat == sum);
  // Tail is nonincreasing, starts at the occupied-center frequency.
  for (size_t i = 1; i < stats.tail.size(); ++i) CHECK(stats.tail[i] <= stats.tail[i - 1]);
  CHECK(stats.tail[0] == doctest::Approx(0.3).epsilon(0.25));
  CHECK(stats.chi_se > 0.0);
  CHECK(stats.lambda_se >= 0.0);

  // Deterministic regardless of worker count.
  const auto again = estimate_cluster_stats(64, 0.3, 500, 7, false, 3);
  CHECK(again.chi_hat == stats.chi_hat);
  CHECK(again.lambda_hat == stats.lambda_hat);
  CHECK(again.tail == stats.tail);

  // chi_hat comfortably exceeds the 1/(18 delta) lower bound at p = 0.3.
  CHECK(stats.chi_hat > 1.0 / (18.0 * 0.2));

  CHECK_THROWS_AS(estimate_cluster_stats(64, 0.6, 200, 7), std::invalid_argument);
  const auto super = estimate_cluster_stats(32, 0.6, 100, 7, true);
  CHECK(super.supercritical);
  CHECK(super.lambda_hat == 0.0);
}

TEST_CASE("lambda bound report") {
  const auto stats = estimate_cluster_stats(64, 0.25, 800, 11);
  const auto report = verify_lambda_bound(stats);
  // The definitional inequality is forced by the min construction.
  CHECK(report.definitional_ok);
  CHECK(report.chi_hat <= report.geometric_sum_bound);
  CHECK(report.log_bound == doctest::Approx(std::log1p(18.0 * 0.25)).epsilon(1e-12));
  CHECK(report.chi_bound == doctest::Approx(1.0 / (18.0 * 0.25)).epsilon(1e-12));
  // Exactly one chi comparison can hold strictly; both flags are reported.
  CHECK((report.chi_above_lower_bound || report.chi_below_upper_bound));

  const auto super = estimate_cluster_stats(32, 0.7, 100, 7, true);
  CHECK_THROWS_AS(verify_lambda_bound(super), std::invalid_argument);
}

TEST_CASE("deep subcritical lambda is large and within wide margins") {
  const auto stats = estimate_cluster_stats(64, 0.1, 800, 13);
  CHECK(stats.lambda_hat > 0.5);
  const auto report = verify_lambda_bound(stats);
  CHECK(report.definitional_ok);
}

TEST_CASE("error rates: misconfiguration guard and structure") {
  const auto model = NoiseModel::gaussian();
  PhiSpec calibrated;
  calibrated.mode = PhiMode::calibrated;
  calibrated.alpha_target = 0.2;
  calibrated.calibration_replicates = 100;

  // Zero intensity flags the beta estimate as meaningless.
  const auto flagged = estimate_error_rates({8, 16}, SignalSpec{4, 0.0}, model, 1.0, 0.5,
                                            calibrated, 50, 5);
  CHECK(flagged.beta_flagged);
  for (const auto& pt : flagged.points) {
    CHECK(pt.beta_censored);
    CHECK(pt.alpha_hat >= 0.0);
    CHECK(pt.alpha_hat <= 1.0);
  }

  const auto fit = estimate_error_rates({8, 16}, SignalSpec{4, 1.0}, model, 1.0, 0.5,
                                        calibrated, 50, 5);
  CHECK(!fit.beta_flagged);
  CHECK(fit.points.size() == 2);
  for (const auto& pt : fit.points) {
    CHECK(pt.phi > 0.0);
    CHECK(pt.square_side == pt.side_length / 4);
    CHECK(pt.beta_hat >= 0.0);
    CHECK(pt.beta_hat <= 1.0);
  }

  // Theory mode enforces the bulk condition side >= K0 log N.
  PhiSpec theory;
  theory.mode = PhiMode::theory;
  theory.K0 = 50.0;  // absurdly large: side 2 < 50 log 8
  CHECK_THROWS_AS(
      estimate_error_rates({8}, SignalSpec{4, 1.0}, model, 1.0, 0.5, theory, 20, 5),
      std::invalid_argument);

  CHECK_THROWS_AS(
      estimate_error_rates({4}, SignalSpec{4, 1.0}, model, 1.0, 0.5, calibrated, 20, 5),
      std::invalid_argument);  // N < 8
}

TEST_CASE("complexity probe shapes") {
  const auto single = complexity_probe({16, 32}, ProbeMode::single, 31);
  CHECK(single.rows.size() == 2);
  CHECK(single.slope_defined);
  for (const auto& row : single.rows) {
    CHECK(row.seconds > 0.0);
    CHECK(row.op_count > 0);
  }

  const auto lone = complexity_probe({16}, ProbeMode::single, 31);
  CHECK(!lone.slope_defined);

  const auto multi = complexity_probe({8, 16}, ProbeMode::multi, 31);
  CHECK(multi.rows.size() == 2);
  CHECK(multi.rows[1].op_count > multi.rows[0].op_count);

  CHECK_THROWS_AS(complexity_probe({16, 16}, ProbeMode::single, 1), std::invalid_argument);
  CHECK_THROWS_AS(complexity_probe({}, ProbeMode::single, 1), std::invalid_argument);
}
