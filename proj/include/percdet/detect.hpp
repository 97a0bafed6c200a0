#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "percdet/cluster.hpp"
#include "percdet/noise.hpp"

namespace percdet {

enum class PhiMode { theory, calibrated };
enum class TestSide { plus_only, minus_only, both };

struct PhiTheory {
  double K0 = 0.0;
  double phi = 0.0;
};

// phi(N) = K0 log N with K0 = factor / log(1 + 18 (1/2 - p_error)). With the
// default factor 2 this is the smallest constant compatible with the
// lower bound lambda(p)^-1 >= 1/log(1 + 18 |p - p_c|); it is a floor, not a
// guaranteed-consistent constant. Requires N >= 2 and 0 < p_error < 1/2.
PhiTheory phi_theory(int32_t side_length, double p_error, double factor = 2.0);

struct CalibrationEntry {
  int32_t side_length = 0;
  std::string family;
  std::string noise_descriptor;
  double sigma = 1.0;
  double tau = 0.0;
  int replicates = 0;
  uint64_t seed = 0;
  double alpha = 0.0;
  double phi = 0.0;
  // Set when replicates * alpha < 5, i.e. the quantile is under-resolved.
  bool low_resolution_warning = false;
};

// Empirical null calibration: simulates `replicates` pure-noise images,
// computes max(T_+(tau), T_-(tau)) for each, and returns the empirical
// (1-alpha)-quantile + 1 as phi, so that the inclusive rule T >= phi holds
// with empirical level <= alpha. Requires replicates >= 100 and
// alpha in (0, 0.5].
CalibrationEntry calibrate_phi(int32_t side_length, double tau, const NoiseModel& model,
                               double sigma, double alpha_target, int replicates,
                               uint64_t seed, int workers = 1);

struct TestConfig {
  int32_t side_length = 0;
  double tau = 0.0;
  double phi = 0.0;
  PhiMode phi_mode = PhiMode::calibrated;
  TestSide side = TestSide::both;
  std::optional<double> K0;            // theory mode only
  std::optional<double> alpha_target;  // calibrated mode only
};

struct TestResult {
  int64_t statistic = 0;
  double phi = 0.0;
  bool reject = false;
  TestSide side = TestSide::both;
  double tau = 0.0;
};

// Maximum cluster test: reject iff T >= phi (inclusive boundary).
TestResult max_cluster_test(const ObservedImage& image, const TestConfig& config);

struct MultiTestDecision {
  int k = 0;
  double a_k = 0.0;
  int64_t t_plus = 0;
  int64_t t_minus = 0;
  bool tested = false;
  // Both level sets contain screen-crossing clusters, so the threshold is
  // uninformative and excluded from the family.
  bool skipped_crossing = false;
  double phi = 0.0;  // valid iff tested
  bool reject = false;
};

struct MultiTestResult {
  std::vector<MultiTestDecision> decisions;
  bool overall_reject = false;
  int first_rejecting_k = 0;  // 0 when no rejection
  int k_max = 0;
  double per_test_level = 0.0;
  uint64_t label_ops = 0;
};

// Supplies the rejection threshold for step k at threshold a_k and the given
// per-test level.
using PhiProvider = std::function<double(int k, double a_k, double level)>;

enum class LevelAdjust { none, bonferroni };

// Dyadic multiple test: thresholds a_k = 2^-k r for k = 1..k_max with
// k_max = min(ceil(log2(r / tau0)), N). Stops at the first rejection. With
// bonferroni adjustment every test runs at level alpha_target / k_max.
// Requires 0 < tau0 < r and image values within [-r, r].
MultiTestResult multi_test(const ObservedImage& image, double r, double tau0,
                           const PhiProvider& phi_provider, LevelAdjust adjust,
                           double alpha_target);

struct UncertaintyReport {
  double rho = 0.0;
  int32_t side_length = 0;
  double lhs = 0.0;      // P(0 < eps < rho) computed as F(rho) - 1/2
  double rhs = 0.0;      // ((N^2)^(1/N^2) - 1) / 18
  bool detectable = false;
  double sufficient_constant = 0.0;  // numeric max of s(x) on (0,1]
  double weak_bound_M = 0.0;         // numeric max of s(x)/sqrt(x) on (0,1]
};

// Necessary detectability condition P(0 < eps < rho) > ((N^2)^(1/N^2) - 1)/18.
// Requires a noise CDF continuous at zero, rho >= 0 and N >= 2.
UncertaintyReport uncertainty_check(const NoiseModel& model, double rho, int32_t side_length);

// (1/18) ((N^2)^(1/N^2) - 1): if |p_E - p_c| is strictly below this value,
// phi_theory(N, p_E) exceeds N^2 and the test can never reject.
double never_reject_bound(int32_t side_length);

// s(x) = (1/18)(e^(-x ln x) - 1) on (0,1], and its numeric maximum.
double s_function(double x);
double s_max();

// Weak uncertainty bound: minimal rho = M / (f(0) N) with
// M = max s(x)/sqrt(x); requires a density positive at zero.
double weak_uncertainty_bound(const NoiseModel& model, int32_t side_length);

// Smallest signal-to-noise ratio rho* satisfying the uncertainty bound with
// equality, scaled by sigma: the natural floor tau_0 for the dyadic schedule.
double tau0_from_uncertainty(const NoiseModel& model, double sigma, int32_t side_length);

}  // namespace percdet
