#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "percdet/detect.hpp"
#include "percdet/lattice.hpp"
#include "percdet/noise.hpp"

namespace percdet {

struct PercolationSample {
  Lattice lattice;
  double p = 0.0;
  SiteMask mask;
  uint64_t seed = 0;
};

// Site percolation configuration: each site is occupied independently with
// probability p, via the pure per-site rule to_unit(derive_seed(seed, index)) < p.
PercolationSample sample_configuration(int32_t side_length, double p, uint64_t seed);

struct ClusterStats {
  double p = 0.0;
  int32_t side_length = 0;
  int replicates = 0;
  uint64_t seed = 0;
  // tail[n-1] = empirical P(|C| >= n) for the cluster C containing the center
  // site (|C| = 0 when the center is unoccupied).
  std::vector<double> tail;
  double chi_hat = 0.0;     // = sum of tail, the empirical mean cluster size
  double chi_se = 0.0;      // bootstrap standard error
  double lambda_hat = 0.0;  // min over n of -ln(tail(n))/n
  double lambda_se = 0.0;   // bootstrap standard error
  bool degenerate = false;  // no occupied centers observed
  bool supercritical = false;  // p >= 1/2; lambda fitting disabled
};

// Monte Carlo cluster-size statistics at occupation probability p. Requires
// p < 1/2 unless allow_supercritical is set (then lambda is not fitted).
ClusterStats estimate_cluster_stats(int32_t side_length, double p, int replicates,
                                    uint64_t seed, bool allow_supercritical = false,
                                    int workers = 1);

struct LambdaBoundReport {
  double p = 0.0;
  double chi_hat = 0.0;
  double lambda_hat = 0.0;
  double chi_se = 0.0;
  double lambda_se = 0.0;
  // chi_hat <= e^-lambda/(1 - e^-lambda); forced by the min construction.
  double geometric_sum_bound = 0.0;
  bool definitional_ok = false;
  // lambda_hat <= log(1 + 18 |p - p_c|).
  double log_bound = 0.0;
  bool lambda_within_log_bound = false;
  double lambda_margin = 0.0;  // log_bound - lambda_hat
  // chi comparisons against (1/18)|p - p_c|^-1: the derivation requires the
  // lower-bound direction; the opposite direction is reported, not asserted.
  double chi_bound = 0.0;
  bool chi_above_lower_bound = false;
  bool chi_below_upper_bound = false;
};

LambdaBoundReport verify_lambda_bound(const ClusterStats& stats);

struct SignalSpec {
  int32_t side_divisor = 4;  // square side = N / side_divisor
  double intensity = 1.0;
};

struct PhiSpec {
  PhiMode mode = PhiMode::calibrated;
  double K0 = 0.0;            // theory mode: fixed across N
  double alpha_target = 0.05; // calibrated mode
  int calibration_replicates = 500;
};

struct ErrorRatePoint {
  int32_t side_length = 0;
  double phi = 0.0;
  int32_t square_side = 0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  bool alpha_censored = false;  // empirical rate hit 0 or 1
  bool beta_censored = false;
};

struct ErrorRateFit {
  std::vector<ErrorRatePoint> points;
  // Least-squares slope of log alpha_hat against phi(N) resp. of
  // log beta_hat against the square side, over non-censored points.
  double alpha_slope = 0.0;
  double beta_slope = 0.0;
  double alpha_r2 = 0.0;
  double beta_r2 = 0.0;
  int alpha_fit_points = 0;
  int beta_fit_points = 0;
  bool alpha_nonincreasing = false;
  bool beta_nonincreasing = false;
  bool beta_flagged = false;  // intensity <= 0: beta runs are meaningless
};

// Empirical error rates of the maximum cluster test across lattice sizes:
// alpha from pure-noise runs, beta from runs with a centered square signal.
// In theory mode the bulk condition side >= K0 log N is enforced for each N.
ErrorRateFit estimate_error_rates(const std::vector<int32_t>& side_lengths,
                                  const SignalSpec& signal, const NoiseModel& model,
                                  double sigma, double tau, const PhiSpec& phi_spec,
                                  int replicates, uint64_t seed, int workers = 1);

enum class ProbeMode { single, multi };

struct ComplexityRow {
  int32_t side_length = 0;
  double seconds = 0.0;
  uint64_t op_count = 0;
};

struct ComplexityTable {
  std::vector<ComplexityRow> rows;
  double loglog_slope = 0.0;  // slope of log time against log N^2
  bool slope_defined = false;
};

// Measures wall time and union-find operation counts of the single test
// (two level sets + labelings at tau = 0.5) or of a full non-rejecting
// multi-test schedule. side_lengths must be strictly increasing.
ComplexityTable complexity_probe(const std::vector<int32_t>& side_lengths, ProbeMode mode,
                                 uint64_t seed);

}  // namespace percdet
