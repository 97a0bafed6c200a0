#include "percdet/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace percdet {

PhiTheory phi_theory(int32_t side_length, double p_error, double factor) {
  if (side_length < 2) throw std::invalid_argument("phi_theory requires N >= 2");
  if (!(p_error > 0.0 && p_error < 0.5))
    throw std::invalid_argument("phi_theory requires 0 < p_error < 1/2 (subcritical)");
  if (!(factor > 0.0)) throw std::invalid_argument("phi_theory factor must be > 0");
  const double K0 = factor / std::log1p(18.0 * (0.5 - p_error));
  return {K0, K0 * std::log(static_cast<double>(side_length))};
}

CalibrationEntry calibrate_phi(int32_t side_length, double tau, const NoiseModel& model,
                               double sigma, double alpha_target, int replicates,
                               uint64_t seed, int workers) {
  if (replicates < 100) throw std::invalid_argument("calibration requires at least 100 replicates");
  if (!(alpha_target > 0.0 && alpha_target <= 0.5))
    throw std::invalid_argument("alpha_target must lie in (0, 0.5]");
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  const DiscretizedPicture null_picture = constant_picture(side_length, 0.0);
  std::vector<int64_t> stats(static_cast<size_t>(replicates));
  run_replicates(replicates, workers, [&](int i) {
    const ObservedImage image =
        apply_noise(null_picture, sigma, model, derive_seed(seed, static_cast<uint64_t>(i)));
    stats[static_cast<size_t>(i)] = std::max(max_cluster_statistic(image, tau, Side::plus),
                                             max_cluster_statistic(image, tau, Side::minus));
  });
  std::sort(stats.begin(), stats.end());
  const int rank = std::clamp(
      static_cast<int>(std::ceil((1.0 - alpha_target) * replicates - 1e-9)), 1, replicates);
  CalibrationEntry entry;
  entry.side_length = side_length;
  entry.family = model.family_name();
  entry.noise_descriptor = model.descriptor();
  entry.sigma = sigma;
  entry.tau = tau;
  entry.replicates = replicates;
  entry.seed = seed;
  entry.alpha = alpha_target;
  entry.phi = static_cast<double>(stats[static_cast<size_t>(rank - 1)] + 1);
  entry.low_resolution_warning = replicates * alpha_target < 5.0;
  return entry;
}

namespace {

void validate_config(const ObservedImage& image, const TestConfig& config) {
  if (config.side_length != image.lattice.side())
    throw std::invalid_argument("test config lattice side does not match the image");
  if (config.phi < 0.0) throw std::invalid_argument("phi must be >= 0");
  if (config.side != TestSide::plus_only && config.tau < 0.0)
    throw std::invalid_argument("two-sided and minus-side tests require tau >= 0");
  const bool has_theory = config.K0.has_value();
  const bool has_calibrated = config.alpha_target.has_value();
  if (config.phi_mode == PhiMode::theory && (!has_theory || has_calibrated))
    throw std::invalid_argument("theory mode carries K0 and no alpha_target");
  if (config.phi_mode == PhiMode::calibrated && (has_theory || !has_calibrated))
    throw std::invalid_argument("calibrated mode carries alpha_target and no K0");
}

}  // namespace

TestResult max_cluster_test(const ObservedImage& image, const TestConfig& config) {
  validate_config(image, config);
  int64_t statistic = 0;
  switch (config.side) {
    case TestSide::plus_only:
      statistic = max_cluster_statistic(image, config.tau, Side::plus);
      break;
    case TestSide::minus_only:
      statistic = max_cluster_statistic(image, config.tau, Side::minus);
      break;
    case TestSide::both:
      statistic = std::max(max_cluster_statistic(image, config.tau, Side::plus),
                           max_cluster_statistic(image, config.tau, Side::minus));
      break;
  }
  return {statistic, config.phi, static_cast<double>(statistic) >= config.phi, config.side,
          config.tau};
}

MultiTestResult multi_test(const ObservedImage& image, double r, double tau0,
                           const PhiProvider& phi_provider, LevelAdjust adjust,
                           double alpha_target) {
  if (!(r > 0.0)) throw std::invalid_argument("detector range r must be > 0");
  if (!(tau0 > 0.0)) throw std::invalid_argument("tau0 must be > 0");
  if (!(tau0 < r)) throw std::invalid_argument("tau0 must be < r");
  if (!(alpha_target > 0.0 && alpha_target < 1.0))
    throw std::invalid_argument("alpha_target must lie in (0,1)");
  for (double v : image.values) {
    if (std::fabs(v) > r)
      throw std::invalid_argument("image values exceed the detector range r");
  }
  const int32_t n = image.lattice.side();
  MultiTestResult result;
  const double steps = std::log2(r / tau0);
  result.k_max = static_cast<int>(
      std::min<int64_t>(static_cast<int64_t>(std::ceil(steps - 1e-12)), n));

  // First pass: statistics and crossing flags at every threshold. Thresholds
  // where both level sets cross the screen are uninformative (even pure noise
  // crosses there) and do not count toward the Bonferroni family.
  result.decisions.reserve(static_cast<size_t>(result.k_max));
  int family = 0;
  for (int k = 1; k <= result.k_max; ++k) {
    MultiTestDecision decision;
    decision.k = k;
    decision.a_k = std::ldexp(r, -k);
    const SiteMask super = super_level_set(image, decision.a_k);
    const SiteMask sub = sub_level_set(image, decision.a_k);
    const ClusterLabeling super_labels = label_clusters(super);
    const ClusterLabeling sub_labels = label_clusters(sub);
    result.label_ops += super_labels.ops + sub_labels.ops;
    decision.t_plus = super_labels.max_cluster_size;
    decision.t_minus = sub_labels.max_cluster_size;
    decision.skipped_crossing = labeling_has_crossing(image.lattice, super_labels) &&
                                labeling_has_crossing(image.lattice, sub_labels);
    if (!decision.skipped_crossing) ++family;
    result.decisions.push_back(decision);
  }
  result.per_test_level =
      adjust == LevelAdjust::bonferroni ? alpha_target / std::max(family, 1) : alpha_target;

  // Second pass: test the informative thresholds in schedule order, stopping
  // at the first rejection.
  for (auto& decision : result.decisions) {
    if (decision.skipped_crossing) continue;
    decision.tested = true;
    decision.phi = phi_provider(decision.k, decision.a_k, result.per_test_level);
    const int64_t statistic = std::max(decision.t_plus, decision.t_minus);
    decision.reject = static_cast<double>(statistic) >= decision.phi;
    if (decision.reject) {
      result.overall_reject = true;
      result.first_rejecting_k = decision.k;
      break;
    }
  }
  return result;
}

double s_function(double x) {
  if (!(x > 0.0 && x <= 1.0)) throw std::invalid_argument("s_function requires x in (0,1]");
  return std::expm1(-x * std::log(x)) / 18.0;
}

namespace {

// Golden-section maximization of a unimodal function on [lo, hi].
template <class F>
double golden_max(const F& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - kInvPhi * (b - a);
    d = a + kInvPhi * (b - a);
  }
  return 0.5 * (a + b);
}

double rhs_factor(int32_t side_length) {
  const long double n2 = static_cast<long double>(side_length) * side_length;
  return static_cast<double>(expm1l(logl(n2) / n2));
}

double weak_bound_constant() {
  static const double value = [] {
    // Coarse scan, then golden refinement around the best cell.
    const auto g = [](double x) { return s_function(x) / std::sqrt(x); };
    double best_x = 0.5, best = g(0.5);
    for (int i = 1; i <= 100000; ++i) {
      const double x = i * 1e-5;
      const double v = g(x);
      if (v > best) { best = v; best_x = x; }
    }
    const double x = golden_max(g, std::max(1e-9, best_x - 1e-5), std::min(1.0, best_x + 1e-5));
    return g(x);
  }();
  return value;
}

}  // namespace

double s_max() {
  static const double value = [] {
    const double x = golden_max([](double t) { return s_function(t); }, 1e-9, 1.0);
    return s_function(x);
  }();
  return value;
}

double never_reject_bound(int32_t side_length) {
  if (side_length < 2) throw std::invalid_argument("never_reject_bound requires N >= 2");
  return rhs_factor(side_length) / 18.0;
}

UncertaintyReport uncertainty_check(const NoiseModel& model, double rho, int32_t side_length) {
  if (side_length < 2) throw std::invalid_argument("uncertainty_check requires N >= 2");
  if (rho < 0.0) throw std::invalid_argument("rho must be >= 0");
  if (model.atom_at_zero())
    throw std::invalid_argument(
        "uncertainty bound requires a noise CDF continuous at zero; this model has an atom at 0");
  UncertaintyReport report;
  report.rho = rho;
  report.side_length = side_length;
  report.lhs = rho == 0.0 ? 0.0 : model.cdf(rho) - 0.5;
  const double factor = rhs_factor(side_length);
  report.rhs = factor / 18.0;
  report.detectable = 18.0L * static_cast<long double>(report.lhs) >
                      static_cast<long double>(factor);
  report.sufficient_constant = s_max();
  report.weak_bound_M = weak_bound_constant();
  return report;
}

double weak_uncertainty_bound(const NoiseModel& model, int32_t side_length) {
  if (side_length < 2) throw std::invalid_argument("weak_uncertainty_bound requires N >= 2");
  if (!model.has_density())
    throw std::invalid_argument("weak uncertainty bound requires a noise density");
  const double f0 = model.density(0.0);
  if (!(f0 > 0.0)) throw std::invalid_argument("weak uncertainty bound requires density > 0 at 0");
  return weak_bound_constant() / (f0 * side_length);
}

double tau0_from_uncertainty(const NoiseModel& model, double sigma, int32_t side_length) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (side_length < 2) throw std::invalid_argument("tau0_from_uncertainty requires N >= 2");
  if (model.atom_at_zero())
    throw std::invalid_argument(
        "uncertainty bound requires a noise CDF continuous at zero; this model has an atom at 0");
  const double target = never_reject_bound(side_length);
  // lhs(rho) = F(rho) - 1/2 increases from 0 towards 1/2 > target.
  double lo = 0.0, hi = 1.0;
  while (model.cdf(hi) - 0.5 <= target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (model.cdf(mid) - 0.5 <= target) lo = mid; else hi = mid;
  }
  return sigma * hi;
}

}  // namespace percdet
