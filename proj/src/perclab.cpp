#include "percdet/perclab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace percdet {

namespace {

// Pure per-site occupancy rule; independent of evaluation order.
inline bool site_occupied(uint64_t seed, int32_t index, double p) {
  return to_unit(derive_seed(seed, static_cast<uint64_t>(index))) < p;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit fit;
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double n = static_cast<double>(xs.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.slope * xs[i] + fit.intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace

PercolationSample sample_configuration(int32_t side_length, double p, uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  Lattice lattice(side_length);
  SiteMask mask(lattice);
  const int64_t total = lattice.site_count();
  for (int32_t i = 0; i < total; ++i) mask.set(i, site_occupied(seed, i, p));
  return {lattice, p, std::move(mask), seed};
}

namespace {

// Size of the cluster containing the center site, sampling sites lazily.
int64_t center_cluster_size(const Lattice& lattice, double p, uint64_t seed) {
  const int32_t n = lattice.side();
  const int32_t center = (n / 2) * n + (n / 2);
  if (!site_occupied(seed, center, p)) return 0;
  std::unordered_set<int32_t> visited;
  std::vector<int32_t> queue;
  visited.insert(center);
  queue.push_back(center);
  int64_t size = 0;
  std::array<int32_t, 6> nb;
  while (!queue.empty()) {
    const int32_t cur = queue.back();
    queue.pop_back();
    ++size;
    const int count = lattice.neighbor_indices(cur, nb);
    for (int i = 0; i < count; ++i) {
      if (visited.contains(nb[i])) continue;
      if (site_occupied(seed, nb[i], p)) {
        visited.insert(nb[i]);
        queue.push_back(nb[i]);
      }
    }
  }
  return size;
}

std::vector<double> tail_from_sizes(const std::vector<int64_t>& sizes) {
  int64_t max_size = 0;
  for (int64_t s : sizes) max_size = std::max(max_size, s);
  if (max_size == 0) return {};
  std::vector<int64_t> at_least(static_cast<size_t>(max_size) + 1, 0);
  for (int64_t s : sizes)
    if (s > 0) ++at_least[static_cast<size_t>(s)];
  for (int64_t n = max_size - 1; n >= 1; --n)
    at_least[static_cast<size_t>(n)] += at_least[static_cast<size_t>(n) + 1];
  std::vector<double> tail(static_cast<size_t>(max_size));
  for (int64_t n = 1; n <= max_size; ++n)
    tail[static_cast<size_t>(n - 1)] =
        static_cast<double>(at_least[static_cast<size_t>(n)]) / static_cast<double>(sizes.size());
  return tail;
}

double lambda_from_tail(const std::vector<double>& tail) {
  // Largest exponent valid for every observed n: min of -ln(tail(n))/n.
  double lambda = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < tail.size(); ++i) {
    if (tail[i] <= 0.0) continue;
    lambda = std::min(lambda, -std::log(tail[i]) / static_cast<double>(i + 1));
  }
  return lambda;
}

double chi_from_tail(const std::vector<double>& tail) {
  double chi = 0.0;
  for (double t : tail) chi += t;
  return chi;
}

}  // namespace

ClusterStats estimate_cluster_stats(int32_t side_length, double p, int replicates,
                                    uint64_t seed, bool allow_supercritical, int workers) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  const bool supercritical = p >= kCriticalProbability;
  if (supercritical && !allow_supercritical)
    throw std::invalid_argument("p >= 1/2 is supercritical; pass allow_supercritical to proceed");
  Lattice lattice(side_length);
  std::vector<int64_t> sizes(static_cast<size_t>(replicates), 0);
  run_replicates(replicates, workers, [&](int i) {
    sizes[static_cast<size_t>(i)] =
        center_cluster_size(lattice, p, derive_seed(seed, static_cast<uint64_t>(i)));
  });

  ClusterStats stats;
  stats.p = p;
  stats.side_length = side_length;
  stats.replicates = replicates;
  stats.seed = seed;
  stats.supercritical = supercritical;
  stats.tail = tail_from_sizes(sizes);
  stats.degenerate = stats.tail.empty();
  stats.chi_hat = chi_from_tail(stats.tail);
  stats.lambda_hat = (stats.degenerate || supercritical) ? 0.0 : lambda_from_tail(stats.tail);

  // Bootstrap error bars (500 resamples) for chi_hat and lambda_hat.
  if (!stats.degenerate) {
    constexpr int kResamples = 500;
    std::vector<double> chi_bs, lambda_bs;
    chi_bs.reserve(kResamples);
    lambda_bs.reserve(kResamples);
    std::vector<int64_t> resampled(static_cast<size_t>(replicates));
    for (int b = 0; b < kResamples; ++b) {
      Xoshiro256pp rng(derive_seed(seed, 0x00b007u + static_cast<uint64_t>(b)));
      for (int i = 0; i < replicates; ++i) {
        const auto j = static_cast<size_t>(rng.unit() * replicates);
        resampled[static_cast<size_t>(i)] = sizes[std::min(j, sizes.size() - 1)];
      }
      const std::vector<double> tail = tail_from_sizes(resampled);
      if (tail.empty()) continue;
      chi_bs.push_back(chi_from_tail(tail));
      if (!supercritical) lambda_bs.push_back(lambda_from_tail(tail));
    }
    const auto stddev = [](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    stats.chi_se = stddev(chi_bs);
    stats.lambda_se = stddev(lambda_bs);
  }
  return stats;
}

LambdaBoundReport verify_lambda_bound(const ClusterStats& stats) {
  if (stats.supercritical)
    throw std::invalid_argument("lambda bounds apply to subcritical statistics only");
  LambdaBoundReport report;
  report.p = stats.p;
  report.chi_hat = stats.chi_hat;
  report.lambda_hat = stats.lambda_hat;
  report.chi_se = stats.chi_se;
  report.lambda_se = stats.lambda_se;
  report.geometric_sum_bound =
      stats.lambda_hat > 0.0 ? 1.0 / std::expm1(stats.lambda_hat)
                             : std::numeric_limits<double>::infinity();
  report.definitional_ok = stats.chi_hat <= report.geometric_sum_bound;
  const double delta = std::fabs(stats.p - kCriticalProbability);
  report.log_bound = std::log1p(18.0 * delta);
  report.lambda_within_log_bound = stats.lambda_hat <= report.log_bound;
  report.lambda_margin = report.log_bound - stats.lambda_hat;
  report.chi_bound = delta > 0.0 ? 1.0 / (18.0 * delta) : std::numeric_limits<double>::infinity();
  report.chi_above_lower_bound = stats.chi_hat >= report.chi_bound;
  report.chi_below_upper_bound = stats.chi_hat <= report.chi_bound;
  return report;
}

ErrorRateFit estimate_error_rates(const std::vector<int32_t>& side_lengths,
                                  const SignalSpec& signal, const NoiseModel& model,
                                  double sigma, double tau, const PhiSpec& phi_spec,
                                  int replicates, uint64_t seed, int workers) {
  if (side_lengths.empty()) throw std::invalid_argument("at least one lattice side is required");
  for (int32_t n : side_lengths)
    if (n < 8) throw std::invalid_argument("error-rate estimation requires N >= 8");
  if (signal.side_divisor < 1) throw std::invalid_argument("side_divisor must be >= 1");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");

  ErrorRateFit fit;
  fit.beta_flagged = signal.intensity <= 0.0;

  for (size_t ni = 0; ni < side_lengths.size(); ++ni) {
    const int32_t n = side_lengths[ni];
    const int32_t square_side = n / signal.side_divisor;
    ErrorRatePoint point;
    point.side_length = n;
    point.square_side = square_side;

    if (phi_spec.mode == PhiMode::theory) {
      point.phi = phi_spec.K0 * std::log(static_cast<double>(n));
      if (!fit.beta_flagged && static_cast<double>(square_side) < point.phi)
        throw std::invalid_argument(
            "bulk condition violated: the signal square side must be >= K0 log N");
    } else {
      point.phi = calibrate_phi(n, tau, model, sigma, phi_spec.alpha_target,
                                phi_spec.calibration_replicates,
                                derive_seed(seed, 0xca11b000u + ni), workers)
                      .phi;
    }

    const DiscretizedPicture null_picture = constant_picture(n, 0.0);
    std::vector<uint8_t> null_reject(static_cast<size_t>(replicates), 0);
    run_replicates(replicates, workers, [&](int i) {
      const ObservedImage image = apply_noise(
          null_picture, sigma, model, derive_seed(seed, (2 * ni) * 1000003ULL + i));
      const int64_t t = std::max(max_cluster_statistic(image, tau, Side::plus),
                                 max_cluster_statistic(image, tau, Side::minus));
      null_reject[static_cast<size_t>(i)] = static_cast<double>(t) >= point.phi ? 1 : 0;
    });
    int64_t rejects = 0;
    for (uint8_t b : null_reject) rejects += b;
    point.alpha_hat = static_cast<double>(rejects) / replicates;
    point.alpha_censored = rejects == 0 || rejects == replicates;

    if (!fit.beta_flagged) {
      const DiscretizedPicture signal_picture = square_picture(n, square_side, signal.intensity);
      std::vector<uint8_t> misses(static_cast<size_t>(replicates), 0);
      run_replicates(replicates, workers, [&](int i) {
        const ObservedImage image = apply_noise(
            signal_picture, sigma, model, derive_seed(seed, (2 * ni + 1) * 1000003ULL + i));
        const int64_t t = std::max(max_cluster_statistic(image, tau, Side::plus),
                                   max_cluster_statistic(image, tau, Side::minus));
        misses[static_cast<size_t>(i)] = static_cast<double>(t) < point.phi ? 1 : 0;
      });
      int64_t accepted = 0;
      for (uint8_t b : misses) accepted += b;
      point.beta_hat = static_cast<double>(accepted) / replicates;
      point.beta_censored = accepted == 0 || accepted == replicates;
    } else {
      point.beta_censored = true;
    }
    fit.points.push_back(point);
  }

  std::vector<double> ax, ay, bx, by;
  fit.alpha_nonincreasing = true;
  fit.beta_nonincreasing = true;
  for (size_t i = 0; i < fit.points.size(); ++i) {
    const auto& pt = fit.points[i];
    if (!pt.alpha_censored) {
      ax.push_back(pt.phi);
      ay.push_back(std::log(pt.alpha_hat));
    }
    if (!fit.beta_flagged && !pt.beta_censored) {
      bx.push_back(static_cast<double>(pt.square_side));
      by.push_back(std::log(pt.beta_hat));
    }
    if (i > 0) {
      if (pt.alpha_hat > fit.points[i - 1].alpha_hat) fit.alpha_nonincreasing = false;
      if (pt.beta_hat > fit.points[i - 1].beta_hat) fit.beta_nonincreasing = false;
    }
  }
  const LineFit alpha_fit = least_squares(ax, ay);
  const LineFit beta_fit = least_squares(bx, by);
  fit.alpha_slope = alpha_fit.slope;
  fit.alpha_r2 = alpha_fit.r2;
  fit.alpha_fit_points = alpha_fit.points;
  fit.beta_slope = beta_fit.slope;
  fit.beta_r2 = beta_fit.r2;
  fit.beta_fit_points = beta_fit.points;
  return fit;
}

ComplexityTable complexity_probe(const std::vector<int32_t>& side_lengths, ProbeMode mode,
                                 uint64_t seed) {
  if (side_lengths.empty()) throw std::invalid_argument("at least one lattice side is required");
  for (size_t i = 1; i < side_lengths.size(); ++i)
    if (side_lengths[i] <= side_lengths[i - 1])
      throw std::invalid_argument("side lengths must be strictly increasing");

  const NoiseModel model = NoiseModel::gaussian();
  ComplexityTable table;
  using clock = std::chrono::steady_clock;
  for (size_t ni = 0; ni < side_lengths.size(); ++ni) {
    const int32_t n = side_lengths[ni];
    ComplexityRow row;
    row.side_length = n;
    const DiscretizedPicture zero = constant_picture(n, 0.0);
    ObservedImage image = apply_noise(zero, 1.0, model, derive_seed(seed, ni));
    if (mode == ProbeMode::single) {
      const int reps = std::max(3, static_cast<int>(5'000'000 / (static_cast<int64_t>(n) * n)));
      double best = std::numeric_limits<double>::infinity();
      for (int rep = 0; rep < reps; ++rep) {
        const auto t0 = clock::now();
        const ClusterLabeling super = label_clusters(super_level_set(image, 0.5));
        const ClusterLabeling sub = label_clusters(sub_level_set(image, 0.5));
        const auto t1 = clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
        if (rep == 0) row.op_count = super.ops + sub.ops;
      }
      row.seconds = best;
    } else {
      image = detector_truncate(image, DetectorDevice{1.0});
      const double tau0 = tau0_from_uncertainty(model, 1.0, n);
      const double never = static_cast<double>(n) * n + 1.0;
      double best = std::numeric_limits<double>::infinity();
      for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = clock::now();
        const MultiTestResult result = multi_test(
            image, 1.0, tau0, [never](int, double, double) { return never; },
            LevelAdjust::bonferroni, 0.05);
        const auto t1 = clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
        if (rep == 0) row.op_count = result.label_ops;
      }
      row.seconds = best;
    }
    table.rows.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& row : table.rows) {
    xs.push_back(std::log(static_cast<double>(row.side_length) * row.side_length));
    ys.push_back(std::log(row.seconds));
  }
  const LineFit fit = least_squares(xs, ys);
  table.slope_defined = fit.points >= 2;
  table.loglog_slope = fit.slope;
  return table;
}

}  // namespace percdet
