#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "percdet/lattice.hpp"
#include "percdet/rng.hpp"

namespace percdet {

enum class NoiseFamily { gaussian, laplace, uniform, student_t, discrete_symmetric };

// Nondegeneracy of the noise with respect to p_c = 1/2: the CDF must cross
// level 1 - p_c at a single point m, either by a jump or with positive
// density there.
struct NondegeneracyReport {
  double m_plus = 0.0;   // inf{x : F(x) >= 1 - p_c}
  double m_minus = 0.0;  // sup{x : F(x) <= 1 - p_c}
  double m = 0.0;
  enum class Mode { jump, density } mode = Mode::density;
  bool ok = false;
  std::string reason;
};

// Symmetric, mean-0, variance-1 noise distribution with CDF and quantile
// access. Families are normalized at construction (student_t is rescaled by
// sqrt((nu-2)/nu), discrete supports are rescaled to unit variance) and the
// standardization is checked numerically.
class NoiseModel {
 public:
  static NoiseModel gaussian();
  static NoiseModel laplace();
  static NoiseModel uniform();
  static NoiseModel student_t(double nu);  // requires nu > 2
  // Support/weights must be given symmetrically (every (x,w) mirrored by
  // (-x,w)); weights are normalized to sum 1 and the support is rescaled to
  // unit variance.
  static NoiseModel discrete_symmetric(std::vector<double> support, std::vector<double> weights);

  // Parses a plain descriptor: "gaussian", "laplace", "uniform",
  // "student_t:nu=5", "discrete:support=-1,0,1;weights=0.25,0.5,0.25".
  static NoiseModel parse(const std::string& descriptor);

  NoiseFamily family() const { return family_; }
  const std::string& family_name() const { return family_name_; }
  std::string descriptor() const;

  double cdf(double x) const;
  // Generalized inverse; for continuous families the result is nudged so that
  // cdf(quantile(u)) <= u within a few ulp. u must lie in (0,1).
  double quantile(double u) const;
  bool has_density() const { return family_ != NoiseFamily::discrete_symmetric; }
  double density(double x) const;  // throws for discrete families
  bool is_discrete() const { return family_ == NoiseFamily::discrete_symmetric; }
  // True iff the CDF has an atom at zero.
  bool atom_at_zero() const;

  double sample(Xoshiro256pp& rng) const { return quantile(rng.unit()); }

  NondegeneracyReport validate_nondegeneracy() const;

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  double nu() const { return nu_; }

 private:
  NoiseModel() = default;
  void check_standardization() const;

  NoiseFamily family_ = NoiseFamily::gaussian;
  std::string family_name_ = "gaussian";
  double nu_ = 0.0;                     // student_t only
  double t_scale_ = 1.0;                // student_t: sqrt((nu-2)/nu)
  std::vector<double> support_;         // discrete only, ascending, unit variance
  std::vector<double> weights_;         // discrete only, sum 1
  std::vector<double> cumulative_;      // discrete only
};

// Observed intensities Y(s) = f(s) + sigma * eps(s), possibly clamped by a
// bounded detector.
struct ObservedImage {
  Lattice lattice;
  std::vector<double> values;
  double sigma = 1.0;
  bool truncated = false;
  double range = 0.0;  // valid iff truncated
};

struct DetectorDevice {
  double range = 0.0;  // must be > 0
};

// Y(s) = f(s) + sigma*eps(s) with iid eps from the model; deterministic in
// the seed. sigma must be > 0.
ObservedImage apply_noise(const DiscretizedPicture& picture, double sigma,
                          const NoiseModel& model, uint64_t seed);

// Clamp every value to [-r, r]. Idempotent and monotone.
ObservedImage detector_truncate(const ObservedImage& image, DetectorDevice device);

struct PiDEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  int replicates = 0;
};

// Monte Carlo estimate of pi_D = P(the clamp is inactive on every site),
// i.e. P(max |Y| <= r).
PiDEstimate estimate_pi_D(const DiscretizedPicture& picture, double sigma,
                          const NoiseModel& model, DetectorDevice device,
                          int replicates, uint64_t seed);

}  // namespace percdet
