#include "percdet/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace percdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Wichura's algorithm AS 241 (PPND16): inverse of the standard normal CDF.
double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

// Continued fraction for the regularized incomplete beta (Lentz's method).
double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3.0e-16;
  constexpr double kFpMin = 1.0e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_frac(a, b, x) / a;
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

// Standard (unscaled) Student-t with nu degrees of freedom.
double student_cdf(double t, double nu) {
  if (t == 0.0) return 0.5;
  const double x = nu / (nu + t * t);
  const double half_tail = 0.5 * reg_inc_beta(0.5 * nu, 0.5, x);
  return t > 0.0 ? 1.0 - half_tail : half_tail;
}

double student_pdf(double t, double nu) {
  const double ln = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                    0.5 * std::log(nu * std::numbers::pi) -
                    0.5 * (nu + 1.0) * std::log1p(t * t / nu);
  return std::exp(ln);
}

// Safeguarded Newton inversion for a continuous strictly increasing CDF.
template <class Cdf, class Pdf>
double invert_cdf(const Cdf& cdf, const Pdf& pdf, double u, double guess) {
  double lo = guess, hi = guess;
  double step = 1.0;
  while (cdf(lo) > u) { lo -= step; step *= 2.0; }
  step = 1.0;
  while (cdf(hi) < u) { hi += step; step *= 2.0; }
  double x = std::clamp(guess, lo, hi);
  for (int i = 0; i < 200; ++i) {
    const double fx = cdf(x) - u;
    if (fx > 0.0) hi = x; else lo = x;
    const double dx = pdf(x);
    double next = dx > 0.0 ? x - fx / dx : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-15 * (1.0 + std::fabs(x))) return next;
    x = next;
  }
  return x;
}

// Composite Simpson on [a, b].
template <class F>
double simpson(const F& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

constexpr double kLaplaceScale = 0.7071067811865475244;  // 1/sqrt(2): unit variance
constexpr double kUniformHalfWidth = 1.7320508075688772935;  // sqrt(3): unit variance

}  // namespace

NoiseModel NoiseModel::gaussian() {
  NoiseModel m;
  m.family_ = NoiseFamily::gaussian;
  m.family_name_ = "gaussian";
  m.check_standardization();
  return m;
}

NoiseModel NoiseModel::laplace() {
  NoiseModel m;
  m.family_ = NoiseFamily::laplace;
  m.family_name_ = "laplace";
  m.check_standardization();
  return m;
}

NoiseModel NoiseModel::uniform() {
  NoiseModel m;
  m.family_ = NoiseFamily::uniform;
  m.family_name_ = "uniform";
  m.check_standardization();
  return m;
}

NoiseModel NoiseModel::student_t(double nu) {
  if (!(nu > 2.0)) throw std::invalid_argument("student_t requires nu > 2 for unit variance");
  NoiseModel m;
  m.family_ = NoiseFamily::student_t;
  m.family_name_ = "student_t";
  m.nu_ = nu;
  m.t_scale_ = std::sqrt((nu - 2.0) / nu);
  m.check_standardization();
  return m;
}

NoiseModel NoiseModel::discrete_symmetric(std::vector<double> support,
                                          std::vector<double> weights) {
  if (support.empty() || support.size() != weights.size())
    throw std::invalid_argument("discrete noise needs matching nonempty support and weights");
  // Sort by support, normalize weights.
  std::vector<size_t> order(support.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return support[a] < support[b]; });
  std::vector<double> xs, ws;
  double total = 0.0;
  for (size_t i : order) {
    if (!std::isfinite(support[i])) throw std::invalid_argument("discrete support must be finite");
    if (!(weights[i] > 0.0)) throw std::invalid_argument("discrete weights must be positive");
    if (!xs.empty() && support[i] == xs.back())
      throw std::invalid_argument("discrete support points must be distinct");
    xs.push_back(support[i]);
    ws.push_back(weights[i]);
    total += weights[i];
  }
  for (double& w : ws) w /= total;
  // Symmetry: every (x, w) must be mirrored by (-x, w).
  const size_t n = xs.size();
  for (size_t i = 0; i < n; ++i) {
    const size_t j = n - 1 - i;
    if (std::fabs(xs[i] + xs[j]) > 1e-12 * (1.0 + std::fabs(xs[i])) ||
        std::fabs(ws[i] - ws[j]) > 1e-12)
      throw std::invalid_argument("discrete noise must have mirrored support and weights");
  }
  double m2 = 0.0;
  for (size_t i = 0; i < n; ++i) m2 += ws[i] * xs[i] * xs[i];
  if (!(m2 > 0.0)) throw std::invalid_argument("discrete noise is degenerate at zero");
  const double scale = 1.0 / std::sqrt(m2);
  for (double& x : xs) x *= scale;

  NoiseModel m;
  m.family_ = NoiseFamily::discrete_symmetric;
  m.family_name_ = "discrete";
  m.support_ = std::move(xs);
  m.weights_ = std::move(ws);
  m.cumulative_.resize(n);
  double cum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    cum += m.weights_[i];
    m.cumulative_[i] = cum;
  }
  m.cumulative_.back() = 1.0;
  m.check_standardization();
  return m;
}

void NoiseModel::check_standardization() const {
  constexpr double kTol = 1e-6;
  double mean = 0.0, var = 0.0;
  switch (family_) {
    case NoiseFamily::gaussian:
      var = 2.0 * simpson([](double x) { return x * x * normal_pdf(x); }, 0.0, 12.0, 4096);
      break;
    case NoiseFamily::laplace:
      var = 2.0 * simpson([](double x) {
        return x * x * std::exp(-x / kLaplaceScale) / (2.0 * kLaplaceScale);
      }, 0.0, 40.0, 8192);
      break;
    case NoiseFamily::uniform:
      var = 2.0 * simpson([](double x) { return x * x / (2.0 * kUniformHalfWidth); }, 0.0,
                          kUniformHalfWidth, 4096);
      break;
    case NoiseFamily::student_t:
      // Exact second moment of the rescaled variable; tails are too heavy for
      // naive quadrature near nu = 2.
      var = t_scale_ * t_scale_ * nu_ / (nu_ - 2.0);
      break;
    case NoiseFamily::discrete_symmetric:
      for (size_t i = 0; i < support_.size(); ++i) {
        mean += weights_[i] * support_[i];
        var += weights_[i] * support_[i] * support_[i];
      }
      break;
  }
  if (std::fabs(mean) > kTol || std::fabs(var - 1.0) > kTol)
    throw std::invalid_argument("noise model failed the mean-0/variance-1 check");
}

double NoiseModel::cdf(double x) const {
  switch (family_) {
    case NoiseFamily::gaussian:
      return normal_cdf(x);
    case NoiseFamily::laplace:
      return x < 0.0 ? 0.5 * std::exp(x / kLaplaceScale)
                     : 1.0 - 0.5 * std::exp(-x / kLaplaceScale);
    case NoiseFamily::uniform:
      if (x <= -kUniformHalfWidth) return 0.0;
      if (x >= kUniformHalfWidth) return 1.0;
      return (x + kUniformHalfWidth) / (2.0 * kUniformHalfWidth);
    case NoiseFamily::student_t:
      return student_cdf(x / t_scale_, nu_);
    case NoiseFamily::discrete_symmetric: {
      // Right-continuous step function.
      const auto it = std::upper_bound(support_.begin(), support_.end(), x);
      if (it == support_.begin()) return 0.0;
      return cumulative_[static_cast<size_t>(it - support_.begin()) - 1];
    }
  }
  return 0.0;
}

double NoiseModel::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile requires u in (0,1)");
  if (family_ == NoiseFamily::discrete_symmetric) {
    // Generalized inverse: smallest support point with F(x) >= u.
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    const size_t i = std::min(static_cast<size_t>(it - cumulative_.begin()),
                              support_.size() - 1);
    return support_[i];
  }
  double q = 0.0;
  switch (family_) {
    case NoiseFamily::gaussian:
      q = normal_quantile(u);
      break;
    case NoiseFamily::laplace:
      q = u < 0.5 ? kLaplaceScale * std::log(2.0 * u)
                  : -kLaplaceScale * std::log(2.0 * (1.0 - u));
      break;
    case NoiseFamily::uniform:
      q = kUniformHalfWidth * (2.0 * u - 1.0);
      break;
    case NoiseFamily::student_t: {
      const double guess = normal_quantile(u);
      const double nu = nu_;
      q = t_scale_ * invert_cdf([nu](double t) { return student_cdf(t, nu); },
                                [nu](double t) { return student_pdf(t, nu); }, u, guess);
      break;
    }
    default:
      break;
  }
  // Keep cdf(quantile(u)) in [u - 1e-9, u]: descend by ulps if rounding
  // pushed the CDF above u. The walk is a few steps for the closed forms and
  // bounded by the inverter tolerance for student_t.
  for (int i = 0; i < 100000 && cdf(q) > u; ++i) q = std::nextafter(q, -kInf);
  return q;
}

double NoiseModel::density(double x) const {
  switch (family_) {
    case NoiseFamily::gaussian:
      return normal_pdf(x);
    case NoiseFamily::laplace:
      return std::exp(-std::fabs(x) / kLaplaceScale) / (2.0 * kLaplaceScale);
    case NoiseFamily::uniform:
      return std::fabs(x) <= kUniformHalfWidth ? 1.0 / (2.0 * kUniformHalfWidth) : 0.0;
    case NoiseFamily::student_t:
      return student_pdf(x / t_scale_, nu_) / t_scale_;
    case NoiseFamily::discrete_symmetric:
      throw std::domain_error("discrete noise has no density");
  }
  return 0.0;
}

bool NoiseModel::atom_at_zero() const {
  if (family_ != NoiseFamily::discrete_symmetric) return false;
  for (double x : support_)
    if (std::fabs(x) < 1e-12) return true;
  return false;
}

NondegeneracyReport NoiseModel::validate_nondegeneracy() const {
  NondegeneracyReport report;
  const double level = 1.0 - kCriticalProbability;
  if (family_ != NoiseFamily::discrete_symmetric) {
    const double m = quantile(level);
    report.m_plus = m;
    report.m_minus = m;
    report.m = m;
    if (density(m) > 0.0) {
      report.mode = NondegeneracyReport::Mode::density;
      report.ok = true;
    } else {
      report.ok = false;
      report.reason = "zero density at the critical quantile";
    }
    return report;
  }
  constexpr double kTol = 1e-12;
  const size_t n = support_.size();
  // m+ = first support point where the CDF reaches the level.
  size_t plus = n - 1;
  for (size_t i = 0; i < n; ++i) {
    if (cumulative_[i] >= level - kTol) { plus = i; break; }
  }
  report.m_plus = support_[plus];
  // F(x) <= level holds up to the first support point whose CDF value
  // strictly exceeds the level; a plateau at exactly the level extends the
  // supremum to the next support point.
  double minus = report.m_plus;
  if (std::fabs(cumulative_[plus] - level) <= kTol && plus + 1 < n)
    minus = support_[plus + 1];
  report.m_minus = minus;
  if (std::fabs(report.m_plus - report.m_minus) > kTol) {
    report.ok = false;
    report.reason = "CDF has a plateau at level 1 - p_c";
    return report;
  }
  report.m = report.m_plus;
  report.mode = NondegeneracyReport::Mode::jump;
  report.ok = true;
  return report;
}

std::string NoiseModel::descriptor() const {
  std::ostringstream out;
  switch (family_) {
    case NoiseFamily::student_t:
      out << "student_t:nu=" << nu_;
      break;
    case NoiseFamily::discrete_symmetric: {
      out << "discrete:support=";
      for (size_t i = 0; i < support_.size(); ++i) out << (i ? "," : "") << support_[i];
      out << ";weights=";
      for (size_t i = 0; i < weights_.size(); ++i) out << (i ? "," : "") << weights_[i];
      break;
    }
    default:
      out << family_name_;
  }
  return out.str();
}

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t used = 0;
    values.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("bad number in noise descriptor: " + item);
  }
  return values;
}

}  // namespace

NoiseModel NoiseModel::parse(const std::string& descriptor) {
  const size_t colon = descriptor.find(':');
  const std::string family = descriptor.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : descriptor.substr(colon + 1);
  if (family == "gaussian" || family == "normal") return gaussian();
  if (family == "laplace") return laplace();
  if (family == "uniform") return uniform();
  if (family == "student_t" || family == "t") {
    double nu = 0.0;
    std::stringstream ss(args);
    std::string kv;
    while (std::getline(ss, kv, ';')) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("expected key=value in noise descriptor");
      if (kv.substr(0, eq) == "nu") nu = std::stod(kv.substr(eq + 1));
    }
    if (nu == 0.0) throw std::invalid_argument("student_t descriptor needs nu=...");
    return student_t(nu);
  }
  if (family == "discrete" || family == "discrete_symmetric") {
    std::vector<double> support, weights;
    std::stringstream ss(args);
    std::string kv;
    while (std::getline(ss, kv, ';')) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("expected key=value in noise descriptor");
      const std::string key = kv.substr(0, eq);
      if (key == "support") support = parse_list(kv.substr(eq + 1));
      else if (key == "weights") weights = parse_list(kv.substr(eq + 1));
      else throw std::invalid_argument("unknown discrete noise key: " + key);
    }
    return discrete_symmetric(std::move(support), std::move(weights));
  }
  throw std::invalid_argument("unknown noise family: " + family);
}

ObservedImage apply_noise(const DiscretizedPicture& picture, double sigma,
                          const NoiseModel& model, uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  ObservedImage image{picture.lattice, {}, sigma, false, 0.0};
  image.values.resize(picture.values.size());
  Xoshiro256pp rng(seed);
  for (size_t i = 0; i < picture.values.size(); ++i)
    image.values[i] = picture.values[i] + sigma * model.sample(rng);
  return image;
}

ObservedImage detector_truncate(const ObservedImage& image, DetectorDevice device) {
  if (!(device.range > 0.0)) throw std::invalid_argument("detector range must be > 0");
  ObservedImage out = image;
  const double r = device.range;
  for (double& v : out.values) v = std::max(std::min(v, r), -r);
  out.truncated = true;
  out.range = r;
  return out;
}

PiDEstimate estimate_pi_D(const DiscretizedPicture& picture, double sigma,
                          const NoiseModel& model, DetectorDevice device,
                          int replicates, uint64_t seed) {
  if (!(device.range > 0.0)) throw std::invalid_argument("detector range must be > 0");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  int inside = 0;
  for (int i = 0; i < replicates; ++i) {
    const ObservedImage image = apply_noise(picture, sigma, model, derive_seed(seed, static_cast<uint64_t>(i)));
    bool all = true;
    for (double v : image.values) {
      if (std::fabs(v) > device.range) { all = false; break; }
    }
    inside += all ? 1 : 0;
  }
  const double p = static_cast<double>(inside) / replicates;
  return {p, std::sqrt(p * (1.0 - p) / replicates), replicates};
}

}  // namespace percdet
