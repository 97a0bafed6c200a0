#include "percdet/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "percdet/detect.hpp"
#include "percdet/perclab.hpp"
#include "percdet/pgm.hpp"

namespace percdet::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

uint64_t fnv1a(const std::string& text) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string config_fingerprint(const RunConfig& c) {
  std::ostringstream out;
  out << "command=" << c.command << "\ninput=" << c.input << "\nnoise=" << c.noise
      << "\nsigma=" << c.sigma << "\nr=" << c.r << "\nn=" << c.n << "\nbaseline=" << c.baseline
      << "\ntau0=" << (c.tau0 ? std::to_string(*c.tau0) : "auto") << "\nphi_mode=" << c.phi_mode
      << "\nalpha=" << c.alpha << "\nk0_factor=" << c.k0_factor
      << "\nreplicates=" << c.replicates << "\ncalibration_replicates=" << c.calibration_replicates
      << "\nseed=" << c.seed << "\ntau=" << c.tau
      << "\nrho=" << (c.rho ? std::to_string(*c.rho) : "none") << "\nns=";
  for (int32_t n : c.ns) out << n << ",";
  out << "\nps=";
  for (double p : c.ps) out << p << ",";
  out << "\nperclab_mode=" << c.perclab_mode << "\nprobe=" << c.probe
      << "\nsquare_side=" << c.square_side << "\nintensity=" << c.intensity
      << "\nside_divisor=" << c.side_divisor << "\npgm_format=" << c.pgm_format
      << "\nallow_supercritical=" << c.allow_supercritical;
  return out.str();
}

json base_report(const RunConfig& config) {
  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = config.command;
  report["seed"] = config.seed;
  report["config_hash"] = fnv1a(config_fingerprint(config));
  return report;
}

void write_json(const json& document, const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << document.dump(2) << "\n";
}

json uncertainty_json(const UncertaintyReport& report) {
  return json{{"rho", report.rho},
              {"n", report.side_length},
              {"lhs", report.lhs},
              {"rhs", report.rhs},
              {"detectable", report.detectable},
              {"s_max", report.sufficient_constant},
              {"weak_bound_M", report.weak_bound_M}};
}

const char* side_name(int64_t t_plus, int64_t t_minus) {
  if (t_plus > t_minus) return "plus";
  if (t_minus > t_plus) return "minus";
  return "both";
}

int run_detect(const RunConfig& config, json& report) {
  const NoiseModel model = NoiseModel::parse(config.noise);
  if (config.input.empty()) throw std::invalid_argument("detect requires --input <file.pgm>");
  const GrayscaleImage pgm = load_pgm(config.input);
  const ObservedImage observed =
      image_to_observed(pgm, config.r, config.baseline, config.n, config.sigma);

  report["mode"] = config.phi_mode;
  report["n"] = config.n;
  report["r"] = config.r;
  report["sigma"] = config.sigma;
  report["noise"] = model.descriptor();

  // Uncertainty floor for the threshold schedule.
  const double tau0_auto = tau0_from_uncertainty(model, config.sigma, config.n);
  const double rho_floor = tau0_auto / config.sigma;
  report["uncertainty"] = uncertainty_json(uncertainty_check(model, rho_floor, config.n));
  report["uncertainty"]["tau0_auto"] = tau0_auto;
  double tau0 = tau0_auto;
  if (config.tau0) {
    tau0 = *config.tau0;
    if (!(tau0 > 0.0 && tau0 < config.r))
      throw std::invalid_argument("--tau0 must lie in (0, r)");
  } else if (!(tau0 < config.r)) {
    // No feasible threshold: every schedule point sits below the uncertainty
    // floor, so the test cannot ever reject.
    report["decision"] = "undetectable";
    report["reason"] = "uncertainty floor tau0 >= detector range r";
    report["tau0"] = tau0;
    write_json(report, fs::path(config.out_dir) / "detection_report.json");
    return 2;
  }
  report["tau0"] = tau0;

  const int k_max_forecast = static_cast<int>(std::min<int64_t>(
      static_cast<int64_t>(std::ceil(std::log2(config.r / tau0) - 1e-12)), config.n));

  PhiProvider provider;
  const bool theory = config.phi_mode == "theory";
  std::map<int, double> k0_used;
  if (theory) {
    // phi_k from the closed-form constant at the per-threshold error
    // probability p_E = P(eps >= a_k / sigma).
    provider = [&](int k, double a_k, double) {
      const double p_error = 1.0 - model.cdf(a_k / config.sigma);
      const PhiTheory ph = phi_theory(config.n, p_error, config.k0_factor);
      k0_used[k] = ph.K0;
      return ph.phi;
    };
    // If the threshold exceeds the site count at every scheduled a_k, the
    // null hypothesis can never be rejected.
    bool any_feasible = false;
    for (int k = 1; k <= k_max_forecast; ++k) {
      const double a_k = std::ldexp(config.r, -k);
      const double p_error = 1.0 - model.cdf(a_k / config.sigma);
      if (phi_theory(config.n, p_error, config.k0_factor).phi <=
          static_cast<double>(config.n) * config.n) {
        any_feasible = true;
        break;
      }
    }
    if (!any_feasible) {
      report["decision"] = "undetectable";
      report["reason"] = "phi(N) exceeds the site count N^2 at every scheduled threshold";
      write_json(report, fs::path(config.out_dir) / "detection_report.json");
      return 2;
    }
  } else if (config.phi_mode == "calibrated") {
    auto cache = std::make_shared<std::map<int, double>>();
    const RunConfig& c = config;
    const NoiseModel m = model;
    provider = [&c, m, cache](int k, double a_k, double level) {
      const auto found = cache->find(k);
      if (found != cache->end()) return found->second;
      const double phi = calibrate_phi(c.n, a_k, m, c.sigma, level, c.calibration_replicates,
                                       derive_seed(c.seed, 0xca1u + static_cast<uint64_t>(k)),
                                       c.workers)
                             .phi;
      (*cache)[k] = phi;
      return phi;
    };
  } else {
    throw std::invalid_argument("--phi-mode must be 'theory' or 'calibrated'");
  }

  const MultiTestResult result =
      multi_test(observed, config.r, tau0, provider, LevelAdjust::bonferroni, config.alpha);

  report["decision"] = result.overall_reject ? "reject" : "accept";
  report["k_max"] = result.k_max;
  report["per_test_level"] = result.per_test_level;
  if (result.first_rejecting_k > 0) report["first_rejecting_k"] = result.first_rejecting_k;
  // The deciding entry is the rejecting one, or else the tested entry with
  // the largest statistic.
  const MultiTestDecision* deciding = nullptr;
  json schedule = json::array();
  for (const auto& d : result.decisions) {
    json entry{{"k", d.k},           {"a", d.a_k},
               {"t_plus", d.t_plus}, {"t_minus", d.t_minus},
               {"tested", d.tested}, {"skipped_crossing", d.skipped_crossing},
               {"reject", d.reject}};
    if (d.tested) {
      entry["phi"] = d.phi;
      if (theory && k0_used.count(d.k)) entry["K0"] = k0_used[d.k];
      if (d.reject || deciding == nullptr ||
          std::max(d.t_plus, d.t_minus) > std::max(deciding->t_plus, deciding->t_minus)) {
        if (deciding == nullptr || !deciding->reject) deciding = &d;
      }
    }
    schedule.push_back(entry);
  }
  report["schedule"] = schedule;
  if (deciding != nullptr) {
    report["statistic"] = std::max(deciding->t_plus, deciding->t_minus);
    report["phi"] = deciding->phi;
    report["side"] = side_name(deciding->t_plus, deciding->t_minus);
    if (theory && k0_used.count(deciding->k)) report["K0"] = k0_used[deciding->k];
  } else {
    // Every threshold was skipped as uninformative.
    report["statistic"] = 0;
    report["phi"] = 0.0;
    report["side"] = "both";
  }
  write_json(report, fs::path(config.out_dir) / "detection_report.json");
  return 0;
}

int run_simulate(const RunConfig& config, json& report) {
  const NoiseModel model = NoiseModel::parse(config.noise);
  const DiscretizedPicture picture =
      square_picture(config.n, config.square_side, config.intensity);
  const ObservedImage noisy = apply_noise(picture, config.sigma, model, config.seed);
  const ObservedImage truncated = detector_truncate(noisy, DetectorDevice{config.r});
  const GrayscaleImage pgm = observed_to_pgm(truncated, config.r, 255);
  const fs::path pgm_path = fs::path(config.out_dir) / "simulated.pgm";
  fs::create_directories(config.out_dir);
  write_pgm(pgm, pgm_path.string(), config.pgm_format != "plain");
  report["pgm"] = pgm_path.string();
  report["n"] = config.n;
  report["square_side"] = config.square_side;
  report["intensity"] = config.intensity;
  report["sigma"] = config.sigma;
  report["r"] = config.r;
  report["noise"] = model.descriptor();
  report["maxval"] = 255;
  report["signal_present"] = config.square_side > 0 && config.intensity != 0.0;
  write_json(report, fs::path(config.out_dir) / "simulation.json");
  return 0;
}

int run_calibrate(const RunConfig& config, json& report) {
  const NoiseModel model = NoiseModel::parse(config.noise);
  const CalibrationEntry entry =
      calibrate_phi(config.n, config.tau, model, config.sigma, config.alpha, config.replicates,
                    config.seed, config.workers);
  report["n"] = entry.side_length;
  report["family"] = entry.family;
  report["params"] = entry.noise_descriptor;
  report["sigma"] = entry.sigma;
  report["tau"] = entry.tau;
  report["replicates"] = entry.replicates;
  report["quantiles"] = json::array({json{{"alpha", entry.alpha}, {"phi", entry.phi}}});
  report["low_resolution_warning"] = entry.low_resolution_warning;
  write_json(report, fs::path(config.out_dir) / "calibration_table.json");
  return 0;
}

int run_uncertainty(const RunConfig& config, json& report) {
  const NoiseModel model = NoiseModel::parse(config.noise);
  report["n"] = config.n;
  report["never_reject_bound"] = never_reject_bound(config.n);
  report["s_max"] = s_max();
  if (model.has_density() && model.density(0.0) > 0.0)
    report["weak_rho_min"] = weak_uncertainty_bound(model, config.n);
  const double tau0 = tau0_from_uncertainty(model, config.sigma, config.n);
  report["tau0"] = tau0;
  report["sigma"] = config.sigma;
  if (config.rho) report["check"] = uncertainty_json(uncertainty_check(model, *config.rho, config.n));
  write_json(report, fs::path(config.out_dir) / "uncertainty.json");
  return 0;
}

int run_errors(const RunConfig& config, json& report) {
  const NoiseModel model = NoiseModel::parse(config.noise);
  PhiSpec phi_spec;
  if (config.phi_mode == "theory") {
    phi_spec.mode = PhiMode::theory;
    const double p_error = 1.0 - model.cdf(config.tau / config.sigma);
    phi_spec.K0 = phi_theory(config.ns.front(), p_error, config.k0_factor).K0;
  } else {
    phi_spec.mode = PhiMode::calibrated;
    phi_spec.alpha_target = config.alpha;
    phi_spec.calibration_replicates = config.calibration_replicates;
  }
  const ErrorRateFit fit = estimate_error_rates(
      config.ns, SignalSpec{config.side_divisor, config.intensity}, model, config.sigma,
      config.tau, phi_spec, config.replicates, config.seed, config.workers);

  fs::create_directories(config.out_dir);
  const fs::path csv_path = fs::path(config.out_dir) / "error_rates.csv";
  std::ofstream csv(csv_path);
  csv << "# seed=" << config.seed << " noise=" << model.descriptor() << " sigma=" << config.sigma
      << " tau=" << config.tau << " phi_mode=" << config.phi_mode
      << " replicates=" << config.replicates << "\n";
  csv << "n,phi,square_side,alpha_hat,alpha_censored,beta_hat,beta_censored\n";
  json points = json::array();
  for (const auto& pt : fit.points) {
    csv << pt.side_length << "," << pt.phi << "," << pt.square_side << "," << pt.alpha_hat << ","
        << pt.alpha_censored << "," << pt.beta_hat << "," << pt.beta_censored << "\n";
    points.push_back(json{{"n", pt.side_length},
                          {"phi", pt.phi},
                          {"square_side", pt.square_side},
                          {"alpha_hat", pt.alpha_hat},
                          {"alpha_censored", pt.alpha_censored},
                          {"beta_hat", pt.beta_hat},
                          {"beta_censored", pt.beta_censored}});
  }
  report["points"] = points;
  report["alpha_slope"] = fit.alpha_slope;
  report["beta_slope"] = fit.beta_slope;
  report["alpha_r2"] = fit.alpha_r2;
  report["beta_r2"] = fit.beta_r2;
  report["alpha_nonincreasing"] = fit.alpha_nonincreasing;
  report["beta_nonincreasing"] = fit.beta_nonincreasing;
  report["beta_flagged"] = fit.beta_flagged;
  report["csv"] = csv_path.string();
  write_json(report, fs::path(config.out_dir) / "error_rates.json");
  return 0;
}

int run_perclab(const RunConfig& config, json& report) {
  fs::create_directories(config.out_dir);
  if (config.perclab_mode == "stats") {
    json entries = json::array();
    for (size_t pi = 0; pi < config.ps.size(); ++pi) {
      const double p = config.ps[pi];
      const ClusterStats stats = estimate_cluster_stats(
          config.n, p, config.replicates, derive_seed(config.seed, pi), config.allow_supercritical,
          config.workers);
      std::ostringstream name;
      name << "tail_p" << p << ".csv";
      const fs::path csv_path = fs::path(config.out_dir) / name.str();
      std::ofstream csv(csv_path);
      csv << "# seed=" << config.seed << " n=" << config.n << " p=" << p
          << " replicates=" << config.replicates << "\n";
      csv << "n,tail\n";
      for (size_t i = 0; i < stats.tail.size(); ++i) csv << (i + 1) << "," << stats.tail[i] << "\n";
      json entry{{"p", p},
                 {"n", config.n},
                 {"replicates", stats.replicates},
                 {"chi_hat", stats.chi_hat},
                 {"chi_se", stats.chi_se},
                 {"lambda_hat", stats.lambda_hat},
                 {"lambda_se", stats.lambda_se},
                 {"degenerate", stats.degenerate},
                 {"supercritical", stats.supercritical},
                 {"tail_csv", csv_path.string()}};
      if (!stats.supercritical && !stats.degenerate) {
        const LambdaBoundReport bounds = verify_lambda_bound(stats);
        entry["bounds"] = json{{"geometric_sum_bound", bounds.geometric_sum_bound},
                               {"definitional_ok", bounds.definitional_ok},
                               {"log_bound", bounds.log_bound},
                               {"lambda_within_log_bound", bounds.lambda_within_log_bound},
                               {"lambda_margin", bounds.lambda_margin},
                               {"chi_bound", bounds.chi_bound},
                               {"chi_above_lower_bound", bounds.chi_above_lower_bound},
                               {"chi_below_upper_bound", bounds.chi_below_upper_bound}};
      }
      entries.push_back(entry);
    }
    report["stats"] = entries;
  } else if (config.perclab_mode == "crossing") {
    const fs::path csv_path = fs::path(config.out_dir) / "crossing.csv";
    std::ofstream csv(csv_path);
    csv << "# seed=" << config.seed << " n=" << config.n
        << " replicates=" << config.replicates << "\n";
    csv << "p,frequency\n";
    json entries = json::array();
    for (size_t pi = 0; pi < config.ps.size(); ++pi) {
      const double p = config.ps[pi];
      int crossings = 0;
      for (int i = 0; i < config.replicates; ++i) {
        const PercolationSample sample = sample_configuration(
            config.n, p, derive_seed(config.seed, pi * 1000003ULL + static_cast<uint64_t>(i)));
        crossings += crossing_cluster_exists(sample.mask) ? 1 : 0;
      }
      const double freq = static_cast<double>(crossings) / config.replicates;
      csv << p << "," << freq << "\n";
      entries.push_back(json{{"p", p}, {"frequency", freq}});
    }
    report["crossing"] = entries;
    report["csv"] = csv_path.string();
  } else if (config.perclab_mode == "complexity") {
    const ComplexityTable table = complexity_probe(
        config.ns, config.probe == "multi" ? ProbeMode::multi : ProbeMode::single, config.seed);
    const fs::path csv_path = fs::path(config.out_dir) / "complexity.csv";
    std::ofstream csv(csv_path);
    csv << "# seed=" << config.seed << " probe=" << config.probe << "\n";
    csv << "n,seconds,op_count\n";
    json rows = json::array();
    for (const auto& row : table.rows) {
      csv << row.side_length << "," << row.seconds << "," << row.op_count << "\n";
      rows.push_back(json{
          {"n", row.side_length}, {"seconds", row.seconds}, {"op_count", row.op_count}});
    }
    report["rows"] = rows;
    report["loglog_slope"] = table.loglog_slope;
    report["slope_defined"] = table.slope_defined;
    report["csv"] = csv_path.string();
  } else {
    throw std::invalid_argument("perclab --mode must be stats, crossing or complexity");
  }
  write_json(report, fs::path(config.out_dir) / "perclab.json");
  return 0;
}

}  // namespace

int run(const RunConfig& config) {
  json report = base_report(config);
  try {
    if (config.command == "detect") return run_detect(config, report);
    if (config.command == "simulate") return run_simulate(config, report);
    if (config.command == "calibrate") return run_calibrate(config, report);
    if (config.command == "uncertainty") return run_uncertainty(config, report);
    if (config.command == "errors") return run_errors(config, report);
    if (config.command == "perclab") return run_perclab(config, report);
    throw std::invalid_argument("unknown command: " + config.command);
  } catch (const std::exception& error) {
    json failure = base_report(config);
    failure["error"] = error.what();
    try {
      write_json(failure, fs::path(config.out_dir) / "error.json");
    } catch (const std::exception&) {
      // The error report is best-effort; the message still goes to stderr.
    }
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
}

namespace {

void add_common_options(CLI::App* cmd, RunConfig& config, std::string& config_path) {
  cmd->add_option("--config", config_path,
                  "plain key=value file mirroring the flags (flags take precedence)");
  cmd->add_option("--n", config.n, "lattice side length N");
  cmd->add_option("--sigma", config.sigma, "noise scale sigma");
  cmd->add_option("--noise", config.noise,
                  "noise descriptor: gaussian | laplace | uniform | student_t:nu=V | "
                  "discrete:support=..;weights=..");
  cmd->add_option("--r", config.r, "detector range r");
  cmd->add_option("--alpha", config.alpha, "target test level alpha");
  cmd->add_option("--replicates", config.replicates, "Monte Carlo replicates");
  cmd->add_option("--seed", config.seed, "base random seed");
  cmd->add_option("--out", config.out_dir, "output directory");
  cmd->add_option("--workers", config.workers, "worker threads (never changes results)");
}

template <class T>
std::vector<T> parse_number_list(const std::string& text) {
  std::vector<T> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if constexpr (std::is_integral_v<T>)
      values.push_back(static_cast<T>(std::stoll(item)));
    else
      values.push_back(static_cast<T>(std::stod(item)));
  }
  return values;
}

// Applies key=value lines from a config file to every field whose flag was
// not given explicitly. Keys are the long flag names without the leading
// dashes; '#' starts a comment.
void apply_config_file(const std::string& path, const CLI::App* cmd, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  const auto overridden = [&](const std::string& flag) {
    return cmd->get_option_no_throw(flag) != nullptr && cmd->count(flag) > 0;
  };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    const std::string flag = "--" + key;
    if (cmd->get_option_no_throw(flag) == nullptr)
      throw std::runtime_error("config key '" + key + "' is not a flag of " + cmd->get_name());
    if (overridden(flag)) continue;
    if (key == "n") config.n = static_cast<int32_t>(std::stol(value));
    else if (key == "sigma") config.sigma = std::stod(value);
    else if (key == "noise") config.noise = value;
    else if (key == "r") config.r = std::stod(value);
    else if (key == "alpha") config.alpha = std::stod(value);
    else if (key == "replicates") config.replicates = std::stoi(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "out") config.out_dir = value;
    else if (key == "workers") config.workers = std::stoi(value);
    else if (key == "input") config.input = value;
    else if (key == "baseline") config.baseline = std::stod(value);
    else if (key == "tau0") config.tau0 = std::stod(value);
    else if (key == "phi-mode") config.phi_mode = value;
    else if (key == "k0-factor") config.k0_factor = std::stod(value);
    else if (key == "calibration-replicates") config.calibration_replicates = std::stoi(value);
    else if (key == "tau") config.tau = std::stod(value);
    else if (key == "rho") config.rho = std::stod(value);
    else if (key == "ns") config.ns = parse_number_list<int32_t>(value);
    else if (key == "p") config.ps = parse_number_list<double>(value);
    else if (key == "mode") config.perclab_mode = value;
    else if (key == "probe") config.probe = value;
    else if (key == "square-side") config.square_side = static_cast<int32_t>(std::stol(value));
    else if (key == "intensity") config.intensity = std::stod(value);
    else if (key == "side-divisor") config.side_divisor = std::stoi(value);
    else if (key == "pgm-format") config.pgm_format = value;
    else if (key == "allow-supercritical")
      config.allow_supercritical = value == "1" || value == "true";
    else if (key == "config")
      throw std::runtime_error("config files cannot nest");
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"percdet: detection of grayscale objects in noisy images via percolation "
               "cluster tests on triangular lattices"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  RunConfig config;
  std::string config_path;

  auto* detect = app.add_subcommand("detect", "multi-threshold detection on a PGM image");
  add_common_options(detect, config, config_path);
  detect->add_option("--input", config.input, "input PGM (P2 or P5)");
  detect->add_option("--baseline", config.baseline, "pixel value mapped to intensity 0");
  detect->add_option("--tau0", config.tau0,
                     "threshold floor (default: from the uncertainty bound)");
  detect->add_option("--phi-mode", config.phi_mode, "theory | calibrated");
  detect->add_option("--k0-factor", config.k0_factor, "numerator of the theory constant K0");
  detect->add_option("--calibration-replicates", config.calibration_replicates,
                     "replicates per calibrated threshold");

  auto* simulate = app.add_subcommand("simulate", "write a synthetic noisy PGM and its truth");
  add_common_options(simulate, config, config_path);
  simulate->add_option("--square-side", config.square_side, "signal square side (0 for null)");
  simulate->add_option("--intensity", config.intensity, "signal intensity");
  simulate->add_option("--pgm-format", config.pgm_format, "binary | plain");

  auto* calibrate = app.add_subcommand("calibrate", "estimate the null quantile phi");
  add_common_options(calibrate, config, config_path);
  calibrate->add_option("--tau", config.tau, "level-set threshold tau");

  auto* uncertainty = app.add_subcommand("uncertainty", "evaluate the detectability bounds");
  add_common_options(uncertainty, config, config_path);
  uncertainty->add_option("--rho", config.rho, "signal-to-noise ratio to check");

  auto* errors = app.add_subcommand("errors", "empirical error-rate decay across lattice sizes");
  add_common_options(errors, config, config_path);
  errors->add_option("--ns", config.ns, "lattice sides")->delimiter(',');
  errors->add_option("--tau", config.tau, "level-set threshold tau");
  errors->add_option("--phi-mode", config.phi_mode, "theory | calibrated");
  errors->add_option("--k0-factor", config.k0_factor, "numerator of the theory constant K0");
  errors->add_option("--side-divisor", config.side_divisor, "signal square side = N / divisor");
  errors->add_option("--intensity", config.intensity, "signal intensity");
  errors->add_option("--calibration-replicates", config.calibration_replicates,
                     "replicates per calibration");

  auto* perclab = app.add_subcommand("perclab", "percolation Monte Carlo laboratory");
  add_common_options(perclab, config, config_path);
  perclab->add_option("--p", config.ps, "occupation probabilities")->delimiter(',');
  perclab->add_option("--mode", config.perclab_mode, "stats | crossing | complexity");
  perclab->add_option("--probe", config.probe, "complexity probe: single | multi");
  perclab->add_option("--ns", config.ns, "lattice sides (complexity mode)")->delimiter(',');
  perclab->add_flag("--allow-supercritical", config.allow_supercritical,
                    "permit p >= 1/2 in stats mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const CLI::App* sub = app.get_subcommands().front();
  config.command = sub->get_name();
  if (!config_path.empty()) {
    try {
      apply_config_file(config_path, sub, config);
    } catch (const std::exception& error) {
      std::fprintf(stderr, "error: %s\n", error.what());
      return 1;
    }
  }
  return run(config);
}

}  // namespace percdet::cli
