#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace percdet::cli {

// Everything the subcommands need; populated from flags or a key=value
// config file. The seed and a hash of this config are embedded in every
// output so runs can be replayed byte-identically.
struct RunConfig {
  std::string command;
  std::string input;
  std::string out_dir = ".";
  std::string noise = "gaussian";
  double sigma = 1.0;
  double r = 1.0;
  int32_t n = 64;
  double baseline = 0.0;  // <= 0 selects maxval/2
  std::optional<double> tau0;
  std::string phi_mode = "calibrated";  // "theory" | "calibrated"
  double alpha = 0.05;
  double k0_factor = 2.0;
  int replicates = 1000;
  int calibration_replicates = 1000;
  uint64_t seed = 1;
  int workers = 1;
  double tau = 0.5;
  std::optional<double> rho;
  std::vector<int32_t> ns = {32, 64, 128};
  std::vector<double> ps = {0.3};
  std::string perclab_mode = "stats";  // "stats" | "crossing" | "complexity"
  std::string probe = "single";        // complexity probe mode
  int32_t square_side = 16;
  double intensity = 1.0;
  int side_divisor = 4;
  std::string pgm_format = "binary";  // "binary" | "plain"
  bool allow_supercritical = false;
};

// Exit status: 0 success, 1 error, 2 detection impossible per the
// uncertainty bound.
int run(const RunConfig& config);

// Parses argv into a RunConfig and dispatches. Used by the percdet binary.
int run_cli(int argc, const char* const* argv);

}  // namespace percdet::cli
