#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robinlab/errors.hpp"

namespace robinlab {

/// Run configuration shared by all subcommands.  The text format is
/// line-based `key = value`; emit() followed by parse() is bit-exact.
struct RunConfig {
  std::string surface = "sphere";
  int n = 2;
  double volume = 12.566370614359172;  // 4 pi
  Eigen::Matrix2d basis = Eigen::Matrix2d::Identity();
  int truncation = 0;   // 0: default (64 sphere, 48 torus)
  int resolution = 0;   // 0: derived from truncation
  std::vector<double> eps_schedule = {0.2, 0.1, 0.05, 0.02, 0.01, 0.0};
  double tol = 1e-6;
  int budget = 400;
  std::uint64_t seed = 1;
  int samples = 200;
  std::string start = "uniform";  // uniform | random | file:PATH
  std::string out;

  int effective_truncation() const {
    if (truncation > 0) return truncation;
    return surface == "sphere" ? 64 : 48;
  }
  int effective_resolution() const {
    if (resolution > 0) return resolution;
    const int L = effective_truncation();
    return surface == "sphere" ? L : 2 * L + 2;
  }
};

/// Canonical text form (17 significant digits for every floating value).
std::string emit_config(const RunConfig& config);

/// Parse the text form; throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& text);

RunConfig load_config_file(const std::string& path);

}  // namespace robinlab
