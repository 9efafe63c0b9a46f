#pragma once

// Run configuration: JSON parsing with field-level validation, canonical JSON
// output, integrand construction from a spec, and atomic file output.

#include <cstdint>
#include <string>
#include <vector>

#include "hhomog/homog.hpp"
#include "hhomog/stochastic.hpp"

namespace hhomog {

inline constexpr int kConfigSchema = 1;

struct CoefficientSpec {
  /// constant | checkerboard | cell_table | smooth_expr | random_tiles
  std::string type = "constant";
  double value = 1.0;
  double even = 1.0;
  double odd = 4.0;
  int divisions = 2;
  std::vector<double> values;
  std::string expr;
  double a_min = 1.0;
  double a_max = 1.0;
  ValueLaw law = ValueLaw::two_point(1.0, 4.0, 0.5);
  std::uint64_t seed = 1;
};

struct IntegrandSpec {
  /// power | matrix_p
  std::string type = "power";
  /// alpha for power, p for matrix_p.
  double exponent = 2.0;
  /// matrix_p: row-major 2n x 2n; empty means the identity.
  std::vector<double> matrix;
  CoefficientSpec coefficient;
};

struct QGridSpec {
  double lo = -2.0;
  double hi = 2.0;
  int points = 5;
};

struct StochasticSpec {
  ValueLaw law = ValueLaw::two_point(1.0, 4.0, 0.5);
  int n_samples = 16;
  std::uint64_t base_seed = 1;
  std::vector<int> k_list{1, 2, 3};
  double delta = 0.5;
};

struct OutputSpec {
  std::string path;  ///< empty: standard output
  std::string format = "csv";
};

struct RunConfig {
  int schema = kConfigSchema;
  /// verify | cell | effective | sweep | stochastic | ultimo | recover
  std::string command = "verify";
  IntegrandSpec integrand;
  std::vector<double> q{1.0, 0.0};
  std::vector<int> k_list{1, 2, 3, 4};
  double t = 2.0;
  double rho = 1.0;
  std::vector<double> rho_list{0.5, 0.25, 0.125};
  std::vector<double> x0;  ///< empty: origin
  int M = 4;
  int n = 1;
  QGridSpec q_grid;
  StochasticSpec stochastic;
  SolverConfig solver;
  OutputSpec output;
  int threads = 1;
};

/// Parses a JSON document; absent keys keep their defaults. Throws ConfigError
/// whose message starts with the offending field path.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Canonical JSON with every field present.
std::string to_json(const RunConfig& cfg);

/// Checks every numeric field against the preconditions of the modules the
/// command will call. Throws ConfigError naming the field.
void validate_run_config(const RunConfig& cfg);

Integrand build_integrand(const IntegrandSpec& spec, int n);

HorizontalVector to_horizontal(const std::vector<double>& v);
GroupPoint origin_or(const std::vector<double>& x0, int n);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace hhomog
