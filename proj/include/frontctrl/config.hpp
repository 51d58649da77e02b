#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "frontctrl/reaction_models.hpp"

namespace frontctrl {

struct ModelConfig {
  std::string kind = "cubic";  // cubic | logistic | polynomial
  double a = 2.0 / 3.0;
  std::vector<double> coeffs;  // polynomial, ascending powers

  ReactionModel build() const;
};

struct NumericsConfig {
  unsigned threads = 0;        // 0 means all available cores
  std::size_t grid = 512;      // oracle lattice, nU = nP
  std::size_t n_quad = 16384;  // quadrature nodes for Stokes checks
  double tolerance = 0.02;     // relative oracle tolerance for verify
};

struct ProblemConfig {
  std::string kind = "p1";  // p1 | p2
  double c = 0.5;
};

struct EcurveConfig {
  double cmin = 0.25;
  double cmax = 10.0;
  std::size_t n = 40;
};

struct SimulateConfig {
  std::string dim = "1";            // 1 | strip | plane
  double T = 50.0;
  double dt = 0.01;
  double dx = 0.02;
  double x_lo = -40.0;
  double x_hi = 40.0;
  std::size_t ny = 10;
  std::string control = "none";     // none | p1 | p2
  double c = 0.5;
  double mass_factor = 1.0;
  double control_origin = -15.0;
  double front_x0 = 0.0;
  double trace_dt = 0.25;
  double eps = 0.1;                 // plane runs
  double radius = 2.0;              // plane runs: initial disc radius
  std::vector<double> snapshots;    // times of dense field dumps
};

struct SetConfig {
  std::string kind = "circle";  // circle | translating-disc | ellipse | csv
  double R0 = 2.0;
  double v = 0.5;
  double T = 1.0;
  double w = 0.0;
  double a0 = 2.5;
  double b0 = 2.0;
  std::size_t nt = 101;
  std::size_t nxi = 512;
  std::string file;
};

struct LimitConfig {
  std::size_t n = 200;
  double c1 = -1.0;  // negative: c2 - (c2 - c*) / 2
  double c2 = 0.5;
  double c3 = 0.5;
  std::size_t n_c = 1;
  std::vector<double> eps{0.1, 0.05, 0.025};
  double dx_factor = 0.25;
  double dt_factor = 0.1;
  double sample_dt = 0.05;
  bool additive = false;
};

struct RunConfig {
  ModelConfig model;
  NumericsConfig numerics;
  std::string output_dir = ".";
  ProblemConfig problem;
  EcurveConfig ecurve;
  SimulateConfig simulate;
  SetConfig set;
  LimitConfig limit;
};

/// Strict `section.key = value` parser; `#` starts a comment. Unknown keys,
/// repeated keys, type mismatches and range violations raise a config error
/// naming the line.
RunConfig parse_config(const std::string& text);

/// Applies one `section.key=value` override (command-line flags).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its default, one per line.
std::string config_reference();

}  // namespace frontctrl
