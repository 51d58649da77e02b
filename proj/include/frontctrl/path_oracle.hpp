#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "frontctrl/phase_plane.hpp"

namespace frontctrl {

enum class Functional { J0, J1 };

/// P as a function of U along a sampled orbit, cubic Hermite between samples
/// using the exact slope dP/dU = -c - f/P.
class OrbitFunction {
 public:
  OrbitFunction() = default;
  OrbitFunction(const ReactionModel& model, double c, std::vector<PhasePoint> pts);
  double operator()(double u) const;
  double u_lo() const { return pts_.front().U; }
  double u_hi() const { return pts_.back().U; }
  double sup() const;
  const std::vector<PhasePoint>& points() const { return pts_; }
  /// Samples with U in (u0, u1], preceded by the interpolated point at u0.
  std::vector<PhasePoint> slice(double u0, double u1) const;

 private:
  const ReactionModel* model_ = nullptr;
  double c_ = 0.0;
  std::vector<PhasePoint> pts_;
};

/// Right-limit evaluation P(u+) of an admissible path.
class PathEvaluator {
 public:
  PathEvaluator(const PhasePath& path, const ReactionModel& model, double c);
  double operator()(double u) const;

 private:
  struct Piece {
    double u0, u1, p0, p1, s0, s1;
    bool hermite;
  };
  std::vector<Piece> pieces_;
};

/// Sum of jump costs plus quadrature along Curve segments. Trajectory
/// segments cost nothing. J1 with a jump at U = 0 returns +infinity.
double path_cost(const PhasePath& path, const ReactionModel& model, double c, Functional fn);

struct StokesResult {
  double line_diff = 0.0;
  double area_diff = 0.0;
  double residual = 0.0;
  int crossings = 0;
};

/// Compares the cost difference of two admissible paths with the signed area
/// integral of the curl over the region between them.
StokesResult stokes_difference(const PhasePath& path1, const PhasePath& path2, const ReactionModel& model,
                               double c, Functional fn, std::size_t n_quad = 16384, int max_crossings = 64);

struct GridResult {
  double cost = 0.0;      // exact jump cost of the recovered admissible path
  double dp_value = 0.0;  // value of the discrete dynamic program
  double p_max = 0.0;
  PhasePath path;
};

/// Brute-force oracle on an nU x nP lattice: every column admits an upward
/// jump to any lattice value below the stable manifold of one (or onto it)
/// followed by the uncontrolled orbit to the next column.
GridResult grid_search(const ReactionModel& model, double c, Functional fn, std::size_t nU, std::size_t nP);

struct RandomPathOptions {
  int grid = 64;             // jump locations are multiples of 1/grid
  double jump_prob = 0.35;   // chance of a partial jump at each stop
  double min_start = 0.1;    // J1 paths follow the origin's orbit at least this far
  double end_by = 0.9;       // jump onto the stable manifold of one no later than this
};

/// Random admissible path from (0,0) to (1,0) made of orbits and upward jumps
/// at dyadic U. J1 paths follow the unstable manifold of the origin first.
PhasePath random_admissible_path(const ReactionModel& model, double c, Functional fn, std::mt19937_64& rng,
                                 const RandomPathOptions& opt = {});

}  // namespace frontctrl
