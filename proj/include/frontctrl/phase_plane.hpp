#pragma once

#include <array>
#include <functional>
#include <vector>

#include "frontctrl/ode.hpp"
#include "frontctrl/reaction_models.hpp"

namespace frontctrl {

struct PhasePoint {
  double U = 0.0;
  double P = 0.0;
};

enum class SegmentKind { Trajectory, VerticalJump, Curve };

/// Trajectory: solves the uncontrolled system. VerticalJump: constant U,
/// increasing P. Curve: any other monotone arc (controlled), costed by
/// quadrature along its polyline.
struct Segment {
  SegmentKind kind = SegmentKind::Trajectory;
  std::vector<PhasePoint> points;
  std::vector<double> x;  // physical coordinate of each point; empty if unknown
};

struct PhasePath {
  double c = 0.0;
  std::vector<Segment> segments;

  PhasePoint front() const { return segments.front().points.front(); }
  PhasePoint back() const { return segments.back().points.back(); }
  /// Appends a vertical jump from the current end point up to p_top.
  void jump_to(double p_top);
  /// Every point of every segment, in order (duplicates at joins kept).
  std::vector<PhasePoint> points() const;
};

struct Eigenstructure {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  std::array<double, 2> eigvec_plus{1.0, 0.0};
  std::array<double, 2> eigvec_minus{1.0, 0.0};
  bool complex = false;  // discriminant negative; lambdas hold the real part
  double imag = 0.0;
};

Eigenstructure eigen_at(const ReactionModel& model, double c, double U);

enum class Equilibrium { Origin, One };

struct StopCondition {
  enum class Kind { PZero, UTarget, Curve, ArcLength };
  Kind kind = Kind::PZero;
  double u_target = 0.0;
  std::function<double(double)> curve;  // P*(U), evaluated on [curve_lo, curve_hi]
  double curve_lo = 0.0, curve_hi = 1.0;
  double arc_cap = 0.0;

  static StopCondition p_zero();
  static StopCondition at_u(double target);
  static StopCondition at_curve(std::function<double(double)> curve, double lo, double hi);
  static StopCondition arc_length(double cap);
};

enum class StopReason { PZero, UTarget, Curve, Cap, Converged };

struct ManifoldOptions {
  double delta0 = 1e-6;
  OdeOptions ode;
  /// Optional companion quantity integrated alongside (forward-x derivative).
  AuxRhs aux;
  double aux0 = 0.0;
};

struct Manifold {
  PhasePath path;          // single Trajectory segment, U increasing
  StopReason reason = StopReason::Cap;
  PhasePoint end;          // terminal point of the integration
  double x_end = 0.0;      // x at the terminal point
  std::vector<double> aux; // companion values aligned with path points
};

/// Launches along the unstable direction of the Origin (forward in x) or
/// the stable direction of One (backward in x).
Manifold integrate_manifold(const ReactionModel& model, double c, Equilibrium eq,
                            const StopCondition& until, const ManifoldOptions& opt = {});

/// A-priori bound on |P| used for blow-up detection.
double p_bound(const ReactionModel& model, double c);

/// Signed vertical gap at u*: stable(One) minus unstable(Origin).
double manifold_gap(const ReactionModel& model, double c, const ManifoldOptions& opt = {});

double find_cstar(const ReactionModel& model);

/// -sign of the integral of f over [0,1]; 0 when it vanishes to 1e-12.
int wave_speed_sign(const ReactionModel& model);

double integral_f(const ReactionModel& model, double lo = 0.0, double hi = 1.0);

}  // namespace frontctrl
