#pragma once

#include <limits>
#include <vector>

#include "frontctrl/phase_plane.hpp"
#include "frontctrl/reaction_models.hpp"

namespace frontctrl {

struct Atom {
  double x = 0.0;
  double mass = 0.0;
  double U = 0.0;  // profile value at the atom
};

struct ControlMeasure {
  std::vector<Atom> atoms;
  std::vector<double> density_x;  // sample locations
  std::vector<double> density;    // mu per unit x at density_x
  double total_J0 = 0.0;
  double total_J1 = 0.0;

  /// Density at x by linear interpolation, 0 outside the sampled range.
  double density_at(double x) const;
};

struct TravelingProfile {
  double c = 0.0;
  std::vector<double> x;  // nondecreasing; a repeated x marks a jump in P
  std::vector<double> U;
  std::vector<double> P;
  std::vector<double> alpha;  // multiplicative-coupling density mu_x / U
  ControlMeasure control;
  PhasePath phase_path;
  double left_rate = 0.0;   // U ~ U0 exp(left_rate (x - x0)) to the left; 0 means U = 0
  double right_rate = 0.0;  // 1 - U ~ exp(right_rate (x - x1)) to the right (rate < 0)
  double u_minus = std::numeric_limits<double>::quiet_NaN();
  double u_plus = std::numeric_limits<double>::quiet_NaN();

  double U_at(double x) const;
  double alpha_at(double x) const;
};

TravelingProfile solve_P1(const ReactionModel& model, double c);
TravelingProfile solve_P2(const ReactionModel& model, double c);

/// The finite-cost J0-optimal path of a bistable model, admissible for J1.
PhasePath fallback_path(const ReactionModel& model, double c);

/// z*(u) = (3f + u f') / (2 sqrt(u f)) + c, control per unit U on the P* arc.
double z_star(const ReactionModel& model, double c, double u);
double p_star(const ReactionModel& model, double u);

struct ArcEnds {
  double u_minus = 0.0;
  double u_plus = 0.0;
};
/// Crossings of the manifolds with P*; u_minus >= u_plus signals c <= c*.
ArcEnds arc_ends(const ReactionModel& model, double c);

/// E(c) for given arc ends: integral of z*/u over [u_minus, u_plus].
double effort_integral(const ReactionModel& model, double c, double u_minus, double u_plus);
/// Integral of z* over [u_minus, u_plus] (the J0 mass of the P2 control).
double mass_integral(const ReactionModel& model, double c, double u_minus, double u_plus);

struct ECurveSample {
  double c = 0.0;
  double E = 0.0;
  double u_minus = 0.0;
  double u_plus = 0.0;
};

struct ECurve {
  std::vector<ECurveSample> samples;
  double c_star = 0.0;
  double u_bar = 0.0;

  /// Monotone (PCHIP) interpolation; 0 at or below c*.
  double E_at(double c) const;
  double c_max() const { return samples.empty() ? c_star : samples.back().c; }
};

ECurve compute_ecurve(const ReactionModel& model, const std::vector<double>& c_values,
                      unsigned threads = 1);

struct SlopeReport {
  double slope = 0.0;
  double c_star = 0.0;
  double u_bar = 0.0;
  double y_minus = 0.0;
  double y_plus = 0.0;
  std::vector<double> U_minus, Y_minus;  // samples of Y- along the heteroclinic
  std::vector<double> U_plus, Y_plus;    // samples of Y+
};

SlopeReport ecurve_slope_at_cstar(const ReactionModel& model);

struct CostCurvePoint {
  double c = 0.0;
  double C_min = 0.0;
};

std::vector<CostCurvePoint> p1_cost_curve(const ReactionModel& model, const std::vector<double>& c_values);

}  // namespace frontctrl
