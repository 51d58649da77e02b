#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "frontctrl/optimal_control.hpp"
#include "frontctrl/pde_sim.hpp"
#include "frontctrl/reaction_models.hpp"

namespace frontctrl {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Boundary of Omega(t) sampled on a tensor grid: t_grid x uniform xi_k = k / n_xi,
/// counterclockwise. u is close to 1 inside Omega.
struct MovingSet {
  std::vector<double> t_grid;
  std::size_t n_xi = 0;
  std::vector<std::vector<Vec2>> x;  // [t][k]

  /// Fills the derivatives and checks the invariants.
  void finalize();
  std::vector<std::vector<Vec2>> x_xi, x_xixi, x_t;

  double t_begin() const { return t_grid.front(); }
  double t_end() const { return t_grid.back(); }

  static MovingSet circle(double R0, double v, double T, std::size_t nt = 101, std::size_t n_xi = 512);
  static MovingSet translating_disc(double R, double w, double T, std::size_t nt = 101, std::size_t n_xi = 512);
  static MovingSet ellipse(double a0, double b0, double v, double T, std::size_t nt = 101, std::size_t n_xi = 512);
  /// Rows `t, xi, x1, x2` (header optional) on a tensor grid.
  static MovingSet from_csv(const std::string& text);
};

/// Geometry of the boundary at one time.
struct BoundaryFrame {
  double t = 0.0;
  std::vector<Vec2> x, normal;        // inward unit normal
  std::vector<double> beta;           // normal velocity, > 0 when Omega shrinks
  std::vector<double> speed;          // |x_xi|
  std::vector<double> curvature;      // > 0 where the boundary is convex
  double area = 0.0;                  // shoelace
};

/// Frame at any t in [t_begin, t_end] (cubic Hermite in t).
BoundaryFrame frame_at(const MovingSet& ms, double t);

struct NormalData {
  std::vector<std::vector<Vec2>> n;
  std::vector<std::vector<double>> beta;
};

NormalData normal_data(const MovingSet& ms);

double instantaneous_effort(const MovingSet& ms, const ECurve& ecurve, double t);
double total_cost(const MovingSet& ms, const ECurve& ecurve, const EffortCostFunction& cost);

/// Annulus {x + y n : -h_out <= y <= h_in} area by polygon offsets, and by the
/// first-order Jacobian |x_xi| (h_in + h_out).
double annulus_area_offsets(const BoundaryFrame& fr, double h_in, double h_out);
double annulus_area_jacobian(const BoundaryFrame& fr, double h_in, double h_out);

/// Lower profile: uncontrolled orbit at speed c1 from (0, p_n) to (1 - 1/n, 0).
struct LowerProfile {
  double c1 = 0.0;
  double p_n = 0.0;
  double a = 0.0, b = 0.0;  // U(a) = 0, U(b) = 1 - 1/n, U(0) = u*
  std::vector<double> y, U, P;
  double value(double y) const;
};

/// Upper profile at speed c: orbit from (1/n, 0), the P* arc, orbit into (1, 1/n).
struct UpperProfile {
  double c = 0.0;
  double a = 0.0, b = 0.0;  // V(a) = 1/n, V(b) = 1, V(0) = u*
  double u_minus = 0.0, u_plus = 0.0;
  double effort = 0.0;      // integral of alpha over y
  double arc_lo = 0.0, arc_hi = 0.0;  // y-range of the P* arc, where alpha > 0
  std::vector<double> y, V, P, alpha;
  double value(double y) const;
  double alpha_at(double y) const;
};

struct ProfileBank {
  std::size_t n = 50;
  double c_star = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
  LowerProfile lower;
  std::vector<UpperProfile> upper;  // uniform in c over [c2, c3]
  double lower_offset = 0.0;        // inward shift keeping the lower profile below every upper one

  double lower_width() const { return lower.b - lower.a; }
  double upper_width() const;  // max over c
  /// Inward reach (largest b#, or lower offset plus width) and outward reach (largest -a#).
  double reach_in() const;
  double reach_out() const;
  /// Upper profile at speed c (clamped to [c2, c3]), linear in c between samples.
  double V(double c, double y) const;
  double alpha(double c, double y) const;
  /// Placed lower profile: 0 below lower_offset, then U from a.
  double U(double y) const;
};
/// c1 defaults to c2 - (c2 - c*) / 2.
ProfileBank build_profile_bank(const ReactionModel& model, std::size_t n, double c2, double c3,
                               std::size_t n_c_samples, double c1 = -1.0);

/// Lower/upper fields and the region mask at one time.
struct ControlFields {
  double t = 0.0;
  std::vector<double> u_lower;
  std::vector<double> u_upper;  // min(rescaled V, phi)
  std::vector<unsigned char> inside;
};

/// Places the rescaled profiles across the boundary of Omega(t) on a plane grid.
/// y is the inward distance; the upper profile is centred so that V = u* on the
/// boundary and the lower one starts eps * lower_offset inside.
class LimitConstruction {
 public:
  LimitConstruction(const ReactionModel& model, const MovingSet& ms, const ProfileBank& bank, double eps,
                    const PlaneGrid& grid);

  ControlFields fields_at(double t) const;
  /// Smallest alpha making the upper field a discrete upper solution of the
  /// plane scheme over one step.
  std::vector<double> alpha_for_step(const ControlFields& now, const ControlFields& next, double dt,
                                     bool additive = false) const;
  double phi(double x, double y) const;

  const PlaneGrid& grid() const { return grid_; }
  double eps() const { return eps_; }
  double R_phi() const { return R_; }
  double h_in() const { return h_in_; }
  double h_out() const { return h_out_; }

 private:
  const ReactionModel* model_;
  const MovingSet* ms_;
  const ProfileBank* bank_;
  double eps_;
  PlaneGrid grid_;
  Vec2 centre_;
  double R_ = 0.0, h_in_ = 0.0, h_out_ = 0.0;
};

/// Box four times the set radius wide (at least wide enough for the annulus), dx = eps * dx_factor.
PlaneGrid default_plane_grid(const MovingSet& ms, const ProfileBank& bank, double eps, double dx_factor = 0.25);

struct VerifyOptions {
  double dx_factor = 0.25;   // dx = eps * dx_factor
  double dt_factor = 0.1;    // dt = eps * dt_factor
  double sample_dt = 0.05;   // report spacing in t
  bool additive = false;
};

struct LimitReport {
  double eps = 0.0;
  std::size_t n = 0;
  double dx = 0.0, dt = 0.0;
  double l1_error = 0.0;   // max over sampled t of ||u - 1_Omega||_1
  double mass_gap = 0.0;   // max over sampled t of |control mass - effort|
  double max_rel_gap = 0.0;
  double sandwich_violation = 0.0;  // max of the two below
  double lower_violation = 0.0;     // max of (u_lower - u)+
  double upper_violation = 0.0;     // max of (u - u_upper)+
  double monotonicity_margin = 0.0; // min of 1 + dt (f'/eps - alpha) over steps
  std::vector<double> t, control_mass, effort, l1;
};

std::vector<LimitReport> verify_limit(const MovingSet& ms, const ReactionModel& model, const ProfileBank& bank,
                                      const ECurve& ecurve, const std::vector<double>& eps_list,
                                      const VerifyOptions& opt = {});

struct HalfPlaneReport {
  double eps = 0.0;
  double c = 0.0;
  double mass_per_length = 0.0;  // mean control mass per unit boundary length over the second half
  double E = 0.0;                // E(c) from the curve
  double sandwich_violation = 0.0;
};

/// Straight boundary moving inward at constant speed c (1D reduction).
HalfPlaneReport verify_halfplane(const ReactionModel& model, const ProfileBank& bank, const ECurve& ecurve,
                                 double c, double eps, double T = 1.0, const VerifyOptions& opt = {});

}  // namespace frontctrl
