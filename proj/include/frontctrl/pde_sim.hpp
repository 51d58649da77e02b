#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "frontctrl/optimal_control.hpp"
#include "frontctrl/reaction_models.hpp"

namespace frontctrl {

struct Grid1D {
  double x_lo = -40.0;
  double x_hi = 40.0;
  std::size_t n = 4000;  // cells; nodes are n + 1

  Grid1D() = default;
  Grid1D(double lo, double hi, std::size_t cells);
  /// Grid on [lo, hi] with spacing as close to dx as divides the interval.
  static Grid1D with_spacing(double lo, double hi, double dx);
  double dx() const { return (x_hi - x_lo) / double(n); }
  double x(std::size_t i) const { return x_lo + double(i) * dx(); }
  std::size_t nodes() const { return n + 1; }
};

struct FrontTrace {
  std::vector<double> times;
  std::vector<double> positions;
  double speed = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  // RMS misfit of the fit
};

/// Least-squares speed over the second half of the time window.
void fit_trace(FrontTrace& trace);

/// Leftmost u = 1/2 crossing by linear interpolation; NaN if none.
double front_position(const std::vector<double>& u, const Grid1D& g);

/// Control on grid nodes for a profile whose origin sits at x_origin: the
/// density, plus atoms spread over triangles of width 4 dx with exact mass.
/// Additive coupling gives mu per unit x; multiplicative gives alpha.
std::vector<double> control_on_grid(const TravelingProfile& profile, CouplingKind kind, const Grid1D& g,
                                    double x_origin, double mass_factor = 1.0);

/// Profile U(x - x_origin) sampled on the grid.
std::vector<double> profile_on_grid(const TravelingProfile& profile, const Grid1D& g, double x_origin);

/// Smoothed step 0 -> 1 centred at x0.
std::vector<double> step_on_grid(const Grid1D& g, double x0, double width = 1.0);

struct Run1DOptions {
  Grid1D grid;
  double T = 50.0;
  double dt = 0.01;
  bool implicit_diffusion = true;
  double trace_dt = 0.25;
  double control_origin = 0.0;  // profile origin at t = 0
  double mass_factor = 1.0;     // scales the control, to hold a mollified front
  bool clamp_sink = true;       // additive sink limited so that u stays >= 0
  double boundary_margin_cells = 10.0;
};

struct Run1DResult {
  std::vector<double> u;
  double t = 0.0;
  FrontTrace trace;
  double u_min = 0.0;  // extremes over every accepted step
  double u_max = 0.0;
  double applied_control = 0.0;  // integral of the applied sink at the last step
};

/// u_t = u_xx + f(u) - g(u, alpha) with the control moving rigidly at the
/// profile speed. Dirichlet ends keep the initial end values.
Run1DResult run_1d(const ReactionModel& model, const ControlCoupling& coupling, const TravelingProfile* control,
                   const std::vector<double>& u0, const Run1DOptions& opt);

struct StripOptions {
  Grid1D grid;             // co-moving coordinate xi = x - c t
  std::size_t ny = 20;     // cells across [0, 1], Neumann at both sides
  double T = 100.0;
  double dt = 0.02;
  double trace_dt = 0.5;
  double settle_tol = 0.02;  // trace residual below which the run counts as settled
};

struct StripResult {
  std::vector<double> u;  // row-major, (ny + 1) rows of grid.nodes()
  FrontTrace trace;       // lab-frame positions of the mid-row front
  double l1_control = 0.0;
  double integral_f = 0.0;
  double mc_residual = 0.0;
  bool settled = false;
  double u_min = 0.0;
  double u_max = 0.0;
};

/// Co-moving strip run of u_t = u_xx + u_yy + c u_xi + f(u) - z with an
/// additive sink z given on the strip nodes (row-major), clamped at u = 0.
StripResult run_strip_2d(const ReactionModel& model, const std::vector<double>& z, double c,
                         const std::vector<double>& u0, const StripOptions& opt);

struct PlaneGrid {
  double x_lo = -4.0, y_lo = -4.0;
  double dx = 0.05;
  std::size_t nx = 160, ny = 160;  // cells

  double x(std::size_t i) const { return x_lo + double(i) * dx; }
  double y(std::size_t j) const { return y_lo + double(j) * dx; }
  std::size_t size() const { return (nx + 1) * (ny + 1); }
  std::size_t idx(std::size_t i, std::size_t j) const { return j * (nx + 1) + i; }
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
};

struct PlaneOptions {
  double eps = 0.1;
  double T = 1.0;
  double dt = 0.01;
  double boundary_value = 0.0;
  bool additive = false;
  std::vector<double> snapshot_times;
};

/// Fills alpha (grid-sized) for the step from t to t + dt.
using PlaneControl = std::function<void(std::size_t step, double t, double dt, std::vector<double>& alpha)>;
/// Called after every accepted step with the new time and field.
using PlaneObserver = std::function<void(std::size_t step, double t, const std::vector<double>& u)>;

/// u_t = f(u)/eps + eps Lap u - u alpha: explicit reaction and sink, then the
/// implicit step (I - a Lap_h) u_new = rhs with a = dt eps / dx^2 and Dirichlet data.
std::vector<Snapshot> run_plane_2d(const ReactionModel& model, const PlaneGrid& grid, const std::vector<double>& u0,
                                   const PlaneOptions& opt, const PlaneControl& alpha = {},
                                   const PlaneObserver& observer = {});

/// The implicit operator of run_plane_2d applied to v (interior nodes, using the
/// boundary values of v; the boundary of the result copies v).
std::vector<double> plane_apply_operator(const PlaneGrid& grid, double a, const std::vector<double>& v);

}  // namespace frontctrl
