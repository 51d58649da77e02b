#include "frontctrl/optimal_control.hpp"

#include <algorithm>
#include <cmath>
// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <thread>

#include "frontctrl/errors.hpp"

namespace frontctrl {

namespace gk = boost::math::quadrature;

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  std::size_t i = std::size_t(it - xs.begin());
  double x0 = xs[i - 1], x1 = xs[i];
  if (x1 == x0) return ys[i];
  double t = (x - x0) / (x1 - x0);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

struct ProfileBuilder {
  TravelingProfile& p;
  void add(double x, double U, double P, double alpha) {
    p.x.push_back(x);
    p.U.push_back(U);
    p.P.push_back(P);
    p.alpha.push_back(alpha);
  }
  void add_segment(const Segment& s, double shift) {
    for (std::size_t i = 0; i < s.points.size(); ++i) add(s.x[i] + shift, s.points[i].U, s.points[i].P, 0.0);
  }
};

void shift_segment(Segment& s, double shift) {
  for (double& x : s.x) x += shift;
}

// Manifolds launch a small offset away from the equilibria; pin the path ends onto them.
void close_at_equilibria(PhasePath& path) {
  auto& first = path.segments.front();
  if (first.kind == SegmentKind::Trajectory && first.points.front().U > 0.0) {
    first.points.insert(first.points.begin(), PhasePoint{0.0, 0.0});
    if (!first.x.empty()) first.x.insert(first.x.begin(), first.x.front());
  }
  auto& last = path.segments.back();
  if (last.kind == SegmentKind::Trajectory && last.points.back().U < 1.0) {
    last.points.push_back({1.0, 0.0});
    if (!last.x.empty()) last.x.push_back(last.x.back());
  }
}

// Integral over [lo, hi] of g with square-root substitutions at both ends.
template <class G>
double endpoint_safe_integral(G g, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  const double m = 0.5 * (lo + hi);
  // Floor keeps u off an endpoint where f may vanish to rounding.
  auto left = [&](double s) { return g(lo + std::max(s * s, 1e-12)) * 2.0 * s; };
  auto right = [&](double s) { return g(hi - std::max(s * s, 1e-12)) * 2.0 * s; };
  double a = gk::gauss_kronrod<double, 31>::integrate(left, 0.0, std::sqrt(m - lo), 20, 1e-12);
  double b = gk::gauss_kronrod<double, 31>::integrate(right, 0.0, std::sqrt(hi - m), 20, 1e-12);
  return a + b;
}

void require_controlled_speed(const ReactionModel& model, double c) {
  if (!model.bistable() && !(c > find_cstar(model)))
    fail(ErrorCode::NoControlNeeded, "c <= c*: the uncontrolled front already travels at this speed");
}

}  // namespace

double ControlMeasure::density_at(double x) const {
  if (density_x.empty() || x < density_x.front() || x > density_x.back()) return 0.0;
  return interp(density_x, density, x);
}

double TravelingProfile::U_at(double xq) const {
  if (xq < x.front()) {
    if (left_rate == 0.0) return U.front();
    return U.front() * std::exp(left_rate * (xq - x.front()));
  }
  if (xq > x.back()) return 1.0 - (1.0 - U.back()) * std::exp(right_rate * (xq - x.back()));
  return interp(x, U, xq);
}

double TravelingProfile::alpha_at(double xq) const {
  if (xq < x.front() || xq > x.back()) return 0.0;
  return interp(x, alpha, xq);
}

double p_star(const ReactionModel& model, double u) {
  return std::sqrt(std::max(0.0, u * model.f(u)));
}

double z_star(const ReactionModel& model, double c, double u) {
  const double f = model.f(u);
  const double uf = u * f;
  if (!(uf > 0)) return std::numeric_limits<double>::infinity();
  return (3.0 * f + u * model.df(u)) / (2.0 * std::sqrt(uf)) + c;
}

TravelingProfile solve_P1(const ReactionModel& model, double c) {
  require_controlled_speed(model, c);
  TravelingProfile prof;
  prof.c = c;
  ProfileBuilder pb{prof};
  const Eigenstructure e1 = eigen_at(model, c, 1.0);
  prof.right_rate = e1.lambda_minus;

  if (!model.bistable()) {
    auto up = integrate_manifold(model, c, Equilibrium::One, StopCondition::at_u(0.0));
    if (up.reason != StopReason::UTarget || !(up.end.P > 0))
      fail(ErrorCode::NoControlNeeded, "stable manifold of one does not reach U=0 above the axis");
    const double b = up.end.P;
    Segment traj = up.path.segments.front();
    shift_segment(traj, -traj.x.front());
    PhasePath path;
    path.c = c;
    Segment jump{SegmentKind::VerticalJump, {{0.0, 0.0}, {0.0, b}}, {0.0, 0.0}};
    path.segments = {jump, traj};
    pb.add(0.0, 0.0, 0.0, 0.0);
    pb.add_segment(traj, 0.0);
    prof.left_rate = 0.0;
    prof.control.atoms = {{0.0, b, 0.0}};
    prof.control.total_J0 = b;
    prof.control.total_J1 = std::numeric_limits<double>::infinity();
    close_at_equilibria(path);
    prof.phase_path = std::move(path);
    return prof;
  }

  const double us = model.u_star();
  auto lo = integrate_manifold(model, c, Equilibrium::Origin, StopCondition::at_u(us));
  auto up = integrate_manifold(model, c, Equilibrium::One, StopCondition::at_u(us));
  if (lo.reason != StopReason::UTarget || up.reason != StopReason::UTarget)
    fail(ErrorCode::NoControlNeeded, "manifolds do not reach u*");
  const double a = lo.end.P, b = up.end.P;
  if (!(b > a)) fail(ErrorCode::NoControlNeeded, "c <= c*: the uncontrolled front already travels at this speed");

  Segment left = lo.path.segments.front();
  shift_segment(left, -left.x.back());
  Segment right = up.path.segments.front();
  shift_segment(right, -right.x.front());
  PhasePath path;
  path.c = c;
  path.segments = {left, Segment{SegmentKind::VerticalJump, {{us, a}, {us, b}}, {0.0, 0.0}}, right};
  pb.add_segment(left, 0.0);
  pb.add_segment(right, 0.0);
  prof.left_rate = eigen_at(model, c, 0.0).lambda_plus;
  prof.control.atoms = {{0.0, b - a, us}};
  prof.control.total_J0 = b - a;
  prof.control.total_J1 = (b - a) / us;
  close_at_equilibria(path);
  prof.phase_path = std::move(path);
  return prof;
}

PhasePath fallback_path(const ReactionModel& model, double c) {
  if (!model.bistable()) fail(ErrorCode::WrongKind, "fallback path needs a bistable model");
  return solve_P1(model, c).phase_path;
}

ArcEnds arc_ends(const ReactionModel& model, double c) {
  const double us = model.u_star();
  auto ps = [&model](double u) { return p_star(model, u); };
  auto stop = StopCondition::at_curve(ps, us, 1.0);
  auto lo = integrate_manifold(model, c, Equilibrium::Origin, stop);
  auto up = integrate_manifold(model, c, Equilibrium::One, stop);
  ArcEnds r;
  if (lo.reason == StopReason::Curve) r.u_minus = lo.end.U;
  else if (lo.reason == StopReason::Converged && std::abs(lo.end.U - us) < 1e-6) r.u_minus = us;
  else r.u_minus = 1.0;
  r.u_plus = up.reason == StopReason::Curve ? up.end.U : us;
  return r;
}

double effort_integral(const ReactionModel& model, double c, double um, double up) {
  return endpoint_safe_integral([&](double u) { return z_star(model, c, u) / u; }, um, up);
}

double mass_integral(const ReactionModel& model, double c, double um, double up) {
  return endpoint_safe_integral([&](double u) { return z_star(model, c, u); }, um, up);
}

TravelingProfile solve_P2(const ReactionModel& model, double c) {
  if (!model.bistable()) fail(ErrorCode::WrongKind, "solve_P2 needs a bistable model");
  if (!check_A4(model).holds) fail(ErrorCode::A4Violation, "assumption A4 fails; use the fallback path");
  const double us = model.u_star();
  auto ps = [&model](double u) { return p_star(model, u); };
  auto stop = StopCondition::at_curve(ps, us, 1.0);
  auto lo = integrate_manifold(model, c, Equilibrium::Origin, stop);
  auto up = integrate_manifold(model, c, Equilibrium::One, stop);
  // In the node regime the incoming orbit converges to (u*,0) and the arc
  // starts there.
  const bool node = lo.reason == StopReason::Converged && std::abs(lo.end.U - us) < 1e-6;
  if ((lo.reason != StopReason::Curve && !node) || up.reason != StopReason::Curve)
    fail(ErrorCode::NoControlNeeded, "c <= c*: the uncontrolled front already travels at this speed");
  const double um = node ? us : lo.end.U, upl = up.end.U;
  if (!(um < upl)) fail(ErrorCode::NoControlNeeded, "c <= c*: the uncontrolled front already travels at this speed");

  TravelingProfile prof;
  prof.c = c;
  prof.u_minus = um;
  prof.u_plus = upl;
  prof.left_rate = eigen_at(model, c, 0.0).lambda_plus;
  prof.right_rate = eigen_at(model, c, 1.0).lambda_minus;

  Segment left = lo.path.segments.front();
  // x = 0 where U = u* on the incoming manifold.
  {
    const auto& pts = left.points;
    std::size_t i = 1;
    while (i < pts.size() && pts[i].U < us) ++i;
    double x0 = left.x.back();
    if (i < pts.size())
      x0 = left.x[i - 1] + (left.x[i] - left.x[i - 1]) * (us - pts[i - 1].U) / (pts[i].U - pts[i - 1].U);
    shift_segment(left, -x0);
  }

  // P* arc, clustered at both ends.
  Segment arc;
  arc.kind = SegmentKind::Curve;
  const int n_arc = 2000;
  std::vector<double> us_arc(n_arc + 1);
  for (int k = 0; k <= n_arc; ++k)
    us_arc[k] = um + (upl - um) * 0.5 * (1.0 - std::cos(M_PI * double(k) / n_arc));
  double x = left.x.back();
  for (int k = 0; k <= n_arc; ++k) {
    if (k > 0) {
      auto inv = [&](double u) { return 1.0 / p_star(model, u); };
      x += gk::gauss_kronrod<double, 15>::integrate(inv, us_arc[k - 1], us_arc[k], 0, 0.0);
    }
    arc.points.push_back({us_arc[k], p_star(model, us_arc[k])});
    arc.x.push_back(x);
  }

  Segment right = up.path.segments.front();
  shift_segment(right, arc.x.back() - right.x.front());

  ProfileBuilder pb{prof};
  pb.add_segment(left, 0.0);
  for (std::size_t k = 0; k < arc.points.size(); ++k) {
    const double u = arc.points[k].U, p = arc.points[k].P;
    const double mu = 0.5 * (3.0 * model.f(u) + u * model.df(u)) + c * p;  // z* P*
    pb.add(arc.x[k], u, p, mu / u);
    prof.control.density_x.push_back(arc.x[k]);
    prof.control.density.push_back(mu);
  }
  pb.add_segment(right, 0.0);

  prof.control.total_J0 = mass_integral(model, c, um, upl);
  prof.control.total_J1 = effort_integral(model, c, um, upl);
  prof.phase_path.c = c;
  prof.phase_path.segments = {left, arc, right};
  close_at_equilibria(prof.phase_path);
  return prof;
}

double ECurve::E_at(double c) const {
  if (c <= c_star) return 0.0;
  if (samples.empty() || c > samples.back().c * (1.0 + 1e-12) + 1e-12)
    fail(ErrorCode::ExtrapolationRefused, "speed above the sampled E-curve range");
  std::vector<double> cs{c_star}, es{0.0};
  for (const auto& s : samples)
    if (s.c > cs.back()) {
      cs.push_back(s.c);
      es.push_back(s.E);
    }
  if (cs.size() == 1) return 0.0;
  if (cs.size() < 4) return interp(cs, es, c);
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(cs), std::move(es));
  return spline(std::min(c, samples.back().c));
}

ECurve compute_ecurve(const ReactionModel& model, const std::vector<double>& c_values, unsigned threads) {
  if (!model.bistable()) fail(ErrorCode::WrongKind, "E-curve needs a bistable model");
  if (!check_A4(model).holds) fail(ErrorCode::A4Violation, "assumption A4 fails");
  ECurve curve;
  curve.c_star = find_cstar(model);
  curve.u_bar = arc_ends(model, curve.c_star).u_minus;
  std::vector<double> cs = c_values;
  std::sort(cs.begin(), cs.end());
  curve.samples.resize(cs.size());
  auto work = [&](std::size_t i) {
    ECurveSample s;
    s.c = cs[i];
    if (cs[i] <= curve.c_star) {
      s.u_minus = s.u_plus = curve.u_bar;
    } else {
      ArcEnds ends = arc_ends(model, cs[i]);
      if (!(ends.u_minus < ends.u_plus)) {
        s.u_minus = s.u_plus = curve.u_bar;
      } else {
        s.u_minus = ends.u_minus;
        s.u_plus = ends.u_plus;
        s.E = effort_integral(model, cs[i], ends.u_minus, ends.u_plus);
      }
    }
    curve.samples[i] = s;
  };
  threads = std::max(1u, std::min<unsigned>(threads, unsigned(cs.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < cs.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < cs.size(); i += threads) work(i);
      });
    for (auto& th : pool) th.join();
  }
  return curve;
}

SlopeReport ecurve_slope_at_cstar(const ReactionModel& model) {
  if (!model.bistable()) fail(ErrorCode::WrongKind, "slope at c* needs a bistable model");
  if (!check_A4(model).holds) fail(ErrorCode::A4Violation, "assumption A4 fails");
  SlopeReport r;
  r.c_star = find_cstar(model);
  const double c = r.c_star;
  // Companion dY/dx = (f/P) Y - P, i.e. dY/dU = f/P^2 Y - 1 along the orbit.
  AuxRhs aux = [&model](const State& y) { return model.f(y[0]) / y[1] * y[2] - y[1]; };
  const double us = model.u_star();
  auto ps = [&model](double u) { return p_star(model, u); };

  ManifoldOptions lo_opt;
  lo_opt.aux = aux;
  {
    const Eigenstructure e = eigen_at(model, c, 0.0);
    const double k = -model.df(0.0) / (e.lambda_plus * e.lambda_plus);
    const double u0 = lo_opt.delta0 / std::hypot(1.0, e.lambda_plus);
    lo_opt.aux0 = -u0 / (1.0 + k);
  }
  auto lo = integrate_manifold(model, c, Equilibrium::Origin, StopCondition::at_curve(ps, us, 1.0), lo_opt);
  if (lo.reason != StopReason::Curve) fail(ErrorCode::BracketFailure, "heteroclinic does not meet P*");
  r.u_bar = lo.end.U;
  r.y_minus = lo.aux.back();

  ManifoldOptions up_opt;
  up_opt.aux = aux;
  {
    const Eigenstructure e = eigen_at(model, c, 1.0);
    const double k1 = -model.df(1.0) / (e.lambda_minus * e.lambda_minus);
    const double w0 = up_opt.delta0 / std::hypot(1.0, e.lambda_minus);
    up_opt.aux0 = w0 / (1.0 + k1);
  }
  auto up = integrate_manifold(model, c, Equilibrium::One, StopCondition::at_u(r.u_bar), up_opt);
  if (up.reason != StopReason::UTarget) fail(ErrorCode::BracketFailure, "stable manifold does not reach u-bar");
  r.y_plus = up.aux.front();
  r.slope = (r.y_plus - r.y_minus) / r.u_bar;

  for (std::size_t i = 0; i < lo.aux.size(); ++i) {
    r.U_minus.push_back(lo.path.segments[0].points[i].U);
    r.Y_minus.push_back(lo.aux[i]);
  }
  for (std::size_t i = 0; i < up.aux.size(); ++i) {
    r.U_plus.push_back(up.path.segments[0].points[i].U);
    r.Y_plus.push_back(up.aux[i]);
  }
  return r;
}

std::vector<CostCurvePoint> p1_cost_curve(const ReactionModel& model, const std::vector<double>& c_values) {
  if (model.bistable()) fail(ErrorCode::WrongKind, "p1_cost_curve needs a monostable model");
  const double cs = find_cstar(model);
  std::vector<CostCurvePoint> out;
  for (double c : c_values) {
    CostCurvePoint pt{c, 0.0};
    if (c > cs) {
      auto up = integrate_manifold(model, c, Equilibrium::One, StopCondition::at_u(0.0));
      if (up.reason == StopReason::UTarget) pt.C_min = std::max(0.0, up.end.P);
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace frontctrl
