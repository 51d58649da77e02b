#include "frontctrl/phase_plane.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "frontctrl/errors.hpp"

namespace frontctrl {

void PhasePath::jump_to(double p_top) {
  PhasePoint a = back();
  if (!(p_top > a.P)) return;
  Segment s;
  s.kind = SegmentKind::VerticalJump;
  s.points = {a, {a.U, p_top}};
  if (!segments.empty() && !segments.back().x.empty()) s.x = {segments.back().x.back(), segments.back().x.back()};
  segments.push_back(std::move(s));
}

std::vector<PhasePoint> PhasePath::points() const {
  std::vector<PhasePoint> out;
  for (const auto& s : segments) out.insert(out.end(), s.points.begin(), s.points.end());
  return out;
}

Eigenstructure eigen_at(const ReactionModel& model, double c, double U) {
  Eigenstructure e;
  const double fp = model.df(U);
  const double disc = c * c - 4.0 * fp;
  if (disc < 0) {
    e.complex = true;
    e.lambda_plus = e.lambda_minus = -0.5 * c;
    e.imag = 0.5 * std::sqrt(-disc);
  } else {
    const double r = std::sqrt(disc);
    // Stable evaluation of both roots.
    const double q = -0.5 * (c + (c >= 0 ? r : -r));
    double l1 = q, l2 = q != 0.0 ? fp / q : 0.0;
    if (q == 0.0) l1 = l2 = 0.0;
    e.lambda_plus = std::max(l1, l2);
    e.lambda_minus = std::min(l1, l2);
  }
  e.eigvec_plus = {1.0, e.lambda_plus};
  e.eigvec_minus = {1.0, e.lambda_minus};
  return e;
}

StopCondition StopCondition::p_zero() { return {}; }

StopCondition StopCondition::at_u(double target) {
  StopCondition s;
  s.kind = Kind::UTarget;
  s.u_target = target;
  return s;
}

StopCondition StopCondition::at_curve(std::function<double(double)> curve, double lo, double hi) {
  StopCondition s;
  s.kind = Kind::Curve;
  s.curve = std::move(curve);
  s.curve_lo = lo;
  s.curve_hi = hi;
  return s;
}

StopCondition StopCondition::arc_length(double cap) {
  StopCondition s;
  s.kind = Kind::ArcLength;
  s.arc_cap = cap;
  return s;
}

double p_bound(const ReactionModel& model, double c) {
  double lip = 0.0;
  for (int i = 0; i <= 100; ++i) lip = std::max(lip, std::abs(model.df(i / 100.0)));
  // The first term is the bound for c > 0; the rest covers c <= 0 where P
  // scales with |c|.
  return 1.0 + std::abs(model.f_min()) / std::max(std::abs(c), 1e-3) + 2.0 * std::abs(c) +
         2.0 * std::sqrt(lip);
}

namespace {

enum EventId { kPZero = 1, kUTarget, kCurve, kULow, kUHigh, kConverged };

}  // namespace

Manifold integrate_manifold(const ReactionModel& model, double c, Equilibrium eq,
                            const StopCondition& until, const ManifoldOptions& opt) {
  const double ue = eq == Equilibrium::Origin ? 0.0 : 1.0;
  const Eigenstructure e = eigen_at(model, c, ue);
  if (e.complex) fail(ErrorCode::NoRealEigenvector, "equilibrium has complex eigenvalues");

  State y0{};
  int direction = 1;
  if (eq == Equilibrium::Origin) {
    double lam;
    if (e.lambda_plus > 0 && e.lambda_minus < 0) lam = e.lambda_plus;
    else if (e.lambda_minus > 0) lam = e.lambda_minus;  // unstable node: slow direction
    else fail(ErrorCode::NoRealEigenvector, "origin has no real unstable direction");
    const double n = std::hypot(1.0, lam);
    y0 = {opt.delta0 / n, opt.delta0 * lam / n, opt.aux0};
  } else {
    if (!(e.lambda_minus < 0)) fail(ErrorCode::NoRealEigenvector, "one has no stable direction");
    const double lam = e.lambda_minus;
    const double n = std::hypot(1.0, lam);
    y0 = {1.0 - opt.delta0 / n, -opt.delta0 * lam / n, opt.aux0};
    direction = -1;
  }

  std::vector<OdeEvent> events;
  events.push_back({[](const State& y) { return y[1]; }, kPZero});
  events.push_back({[](const State& y) { return y[0]; }, kULow});
  events.push_back({[](const State& y) { return 1.0 - y[0]; }, kUHigh});
  const double far = 1e-9;
  if (eq == Equilibrium::Origin) {
    events.push_back({[far](const State& y) { return std::hypot(1.0 - y[0], y[1]) - far; }, kConverged});
    // (u*,0) attracts forward orbits; as a node it is approached from the left
    // without crossing U = u*, so the orbit can be stopped once it is close.
    if (model.bistable() && c > 0 && c * c > 4.0 * model.df(model.u_star())) {
      const double us = model.u_star();
      events.push_back({[us](const State& y) { return std::hypot(y[0] - us, y[1]) - 1e-7; }, kConverged});
    }
  }
  else
    events.push_back({[far](const State& y) { return std::hypot(y[0], y[1]) - far; }, kConverged});

  OdeOptions ode = opt.ode;
  ode.p_bound = std::min(ode.p_bound, p_bound(model, c));
  switch (until.kind) {
    case StopCondition::Kind::PZero: break;
    case StopCondition::Kind::UTarget: {
      const double t = until.u_target;
      events.push_back({[t](const State& y) { return y[0] - t; }, kUTarget});
      break;
    }
    case StopCondition::Kind::Curve: {
      auto curve = until.curve;
      const double lo = until.curve_lo, hi = until.curve_hi;
      events.push_back(
          {[curve, lo, hi](const State& y) { return y[1] - curve(std::clamp(y[0], lo, hi)); }, kCurve});
      break;
    }
    case StopCondition::Kind::ArcLength: ode.max_length = until.arc_cap; break;
  }

  OdeResult r = integrate_tw(model, c, y0, direction, events, opt.aux, ode);

  Manifold m;
  switch (r.event) {
    case kPZero: m.reason = StopReason::PZero; break;
    case kUTarget:
    case kULow:
    case kUHigh: m.reason = StopReason::UTarget; break;
    case kCurve: m.reason = StopReason::Curve; break;
    case kConverged: m.reason = StopReason::Converged; break;
    default: m.reason = StopReason::Cap; break;
  }
  // A U-target at the boundary counts as reached only if it was requested.
  if ((r.event == kULow || r.event == kUHigh) && until.kind != StopCondition::Kind::UTarget)
    m.reason = StopReason::UTarget;

  const std::size_t n = r.y.size();
  Segment seg;
  seg.kind = SegmentKind::Trajectory;
  seg.points.resize(n);
  seg.x.resize(n);
  m.aux.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = direction > 0 ? i : n - 1 - i;
    seg.points[i] = {r.y[k][0], r.y[k][1]};
    seg.x[i] = direction * r.s[k];
    m.aux[i] = r.y[k][2];
  }
  m.end = {r.y.back()[0], r.y.back()[1]};
  m.x_end = direction * r.s.back();
  m.path.c = c;
  m.path.segments.push_back(std::move(seg));
  return m;
}

double manifold_gap(const ReactionModel& model, double c, const ManifoldOptions& opt) {
  const double us = model.u_star();
  // If a manifold stalls at P=0 before u*, extend the gap continuously by the
  // remaining U-distance with a negative sign.
  auto lower = integrate_manifold(model, c, Equilibrium::Origin, StopCondition::at_u(us), opt);
  double a = lower.reason == StopReason::UTarget ? lower.end.P : -(us - lower.end.U);
  auto upper = integrate_manifold(model, c, Equilibrium::One, StopCondition::at_u(us), opt);
  double b = upper.reason == StopReason::UTarget ? upper.end.P : -(upper.end.U - us);
  return b - a;
}

double find_cstar(const ReactionModel& model) {
  if (!model.bistable()) return -2.0 * std::sqrt(model.df(0.0));
  auto gap = [&](double c) { return manifold_gap(model, c); };
  double lo = -1.0, hi = 1.0;
  double glo = gap(lo), ghi = gap(hi);
  while (glo > 0 && lo > -20.0) {
    hi = lo;
    ghi = glo;
    lo = std::max(2.0 * lo, -20.0);
    glo = gap(lo);
  }
  while (ghi < 0 && hi < 20.0) {
    lo = hi;
    glo = ghi;
    hi = std::min(2.0 * hi, 20.0);
    ghi = gap(hi);
  }
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (glo > 0 || ghi < 0) fail(ErrorCode::BracketFailure, "no sign change of the manifold gap in [-20,20]");
  std::uintmax_t it = 100;
  auto tol = [](double a, double b) { return std::abs(b - a) < 1e-11; };
  auto r = boost::math::tools::toms748_solve(gap, lo, hi, glo, ghi, tol, it);
  return 0.5 * (r.first + r.second);
}

double integral_f(const ReactionModel& model, double lo, double hi) {
  auto f = [&](double u) { return model.f(u); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-12);
}

int wave_speed_sign(const ReactionModel& model) {
  if (!model.bistable()) fail(ErrorCode::WrongKind, "wave_speed_sign needs a bistable model");
  const double I = integral_f(model);
  if (std::abs(I) < 1e-12) return 0;
  return I > 0 ? -1 : 1;
}

}  // namespace frontctrl
