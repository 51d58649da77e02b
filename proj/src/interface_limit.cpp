#include "frontctrl/interface_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "frontctrl/errors.hpp"
#include "frontctrl/ode.hpp"
#include "frontctrl/phase_plane.hpp"

namespace frontctrl {

namespace {

// Gap in profile units between the control support and the lower profile.
constexpr double kArcClearance = 0.5;
constexpr double kTwoPi = 6.283185307179586476925286766559;

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }
Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// Fourth-order periodic differences with spacing h.
std::vector<Vec2> d1_periodic(const std::vector<Vec2>& x, double h) {
  const std::size_t n = x.size();
  std::vector<Vec2> d(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& p2 = x[(k + 2) % n];
    const Vec2& p1 = x[(k + 1) % n];
    const Vec2& m1 = x[(k + n - 1) % n];
    const Vec2& m2 = x[(k + n - 2) % n];
    d[k] = (1.0 / (12.0 * h)) * ((8.0 * (p1 - m1)) - (p2 - m2));
  }
  return d;
}

std::vector<Vec2> d2_periodic(const std::vector<Vec2>& x, double h) {
  const std::size_t n = x.size();
  std::vector<Vec2> d(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& p2 = x[(k + 2) % n];
    const Vec2& p1 = x[(k + 1) % n];
    const Vec2& m1 = x[(k + n - 1) % n];
    const Vec2& m2 = x[(k + n - 2) % n];
    d[k] = (1.0 / (12.0 * h * h)) * ((16.0 * (p1 + m1)) - (p2 + m2) - (30.0 * x[k]));
  }
  return d;
}

double shoelace(const std::vector<Vec2>& x) {
  double a = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) a += cross(x[k], x[(k + 1) % x.size()]);
  return 0.5 * a;
}

BoundaryFrame make_frame(double t, std::vector<Vec2> x, const std::vector<Vec2>& xt) {
  const std::size_t n = x.size();
  const double h = 1.0 / double(n);
  const auto xs = d1_periodic(x, h);
  const auto xss = d2_periodic(x, h);
  BoundaryFrame fr;
  fr.t = t;
  fr.normal.resize(n);
  fr.beta.resize(n);
  fr.speed.resize(n);
  fr.curvature.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = norm(xs[k]);
    if (s < 1e-8) fail(ErrorCode::DegenerateParameterization, "|x_xi| below 1e-8 on the boundary");
    fr.speed[k] = s;
    fr.normal[k] = (1.0 / s) * perp(xs[k]);
    fr.beta[k] = dot(fr.normal[k], xt[k]);
    fr.curvature[k] = cross(xs[k], xss[k]) / (s * s * s);
  }
  fr.area = shoelace(x);
  fr.x = std::move(x);
  return fr;
}

struct Extent {
  Vec2 centre;
  double radius = 0.0;
};

Extent set_extent(const MovingSet& ms) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& row : ms.x)
    for (const auto& p : row) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  Extent e;
  e.centre = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
  for (const auto& row : ms.x)
    for (const auto& p : row) e.radius = std::max(e.radius, norm(p - e.centre));
  return e;
}

// Cubic Hermite on samples (y, v, dv); ends are held constant.
double hermite(const std::vector<double>& y, const std::vector<double>& v, const std::vector<double>& dv,
               double at) {
  if (at <= y.front()) return v.front();
  if (at >= y.back()) return v.back();
  const std::size_t i = std::size_t(std::upper_bound(y.begin(), y.end(), at) - y.begin()) - 1;
  const double h = y[i + 1] - y[i];
  if (h <= 1e-14) return v[i + 1];
  const double t = (at - y[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * v[i] + (t3 - 2 * t2 + t) * h * dv[i] + (-2 * t3 + 3 * t2) * v[i + 1] +
         (t3 - t2) * h * dv[i + 1];
}

double linear(const std::vector<double>& y, const std::vector<double>& v, double at) {
  if (at <= y.front()) return v.front();
  if (at >= y.back()) return v.back();
  const std::size_t i = std::size_t(std::upper_bound(y.begin(), y.end(), at) - y.begin()) - 1;
  const double h = y[i + 1] - y[i];
  if (h <= 1e-14) return v[i + 1];
  const double t = (at - y[i]) / h;
  return (1 - t) * v[i] + t * v[i + 1];
}

// Position where the Hermite interpolant first reaches level (values nondecreasing there).
double first_crossing(const std::vector<double>& y, const std::vector<double>& v, const std::vector<double>& dv,
                      double level) {
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (v[i] <= level && v[i + 1] >= level) {
      double lo = y[i], hi = y[i + 1];
      for (int it = 0; it < 100 && hi - lo > 1e-15 * (1 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (hermite(y, v, dv, mid) < level ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  fail(ErrorCode::BracketFailure, "profile never reaches u*");
}

OdeOptions profile_ode(double c) {
  OdeOptions o;
  o.max_length = 500.0;
  o.p_bound = 10.0 + 10.0 * std::abs(c);
  return o;
}

LowerProfile build_lower(const ReactionModel& m, double c1, std::size_t n) {
  const double top = 1.0 - 1.0 / double(n);
  const auto r = integrate_tw(m, c1, {top, 0.0, 0.0}, -1,
                              {{[](const State& y) { return y[0]; }, 1}, {[](const State& y) { return y[1]; }, 2}},
                              nullptr, profile_ode(c1));
  if (r.event != 1 || !(r.y.back()[1] > 0))
    fail(ErrorCode::BracketFailure, "lower profile does not reach the P-axis");
  LowerProfile L;
  L.c1 = c1;
  L.p_n = r.y.back()[1];
  for (std::size_t k = r.y.size(); k-- > 0;) {
    L.y.push_back(-r.s[k]);
    L.U.push_back(k + 1 == r.y.size() ? 0.0 : r.y[k][0]);
    L.P.push_back(r.y[k][1]);
  }
  L.U.back() = top;
  L.P.back() = 0.0;
  const double y0 = first_crossing(L.y, L.U, L.P, m.u_star());
  for (double& y : L.y) y -= y0;
  L.a = L.y.front();
  L.b = L.y.back();
  return L;
}

UpperProfile build_upper(const ReactionModel& m, double c, std::size_t n) {
  const double us = m.u_star();
  const double inv_n = 1.0 / double(n);
  auto ps = [&](double u) { return p_star(m, std::max(u, us)); };
  auto g = [&](const State& y) { return y[1] - ps(y[0]); };
  const OdeOptions o = profile_ode(c);

  // Orbit from (1/n, 0) until it meets P*, or settles at (u*, 0).
  const auto A = integrate_tw(m, c, {inv_n, 0.0, 0.0}, 1,
                              {{g, 1},
                               {[&](const State& y) { return std::hypot(y[0] - us, y[1]) - 1e-7; }, 2},
                               {[](const State& y) { return 1.0 - y[0]; }, 3}},
                              nullptr, o);
  if (A.event != 1 && A.event != 2) fail(ErrorCode::BracketFailure, "upper orbit from (1/n, 0) misses P*");
  double u_minus = A.event == 1 ? A.y.back()[0] : us;

  // Orbit into (1, 1/n), traced backward: it dips below P* and the arc end is
  // where it comes back above.
  auto guard = OdeEvent{[&](const State& y) { return y[0] - us; }, 2};
  std::vector<OdeResult> B;
  B.push_back(integrate_tw(m, c, {1.0, inv_n, 0.0}, -1, {{g, 1}, guard}, nullptr, o));
  if (B.back().event != 1) fail(ErrorCode::BracketFailure, "upper orbit into (1, 1/n) stays above P*");
  const double u_nudge = B.back().y.back()[0] - 1e-5;
  B.push_back(integrate_tw(m, c, B.back().y.back(), -1,
                           {{[u_nudge](const State& y) { return y[0] - u_nudge; }, 3}, guard}, nullptr, o));
  if (B.back().event != 3) fail(ErrorCode::BracketFailure, "upper orbit into (1, 1/n) reaches u*");
  if (g(B.back().y.back()) < 0) {
    B.push_back(integrate_tw(m, c, B.back().y.back(), -1, {{g, 1}, guard}, nullptr, o));
    if (B.back().event != 1) fail(ErrorCode::BracketFailure, "upper orbit into (1, 1/n) misses P*");
  }
  const double u_plus = B.back().y.back()[0];
  if (!(u_plus > u_minus + 1e-9)) fail(ErrorCode::BracketFailure, "no P* arc at this speed");

  UpperProfile V;
  V.c = c;
  V.u_minus = u_minus;
  V.u_plus = u_plus;
  V.effort = effort_integral(m, c, u_minus, u_plus);
  auto mu_x = [&](double u) { return 0.5 * (3.0 * m.f(u) + u * m.df(u)) + c * p_star(m, u); };

  for (std::size_t k = 0; k < A.y.size(); ++k) {
    V.y.push_back(A.s[k]);
    V.V.push_back(A.y[k][0]);
    V.P.push_back(A.y[k][1]);
    V.alpha.push_back(0.0);
  }
  if (A.event == 2) {
    V.V.back() = us;
    V.P.back() = 0.0;
  }
  V.V.front() = inv_n;
  V.P.front() = 0.0;
  V.arc_lo = V.y.back();
  V.alpha.back() = mu_x(u_minus) / u_minus;

  // Arc: u = u- + L tau^2 keeps dx = du / P* integrable when the arc starts at u*.
  const double L = u_plus - u_minus;
  constexpr int K = 400;
  using Gauss = boost::math::quadrature::gauss<double, 7>;
  double x = V.y.back();
  for (int k = 0; k < K; ++k) {
    const double t0 = double(k) / K, t1 = double(k + 1) / K;
    x += Gauss::integrate([&](double t) { return 2.0 * L * t / p_star(m, u_minus + L * t * t); }, t0, t1);
    const double u = k + 1 == K ? u_plus : u_minus + L * t1 * t1;
    V.y.push_back(x);
    V.V.push_back(u);
    V.P.push_back(p_star(m, u));
    V.alpha.push_back(mu_x(u) / u);
  }
  V.arc_hi = x;

  // Backward samples reversed, from the arc end to (1, 1/n).
  std::vector<double> s_all;
  std::vector<State> y_all;
  double s_off = 0.0;
  for (const auto& r : B) {
    for (std::size_t k = s_all.empty() ? 0 : 1; k < r.y.size(); ++k) {
      s_all.push_back(s_off + r.s[k]);
      y_all.push_back(r.y[k]);
    }
    s_off += r.s.back();
  }
  const double S = s_all.back();
  for (std::size_t k = y_all.size() - 1; k-- > 0;) {
    V.y.push_back(x + (S - s_all[k]));
    V.V.push_back(y_all[k][0]);
    V.P.push_back(y_all[k][1]);
    V.alpha.push_back(0.0);
  }
  V.V.back() = 1.0;
  V.P.back() = inv_n;

  const double y0 = first_crossing(V.y, V.V, V.P, us);
  for (double& y : V.y) y -= y0;
  V.arc_lo -= y0;
  V.arc_hi -= y0;
  V.a = V.y.front();
  V.b = V.y.back();
  return V;
}

}  // namespace

// ---------------------------------------------------------------- MovingSet

void MovingSet::finalize() {
  const std::size_t nt = t_grid.size();
  if (nt < 1 || x.size() != nt) fail(ErrorCode::InvalidParameter, "moving set needs one boundary row per time");
  if (n_xi < 8) fail(ErrorCode::InvalidParameter, "moving set needs at least 8 points per boundary");
  for (std::size_t i = 0; i < nt; ++i) {
    if (x[i].size() != n_xi) fail(ErrorCode::InvalidParameter, "boundary rows must all have n_xi points");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) fail(ErrorCode::InvalidParameter, "t_grid must increase");
  }
  const double h = 1.0 / double(n_xi);
  x_xi.assign(nt, {});
  x_xixi.assign(nt, {});
  x_t.assign(nt, std::vector<Vec2>(n_xi));
  for (std::size_t i = 0; i < nt; ++i) {
    x_xi[i] = d1_periodic(x[i], h);
    x_xixi[i] = d2_periodic(x[i], h);
    for (const auto& d : x_xi[i])
      if (norm(d) < 1e-8) fail(ErrorCode::DegenerateParameterization, "|x_xi| below 1e-8 on the boundary");
    if (!(shoelace(x[i]) > 0))
      fail(ErrorCode::DegenerateParameterization, "boundary must be a counterclockwise loop");
  }
  if (nt == 1) return;
  // Second-order differences in t on a possibly uneven grid.
  for (std::size_t k = 0; k < n_xi; ++k) {
    if (nt == 2) {
      const Vec2 d = (1.0 / (t_grid[1] - t_grid[0])) * (x[1][k] - x[0][k]);
      x_t[0][k] = x_t[1][k] = d;
      continue;
    }
    for (std::size_t i = 0; i < nt; ++i) {
      const std::size_t j = std::clamp<std::size_t>(i, 1, nt - 2);
      const double t0 = t_grid[j - 1], t1 = t_grid[j], t2 = t_grid[j + 1], t = t_grid[i];
      // Derivative of the quadratic through (t0, t1, t2) at t.
      const double w0 = (2 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
      const double w1 = (2 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
      const double w2 = (2 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
      x_t[i][k] = (w0 * x[j - 1][k]) + (w1 * x[j][k]) + (w2 * x[j + 1][k]);
    }
  }
}

namespace {

template <class F>
MovingSet generate(double T, std::size_t nt, std::size_t n_xi, F point) {
  if (!(T >= 0) || nt < 2 || n_xi < 8) fail(ErrorCode::InvalidParameter, "generator needs T >= 0, nt >= 2, n_xi >= 8");
  MovingSet ms;
  ms.n_xi = n_xi;
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = T * double(i) / double(nt - 1);
    ms.t_grid.push_back(t);
    std::vector<Vec2> row(n_xi);
    for (std::size_t k = 0; k < n_xi; ++k) row[k] = point(t, kTwoPi * double(k) / double(n_xi));
    ms.x.push_back(std::move(row));
  }
  if (T == 0) {
    ms.t_grid.resize(1);
    ms.x.resize(1);
  }
  ms.finalize();
  return ms;
}

}  // namespace

MovingSet MovingSet::circle(double R0, double v, double T, std::size_t nt, std::size_t n_xi) {
  if (!(R0 - v * T > 0)) fail(ErrorCode::InvalidParameter, "circle radius must stay positive");
  return generate(T, nt, n_xi, [&](double t, double th) {
    return Vec2{(R0 - v * t) * std::cos(th), (R0 - v * t) * std::sin(th)};
  });
}

MovingSet MovingSet::translating_disc(double R, double w, double T, std::size_t nt, std::size_t n_xi) {
  if (!(R > 0)) fail(ErrorCode::InvalidParameter, "disc radius must be positive");
  return generate(T, nt, n_xi, [&](double t, double th) {
    return Vec2{R * std::cos(th) + w * t, R * std::sin(th)};
  });
}

MovingSet MovingSet::ellipse(double a0, double b0, double v, double T, std::size_t nt, std::size_t n_xi) {
  if (!(a0 - v * T > 0) || !(b0 - v * T > 0)) fail(ErrorCode::InvalidParameter, "ellipse axes must stay positive");
  return generate(T, nt, n_xi, [&](double t, double th) {
    return Vec2{(a0 - v * t) * std::cos(th), (b0 - v * t) * std::sin(th)};
  });
}

MovingSet MovingSet::from_csv(const std::string& text) {
  struct Row {
    double t, xi, x1, x2;
  };
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    Row r{};
    if (!(ls >> r.t >> r.xi >> r.x1 >> r.x2)) {
      if (rows.empty() && lineno == 1) continue;  // header
      fail(ErrorCode::InvalidParameter, "moving-set CSV line " + std::to_string(lineno) + ": expected t, xi, x1, x2");
    }
    rows.push_back(r);
  }
  if (rows.empty()) fail(ErrorCode::InvalidParameter, "moving-set CSV has no rows");
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.t < b.t || (a.t == b.t && a.xi < b.xi);
  });
  MovingSet ms;
  for (const auto& r : rows) {
    if (ms.t_grid.empty() || r.t != ms.t_grid.back()) {
      ms.t_grid.push_back(r.t);
      ms.x.emplace_back();
    }
    ms.x.back().push_back({r.x1, r.x2});
  }
  ms.n_xi = ms.x.front().size();
  // xi must be the uniform grid k / n_xi.
  std::size_t k = 0;
  for (const auto& r : rows) {
    const double want = double(k % ms.n_xi) / double(ms.n_xi);
    if (std::abs(r.xi - want) > 1e-9) fail(ErrorCode::InvalidParameter, "moving-set CSV xi must be k / n_xi");
    ++k;
  }
  ms.finalize();
  return ms;
}

BoundaryFrame frame_at(const MovingSet& ms, double t) {
  const auto& tg = ms.t_grid;
  const double tol = 1e-9 * (1.0 + std::abs(tg.back()));
  if (t < tg.front() - tol || t > tg.back() + tol) fail(ErrorCode::InvalidParameter, "time outside the moving set");
  if (tg.size() == 1) return make_frame(t, ms.x[0], std::vector<Vec2>(ms.n_xi));
  t = std::clamp(t, tg.front(), tg.back());
  std::size_t i = std::size_t(std::upper_bound(tg.begin(), tg.end(), t) - tg.begin());
  i = std::clamp<std::size_t>(i, 1, tg.size() - 1) - 1;
  const double h = tg[i + 1] - tg[i];
  const double s = (t - tg[i]) / h, s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = (s3 - 2 * s2 + s) * h, h01 = -2 * s3 + 3 * s2, h11 = (s3 - s2) * h;
  const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1, d01 = (-6 * s2 + 6 * s) / h,
               d11 = 3 * s2 - 2 * s;
  std::vector<Vec2> x(ms.n_xi), xt(ms.n_xi);
  for (std::size_t k = 0; k < ms.n_xi; ++k) {
    const Vec2 &p0 = ms.x[i][k], &p1 = ms.x[i + 1][k], &v0 = ms.x_t[i][k], &v1 = ms.x_t[i + 1][k];
    x[k] = (h00 * p0) + (h10 * v0) + (h01 * p1) + (h11 * v1);
    xt[k] = (d00 * p0) + (d10 * v0) + (d01 * p1) + (d11 * v1);
  }
  return make_frame(t, std::move(x), xt);
}

NormalData normal_data(const MovingSet& ms) {
  NormalData nd;
  for (std::size_t i = 0; i < ms.t_grid.size(); ++i) {
    auto fr = make_frame(ms.t_grid[i], ms.x[i], ms.x_t.empty() ? std::vector<Vec2>(ms.n_xi) : ms.x_t[i]);
    nd.n.push_back(std::move(fr.normal));
    nd.beta.push_back(std::move(fr.beta));
  }
  return nd;
}

namespace {

double frame_effort(const BoundaryFrame& fr, const ECurve& ec) {
  double sum = 0.0;
  for (std::size_t k = 0; k < fr.beta.size(); ++k) {
    if (fr.beta[k] > ec.c_max() * (1.0 + 1e-12) + 1e-12)
      fail(ErrorCode::ExtrapolationRefused, "normal velocity above the sampled E-curve range");
    sum += ec.E_at(fr.beta[k]) * fr.speed[k];
  }
  return sum / double(fr.beta.size());
}

}  // namespace

double instantaneous_effort(const MovingSet& ms, const ECurve& ecurve, double t) {
  return frame_effort(frame_at(ms, t), ecurve);
}

double total_cost(const MovingSet& ms, const ECurve& ecurve, const EffortCostFunction& cost) {
  const auto& tg = ms.t_grid;
  std::vector<double> phiE(tg.size()), area(tg.size());
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const auto fr = frame_at(ms, tg[i]);
    phiE[i] = cost.phi(frame_effort(fr, ecurve));
    area[i] = fr.area;
  }
  double run = 0.0;
  for (std::size_t i = 0; i + 1 < tg.size(); ++i)
    run += 0.5 * (tg[i + 1] - tg[i]) * ((phiE[i] + phiE[i + 1]) + cost.kappa1 * (area[i] + area[i + 1]));
  return run + cost.kappa2 * area.back();
}

double annulus_area_offsets(const BoundaryFrame& fr, double h_in, double h_out) {
  std::vector<Vec2> inner(fr.x.size()), outer(fr.x.size());
  for (std::size_t k = 0; k < fr.x.size(); ++k) {
    inner[k] = fr.x[k] + (h_in * fr.normal[k]);
    outer[k] = fr.x[k] - (h_out * fr.normal[k]);
  }
  return shoelace(outer) - shoelace(inner);
}

double annulus_area_jacobian(const BoundaryFrame& fr, double h_in, double h_out) {
  double sum = 0.0;
  for (double s : fr.speed) sum += s;
  return sum / double(fr.speed.size()) * (h_in + h_out);
}

// ---------------------------------------------------------------- profiles

double LowerProfile::value(double at) const {
  if (at <= a) return 0.0;
  return hermite(y, U, P, at);
}

double UpperProfile::value(double at) const { return hermite(y, V, P, at); }

double UpperProfile::alpha_at(double at) const {
  if (at < arc_lo || at > arc_hi) return 0.0;
  return linear(y, alpha, at);
}

double ProfileBank::upper_width() const {
  double w = 0.0;
  for (const auto& u : upper) w = std::max(w, u.b - u.a);
  return w;
}

double ProfileBank::reach_in() const {
  double r = lower_offset + lower_width();
  for (const auto& u : upper) r = std::max(r, u.b);
  return r;
}

double ProfileBank::reach_out() const {
  double r = 0.0;
  for (const auto& u : upper) r = std::max(r, -u.a);
  return r;
}

namespace {

template <class F>
double blend_in_c(const ProfileBank& bank, double c, F eval) {
  const std::size_t m = bank.upper.size();
  if (m == 1) return eval(bank.upper[0]);
  const double p = std::clamp((c - bank.c2) / (bank.c3 - bank.c2), 0.0, 1.0) * double(m - 1);
  const std::size_t i = std::min<std::size_t>(std::size_t(p), m - 2);
  const double w = p - double(i);
  if (w == 0.0) return eval(bank.upper[i]);
  return (1 - w) * eval(bank.upper[i]) + w * eval(bank.upper[i + 1]);
}

}  // namespace

double ProfileBank::V(double c, double y) const {
  return blend_in_c(*this, c, [y](const UpperProfile& u) { return u.value(y); });
}

double ProfileBank::alpha(double c, double y) const {
  return blend_in_c(*this, c, [y](const UpperProfile& u) { return u.alpha_at(y); });
}

double ProfileBank::U(double y) const {
  if (y <= lower_offset) return 0.0;
  return lower.value(lower.a + (y - lower_offset));
}

ProfileBank build_profile_bank(const ReactionModel& model, std::size_t n, double c2, double c3,
                               std::size_t n_c_samples, double c1) {
  if (!model.bistable()) fail(ErrorCode::WrongKind, "profile banks need a bistable model");
  if (n < 3) fail(ErrorCode::InvalidParameter, "plateau parameter n must be at least 3");
  if (!(c3 >= c2)) fail(ErrorCode::InvalidParameter, "speed bracket needs c2 <= c3");
  if (n_c_samples < 1) fail(ErrorCode::InvalidParameter, "need at least one speed sample");
  ProfileBank bank;
  bank.n = n;
  bank.c_star = find_cstar(model);
  bank.c2 = c2;
  bank.c3 = c3;
  bank.c1 = c1 < 0 ? c2 - 0.5 * (c2 - bank.c_star) : c1;
  if (!(bank.c_star < bank.c1 && bank.c1 < c2))
    fail(ErrorCode::InvalidParameter, "speeds must satisfy c* < c1 < c2");
  if (c3 == c2) n_c_samples = 1;

  bank.lower = build_lower(model, bank.c1, n);
  for (std::size_t k = 0; k < n_c_samples; ++k) {
    const double c = n_c_samples == 1 ? c2 : c2 + (c3 - c2) * double(k) / double(n_c_samples - 1);
    bank.upper.push_back(build_upper(model, c, n));
  }

  // Smallest inward shift keeping the lower profile below every upper one.
  constexpr double step = 0.01;
  double top = 0.0;
  for (const auto& u : bank.upper) top = std::max(top, u.b);
  auto ordered = [&](double d) {
    const ProfileBank& b = bank;
    for (const auto& u : b.upper)
      for (double y = d; y <= d + b.lower_width() + step; y += step)
        if (b.lower.value(b.lower.a + (y - d)) > u.value(y) + 1e-12) return false;
    return true;
  };
  // The lower profile also stays clear of the control support, where the sink acts on it.
  double d = 0.0;
  for (const auto& u : bank.upper) d = std::max(d, u.arc_hi + kArcClearance);
  while (!ordered(d) && d < top) d += step;
  bank.lower_offset = d + step;
  return bank;
}

// ---------------------------------------------------------------- controls

LimitConstruction::LimitConstruction(const ReactionModel& model, const MovingSet& ms, const ProfileBank& bank,
                                     double eps, const PlaneGrid& grid)
    : model_(&model), ms_(&ms), bank_(&bank), eps_(eps), grid_(grid) {
  if (!(eps > 0)) fail(ErrorCode::InvalidParameter, "eps must be positive");
  if (bank.upper.empty()) fail(ErrorCode::InvalidParameter, "empty profile bank");
  h_in_ = eps * bank.reach_in();
  h_out_ = eps * bank.reach_out();
  double kmax = 0.0;
  for (double t : ms.t_grid) {
    const auto fr = frame_at(ms, t);
    for (double k : fr.curvature) kmax = std::max(kmax, std::abs(k));
  }
  // The rescaled supports must sit where the normal map stays one-to-one.
  const double reach = std::max(h_in_, h_out_);
  if (!(reach * kmax < 1.0)) {
    std::ostringstream os;
    os << "eps = " << eps << " puts the profile supports " << reach << " from the boundary, beyond the curvature radius "
       << (kmax > 0 ? 1.0 / kmax : std::numeric_limits<double>::infinity());
    fail(ErrorCode::VencViolation, os.str());
  }
  const Extent e = set_extent(ms);
  centre_ = e.centre;
  R_ = e.radius + 2.0 * h_out_;
}

double LimitConstruction::phi(double x, double y) const {
  const double r = norm(Vec2{x, y} - centre_);
  return r <= R_ ? 1.0 : std::exp(R_ - r);
}

ControlFields LimitConstruction::fields_at(double t) const {
  const auto fr = frame_at(*ms_, t);
  const PlaneGrid& G = grid_;
  const std::size_t N = G.size(), M = fr.x.size();
  const double tol = 1e-9;

  std::vector<double> ycoord(N, 0.0), ccoord(N, 0.0);
  std::vector<int> claim(N, -1);
  for (std::size_t k = 0; k < M; ++k) {
    const std::size_t k1 = (k + 1) % M;
    const Vec2 B0 = fr.x[k], B1 = fr.x[k1], N0 = fr.normal[k], N1 = fr.normal[k1];
    const Vec2 E = B1 - B0, D = N1 - N0;
    const Vec2 q[4] = {B0 - (h_out_ * N0), B1 - (h_out_ * N1), B1 + (h_in_ * N1), B0 + (h_in_ * N0)};
    double qy0 = q[0].y, qy1 = q[0].y;
    for (const auto& p : q) {
      qy0 = std::min(qy0, p.y);
      qy1 = std::max(qy1, p.y);
    }
    const long j0 = std::max(0L, long(std::ceil((qy0 - G.y_lo) / G.dx - tol)));
    const long j1 = std::min(long(G.ny), long(std::floor((qy1 - G.y_lo) / G.dx + tol)));
    for (long j = j0; j <= j1; ++j) {
      const double Y = G.y(std::size_t(j));
      double xl = std::numeric_limits<double>::infinity(), xr = -xl;
      for (int e = 0; e < 4; ++e) {
        const Vec2 P = q[e], Q = q[(e + 1) % 4];
        if ((P.y - Y) * (Q.y - Y) > 0) continue;
        if (P.y == Q.y) {
          xl = std::min({xl, P.x, Q.x});
          xr = std::max({xr, P.x, Q.x});
        } else {
          const double X = P.x + (Y - P.y) * (Q.x - P.x) / (Q.y - P.y);
          xl = std::min(xl, X);
          xr = std::max(xr, X);
        }
      }
      if (!(xr >= xl)) continue;
      const long i0 = std::max(0L, long(std::ceil((xl - G.x_lo) / G.dx - tol)));
      const long i1 = std::min(long(G.nx), long(std::floor((xr - G.x_lo) / G.dx + tol)));
      for (long i = i0; i <= i1; ++i) {
        const Vec2 p{G.x(std::size_t(i)), Y};
        // Newton on the bilinear patch (1 - s)(B0 + y N0) + s (B1 + y N1) = p.
        double s = dot(p - B0, E) / dot(E, E), y = dot(p - B0, N0), det = 0.0;
        for (int it = 0; it < 8; ++it) {
          const Vec2 F = B0 + (s * E) + (y * N0) + ((s * y) * D) - p;
          const Vec2 Js = E + (y * D), Jy = N0 + (s * D);
          det = cross(Js, Jy);
          if (det == 0.0) break;
          const double ds = cross(F, Jy) / det, dy = cross(Js, F) / det;
          s -= ds;
          y -= dy;
          if (std::abs(ds) < 1e-14 && std::abs(dy) < 1e-14 * (1 + std::abs(y))) break;
        }
        if (!(s >= -tol && s <= 1 + tol && y >= -h_out_ - tol && y <= h_in_ + tol)) continue;
        if (!(det > 0)) fail(ErrorCode::AnnulusOverlap, "normal map folds inside the profile annulus");
        const std::size_t id = G.idx(std::size_t(i), std::size_t(j));
        if (claim[id] >= 0) {
          const std::size_t gap = std::min((k + M - std::size_t(claim[id])) % M, (std::size_t(claim[id]) + M - k) % M);
          if (gap > 2) fail(ErrorCode::AnnulusOverlap, "two parts of the boundary claim the same annulus point");
          continue;
        }
        claim[id] = int(k);
        ycoord[id] = y;
        ccoord[id] = (1 - s) * fr.beta[k] + s * fr.beta[k1];
      }
    }
  }

  // Even-odd fill of the boundary polygon, row by row.
  ControlFields out;
  out.t = t;
  out.inside.assign(N, 0);
  std::vector<double> xs;
  for (std::size_t j = 0; j <= G.ny; ++j) {
    const double Y = G.y(j);
    xs.clear();
    for (std::size_t k = 0; k < M; ++k) {
      const Vec2 P = fr.x[k], Q = fr.x[(k + 1) % M];
      if ((P.y <= Y) != (Q.y <= Y)) xs.push_back(P.x + (Y - P.y) * (Q.x - P.x) / (Q.y - P.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t m = 0; m + 1 < xs.size(); m += 2) {
      const long i0 = std::max(0L, long(std::ceil((xs[m] - G.x_lo) / G.dx)));
      const long i1 = std::min(long(G.nx), long(std::floor((xs[m + 1] - G.x_lo) / G.dx)));
      for (long i = i0; i <= i1; ++i) out.inside[G.idx(std::size_t(i), j)] = 1;
    }
  }

  const ProfileBank& bank = *bank_;
  const double top_low = bank.lower.U.back(), low_up = 1.0 / double(bank.n);
  out.u_lower.resize(N);
  out.u_upper.resize(N);
  for (std::size_t j = 0; j <= G.ny; ++j)
    for (std::size_t i = 0; i <= G.nx; ++i) {
      const std::size_t id = G.idx(i, j);
      double lo, up;
      if (claim[id] >= 0) {
        lo = bank.U(ycoord[id] / eps_);
        up = bank.V(ccoord[id], ycoord[id] / eps_);
      } else if (out.inside[id]) {
        lo = top_low;
        up = 1.0;
      } else {
        lo = 0.0;
        up = low_up;
      }
      out.u_lower[id] = lo;
      out.u_upper[id] = std::min(up, phi(G.x(i), G.y(j)));
    }
  return out;
}

std::vector<double> LimitConstruction::alpha_for_step(const ControlFields& now, const ControlFields& next, double dt,
                                                      bool additive) const {
  const PlaneGrid& G = grid_;
  const double a = dt * eps_ / (G.dx * G.dx);
  const auto Mv = plane_apply_operator(G, a, next.u_upper);
  std::vector<double> alpha(G.size(), 0.0);
  for (std::size_t j = 1; j < G.ny; ++j)
    for (std::size_t i = 1; i < G.nx; ++i) {
      const std::size_t id = G.idx(i, j);
      const double v = now.u_upper[id];
      const double r = v + dt * model_->f(v) / eps_ - Mv[id];
      if (r > 0) alpha[id] = additive ? r / dt : r / (dt * v);
    }
  return alpha;
}

PlaneGrid default_plane_grid(const MovingSet& ms, const ProfileBank& bank, double eps, double dx_factor) {
  if (!(eps > 0) || !(dx_factor > 0)) fail(ErrorCode::InvalidParameter, "eps and dx_factor must be positive");
  const Extent e = set_extent(ms);
  const double half = std::max(2.0 * e.radius, e.radius + eps * bank.reach_out() + 0.5);
  PlaneGrid G;
  G.dx = eps * dx_factor;
  G.nx = G.ny = std::size_t(std::ceil(2.0 * half / G.dx));
  G.x_lo = e.centre.x - 0.5 * double(G.nx) * G.dx;
  G.y_lo = e.centre.y - 0.5 * double(G.ny) * G.dx;
  return G;
}

// ---------------------------------------------------------------- verification

namespace {

double min_df(const ReactionModel& m) {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000; ++i) d = std::min(d, m.df(i / 1000.0));
  return d;
}

}  // namespace

std::vector<LimitReport> verify_limit(const MovingSet& ms, const ReactionModel& model, const ProfileBank& bank,
                                      const ECurve& ecurve, const std::vector<double>& eps_list,
                                      const VerifyOptions& opt) {
  for (double t : ms.t_grid) {
    const auto fr = frame_at(ms, t);
    for (double b : fr.beta)
      if (b < bank.c2 - 1e-9 || b > bank.c3 + 1e-9)
        fail(ErrorCode::InvalidParameter, "normal velocity outside the bank's speed bracket [c2, c3]");
  }
  const double dfmin = min_df(model);
  const double t0 = ms.t_begin(), T = ms.t_end() - ms.t_begin();

  // Every gate is checked before the first run.
  std::vector<PlaneGrid> grids;
  for (double eps : eps_list) {
    grids.push_back(default_plane_grid(ms, bank, eps, opt.dx_factor));
    LimitConstruction(model, ms, bank, eps, grids.back());
  }

  std::vector<LimitReport> reports;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    const PlaneGrid& G = grids[e];
    const LimitConstruction L(model, ms, bank, eps, G);
    const std::size_t steps = std::max<std::size_t>(1, std::size_t(std::llround(T / (eps * opt.dt_factor))));
    const double dt = T / double(steps);
    const double cell = G.dx * G.dx;

    LimitReport rep;
    rep.eps = eps;
    rep.n = bank.n;
    rep.dx = G.dx;
    rep.dt = dt;
    rep.monotonicity_margin = std::numeric_limits<double>::infinity();

    ControlFields now = L.fields_at(t0), next;
    const std::vector<double> u0 = now.u_upper;
    std::vector<double> mass(steps), effort(steps), l1(steps), tmid(steps);

    PlaneOptions po;
    po.eps = eps;
    po.T = T;
    po.dt = dt;
    po.additive = opt.additive;
    auto control = [&](std::size_t s, double t, double h, std::vector<double>& alpha) {
      next = L.fields_at(t0 + t + h);
      alpha = L.alpha_for_step(now, next, h, opt.additive);
      double m = 0.0, amax = 0.0;
      for (double a : alpha) {
        m += a;
        amax = std::max(amax, a);
      }
      mass[s] = m * cell;
      tmid[s] = t0 + t + 0.5 * h;
      effort[s] = instantaneous_effort(ms, ecurve, tmid[s]);
      if (!opt.additive) rep.monotonicity_margin = std::min(rep.monotonicity_margin, 1.0 + h * (dfmin / eps - amax));
    };
    auto observe = [&](std::size_t s, double, const std::vector<double>& u) {
      double err = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        err += std::abs(u[k] - double(next.inside[k]));
        rep.lower_violation = std::max(rep.lower_violation, next.u_lower[k] - u[k]);
        rep.upper_violation = std::max(rep.upper_violation, u[k] - next.u_upper[k]);
      }
      l1[s] = err * cell;
      rep.sandwich_violation = std::max(rep.lower_violation, rep.upper_violation);
      now = std::move(next);
    };
    run_plane_2d(model, G, u0, po, control, observe);

    std::size_t last_bin = std::size_t(-1);
    for (std::size_t s = 0; s < steps; ++s) {
      const double gap = std::abs(mass[s] - effort[s]);
      rep.l1_error = std::max(rep.l1_error, l1[s]);
      rep.mass_gap = std::max(rep.mass_gap, gap);
      if (effort[s] > 0) rep.max_rel_gap = std::max(rep.max_rel_gap, gap / effort[s]);
      const std::size_t bin = std::size_t(std::floor((tmid[s] - t0) / opt.sample_dt));
      if (bin != last_bin || s + 1 == steps) {
        last_bin = bin;
        rep.t.push_back(tmid[s]);
        rep.control_mass.push_back(mass[s]);
        rep.effort.push_back(effort[s]);
        rep.l1.push_back(l1[s]);
      }
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

HalfPlaneReport verify_halfplane(const ReactionModel& model, const ProfileBank& bank, const ECurve& ecurve, double c,
                                 double eps, double T, const VerifyOptions& opt) {
  if (!(eps > 0) || !(T > 0)) fail(ErrorCode::InvalidParameter, "eps and T must be positive");
  if (c < bank.c2 - 1e-12 || c > bank.c3 + 1e-12)
    fail(ErrorCode::InvalidParameter, "speed outside the bank's speed bracket [c2, c3]");
  // y is the inward coordinate; the boundary sits at y = c t.
  const double dx = eps * opt.dx_factor;
  const double lo = -eps * bank.reach_out() - 0.5, hi = c * T + eps * bank.reach_in() + 0.5;
  const std::size_t n = std::size_t(std::ceil((hi - lo) / dx));
  const std::size_t steps = std::max<std::size_t>(2, std::size_t(std::llround(T / (eps * opt.dt_factor))));
  const double dt = T / double(steps);
  const double a = dt * eps / (dx * dx);

  auto fields = [&](double t, std::vector<double>& low, std::vector<double>& up) {
    low.resize(n + 1);
    up.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const double y = (lo + double(i) * dx - c * t) / eps;
      low[i] = bank.U(y);
      up[i] = bank.V(c, y);
    }
  };

  HalfPlaneReport rep;
  rep.eps = eps;
  rep.c = c;
  rep.E = ecurve.E_at(c);
  std::vector<double> low, up, low1, up1, u, rhs(n - 1), diag(n - 1, 1 + 2 * a), off(n - 1, -a), alpha(n + 1);
  fields(0.0, low, up);
  u = low;
  u.front() = 0.0;
  u.back() = 1.0;
  double mass_sum = 0.0;
  std::size_t mass_count = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = double(s) * dt;
    fields(t + dt, low1, up1);
    double m = 0.0;
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      const double Mv = (1 + 2 * a) * up1[i] - a * (up1[i - 1] + up1[i + 1]);
      const double r = up[i] + dt * model.f(up[i]) / eps - Mv;
      if (r > 0) alpha[i] = opt.additive ? r / dt : r / (dt * up[i]);
      m += alpha[i] * dx;
    }
    if (t >= 0.5 * T) {
      mass_sum += m;
      ++mass_count;
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double sink = opt.additive ? alpha[i] : alpha[i] * u[i];
      rhs[i - 1] = u[i] + dt * (model.f(u[i]) / eps - sink);
    }
    rhs.front() += a * u.front();
    rhs.back() += a * u.back();
    // Thomas sweep for the constant-coefficient system.
    std::vector<double> cp(n - 1);
    double beta = diag[0];
    rhs[0] /= beta;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      cp[i] = off[i - 1] / beta;
      beta = diag[i] - off[i] * cp[i];
      rhs[i] = (rhs[i] - off[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 2; i-- > 0;) rhs[i] -= cp[i + 1] * rhs[i + 1];
    for (std::size_t i = 1; i < n; ++i) u[i] = rhs[i - 1];
    for (std::size_t i = 0; i <= n; ++i)
      rep.sandwich_violation = std::max({rep.sandwich_violation, low1[i] - u[i], u[i] - up1[i]});
    low.swap(low1);
    up.swap(up1);
  }
  rep.mass_per_length = mass_count ? mass_sum / double(mass_count) : 0.0;
  return rep;
}

}  // namespace frontctrl
