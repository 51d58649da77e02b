#include "frontctrl/path_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frontctrl/errors.hpp"

namespace frontctrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double hermite(double u, double u0, double u1, double p0, double p1, double s0, double s1) {
  const double h = u1 - u0, t = (u - u0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * h * s0 + (-2 * t3 + 3 * t2) * p1 +
         (t3 - t2) * h * s1;
}

double orbit_slope(const ReactionModel& m, double c, double u, double p) { return -c - m.f(u) / p; }

double weight(Functional fn, double u) { return fn == Functional::J0 ? 1.0 : (u > 0 ? 1.0 / u : kInf); }

}  // namespace

OrbitFunction::OrbitFunction(const ReactionModel& model, double c, std::vector<PhasePoint> pts)
    : model_(&model), c_(c), pts_(std::move(pts)) {
  // Keep strictly increasing U.
  std::vector<PhasePoint> clean;
  for (const auto& p : pts_)
    if (clean.empty() || p.U > clean.back().U) clean.push_back(p);
  pts_ = std::move(clean);
}

double OrbitFunction::operator()(double u) const {
  if (u <= pts_.front().U) return pts_.front().P;
  if (u >= pts_.back().U) return pts_.back().P;
  auto it = std::upper_bound(pts_.begin(), pts_.end(), u, [](double v, const PhasePoint& p) { return v < p.U; });
  const PhasePoint& a = *(it - 1);
  const PhasePoint& b = *it;
  if (a.P <= 1e-6 || b.P <= 1e-6) return a.P + (b.P - a.P) * (u - a.U) / (b.U - a.U);
  return hermite(u, a.U, b.U, a.P, b.P, orbit_slope(*model_, c_, a.U, a.P), orbit_slope(*model_, c_, b.U, b.P));
}

double OrbitFunction::sup() const {
  double s = 0.0;
  for (const auto& p : pts_) s = std::max(s, p.P);
  return s;
}

std::vector<PhasePoint> OrbitFunction::slice(double u0, double u1) const {
  std::vector<PhasePoint> out{{u0, (*this)(u0)}};
  for (const auto& p : pts_)
    if (p.U > u0 && p.U <= u1) out.push_back(p);
  if (out.back().U < u1) out.push_back({u1, (*this)(u1)});
  return out;
}

PathEvaluator::PathEvaluator(const PhasePath& path, const ReactionModel& model, double c) {
  for (const auto& seg : path.segments) {
    if (seg.kind == SegmentKind::VerticalJump) continue;
    const bool traj = seg.kind == SegmentKind::Trajectory;
    for (std::size_t i = 1; i < seg.points.size(); ++i) {
      const auto& a = seg.points[i - 1];
      const auto& b = seg.points[i];
      if (!(b.U > a.U)) continue;
      Piece pc{a.U, b.U, a.P, b.P, 0.0, 0.0, false};
      if (traj && a.P > 1e-6 && b.P > 1e-6) {
        pc.hermite = true;
        pc.s0 = orbit_slope(model, c, a.U, a.P);
        pc.s1 = orbit_slope(model, c, b.U, b.P);
      }
      pieces_.push_back(pc);
    }
  }
}

double PathEvaluator::operator()(double u) const {
  // First piece with u0 <= u < u1; pieces are sorted by u0.
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), u, [](double v, const Piece& p) { return v < p.u0; });
  if (it == pieces_.begin()) return pieces_.front().p0;
  const Piece& pc = *(it - 1);
  if (u >= pc.u1) return pc.p1;
  if (pc.hermite) return hermite(u, pc.u0, pc.u1, pc.p0, pc.p1, pc.s0, pc.s1);
  return pc.p0 + (pc.p1 - pc.p0) * (u - pc.u0) / (pc.u1 - pc.u0);
}

double path_cost(const PhasePath& path, const ReactionModel& model, double c, Functional fn) {
  // 5-point Gauss-Legendre on [0,1].
  static const double gx[5] = {0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155,
                               0.95308992296933200};
  static const double gw[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                               0.23931433524968324, 0.11846344252809454};
  double total = 0.0;
  for (const auto& seg : path.segments) {
    switch (seg.kind) {
      case SegmentKind::Trajectory: break;
      case SegmentKind::VerticalJump: {
        const double u = seg.points.front().U;
        const double dp = seg.points.back().P - seg.points.front().P;
        if (dp <= 0) break;
        if (fn == Functional::J1 && u <= 0) return kInf;
        total += dp * weight(fn, u);
        break;
      }
      case SegmentKind::Curve: {
        for (std::size_t i = 1; i < seg.points.size(); ++i) {
          const auto& a = seg.points[i - 1];
          const auto& b = seg.points[i];
          const double du = b.U - a.U, dp = b.P - a.P;
          double s = 0.0;
          for (int k = 0; k < 5; ++k) {
            const double u = a.U + gx[k] * du, p = a.P + gx[k] * dp;
            double v = dp;
            if (du != 0.0) v += (model.f(u) / p + c) * du;
            s += gw[k] * v * weight(fn, u);
          }
          total += s;
        }
        break;
      }
    }
  }
  return total;
}

StokesResult stokes_difference(const PhasePath& path1, const PhasePath& path2, const ReactionModel& model,
                               double c, Functional fn, std::size_t n_quad, int max_crossings) {
  StokesResult r;
  r.line_diff = path_cost(path1, model, c, fn) - path_cost(path2, model, c, fn);
  const PathEvaluator e1(path1, model, c), e2(path2, model, c);
  const double h = 1.0 / double(n_quad);
  double sum = 0.0;
  int last_sign = 0;
  for (std::size_t k = 0; k < n_quad; ++k) {
    const double u = double(k) * h;
    const double p1 = e1(u), p2 = e2(u);
    const double d = p1 - p2;
    // Coincident arcs differ by integration noise only.
    if (std::abs(d) <= 1e-9 * (1.0 + std::abs(p1))) continue;
    const int sg = d > 0 ? 1 : -1;
    if (last_sign != 0 && sg != last_sign) ++r.crossings;
    last_sign = sg;
    const double f = model.f(u);
    // Inner integral over P of the curl, in closed form.
    double g = 0.0;
    if (f != 0.0) g = f * (1.0 / p2 - 1.0 / p1);
    if (fn == Functional::J1) {
      if (u <= 0) return r.residual = kInf, r;
      g = g / u - d / (u * u);
    }
    sum += g;
  }
  if (r.crossings > max_crossings)
    fail(ErrorCode::RegionConstruction, "paths cross more often than max_crossings");
  // Path 1 forward, path 2 reversed: clockwise where P1 > P2.
  r.area_diff = -h * sum;
  r.residual = std::abs(r.line_diff - r.area_diff);
  return r;
}

namespace {

struct Branches {
  OrbitFunction sharp;
  std::optional<OrbitFunction> star;
};

Branches compute_branches(const ReactionModel& model, double c) {
  Branches b;
  auto up = integrate_manifold(model, c, Equilibrium::One, StopCondition::at_u(0.0));
  if (up.reason != StopReason::UTarget || !(up.end.P > 0))
    fail(ErrorCode::Unreachable, "stable manifold of one does not reach U=0; is c <= c*?");
  b.sharp = OrbitFunction(model, c, up.path.segments.front().points);
  if (model.bistable()) {
    auto lo = integrate_manifold(model, c, Equilibrium::Origin, StopCondition::at_u(model.u_star()));
    auto pts = lo.path.segments.front().points;
    pts.insert(pts.begin(), PhasePoint{0.0, 0.0});
    // Node regime: the orbit settles onto (u*, 0) instead of reaching it.
    if (lo.reason == StopReason::Converged && pts.back().U < model.u_star())
      pts.push_back({model.u_star(), 0.0});
    b.star = OrbitFunction(model, c, std::move(pts));
  }
  return b;
}

// Fixed-step RK4 for dP/dU = -c - f(U)/P from u0 to u0 + h (h may be negative).
double column_flow(const ReactionModel& m, double c, double u0, double h, double p, double fscale) {
  if (!(p > 0)) return -1.0;
  int n = 1 + int(std::ceil(std::abs(h) * fscale / (p * p)));
  n = std::min(n, 256);
  const double k = h / n;
  auto rhs = [&](double u, double q) { return -c - m.f(u) / q; };
  double u = u0;
  for (int i = 0; i < n; ++i) {
    double k1 = rhs(u, p);
    double q2 = p + 0.5 * k * k1;
    if (!(q2 > 0)) return -1.0;
    double k2 = rhs(u + 0.5 * k, q2);
    double q3 = p + 0.5 * k * k2;
    if (!(q3 > 0)) return -1.0;
    double k3 = rhs(u + 0.5 * k, q3);
    double q4 = p + k * k3;
    if (!(q4 > 0)) return -1.0;
    double k4 = rhs(u + k, q4);
    p += k / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!(p > 0) || !std::isfinite(p)) return -1.0;
    u += k;
  }
  return p;
}

// Accurate orbit from (u0, p0) to u1; empty if it reaches P = 0 first.
std::vector<PhasePoint> exact_orbit(const ReactionModel& m, double c, double u0, double p0, double u1,
                                    double p_floor = 0.0) {
  std::vector<OdeEvent> ev{{[u1](const State& y) { return y[0] - u1; }, 1},
                           {[p_floor](const State& y) { return y[1] - p_floor; }, 2}};
  OdeOptions opt;
  opt.p_bound = p_bound(m, c);
  OdeResult r = integrate_tw(m, c, State{u0, p0, 0.0}, 1, ev, nullptr, opt);
  if (r.event != 1) return {};
  std::vector<PhasePoint> pts;
  for (const auto& y : r.y) pts.push_back({y[0], y[1]});
  pts.back().U = u1;
  return pts;
}

void append_traj(PhasePath& path, const std::vector<PhasePoint>& pts) {
  if (!path.segments.empty() && path.segments.back().kind == SegmentKind::Trajectory) {
    auto& dst = path.segments.back().points;
    dst.insert(dst.end(), pts.begin() + 1, pts.end());
  } else {
    path.segments.push_back(Segment{SegmentKind::Trajectory, pts, {}});
  }
}

}  // namespace

constexpr std::size_t kSpan = 8;

GridResult grid_search(const ReactionModel& model, double c, Functional fn, std::size_t nU, std::size_t nP) {
  if (nU < 32 || nP < 32) fail(ErrorCode::InvalidParameter, "grid_search needs nU, nP >= 32");
  const Branches br = compute_branches(model, c);
  if (fn == Functional::J1 && !br.star)
    fail(ErrorCode::Unreachable, "J1 is infinite for every admissible path of a monostable model");

  const double hU = 1.0 / double(nU);
  const double pmax = 1.05 * br.sharp.sup();
  // Quadratically graded P nodes resolve orbits that pass close to P = 0.
  auto node = [&](std::size_t j) {
    const double t = double(j) / double(nP);
    return pmax * t * t;
  };
  const double p_land = 1e-5 * pmax;

  // Uniform columns, plus u* where the source changes sign.
  std::vector<double> Ucol;
  for (std::size_t i = 0; i <= nU; ++i) Ucol.push_back(double(i) * hU);
  if (model.bistable()) {
    const double us = model.u_star();
    const double r = us * double(nU);
    if (std::abs(r - std::round(r)) > 1e-9) Ucol.insert(std::upper_bound(Ucol.begin(), Ucol.end(), us), us);
    // Orbits leave (u*, 0) like sqrt(U - u*); grade the columns geometrically there.
    for (int k = 1; k <= 12; ++k) {
      const double v = us + hU * std::ldexp(1.0, -k);
      auto it = std::upper_bound(Ucol.begin(), Ucol.end(), v);
      if (std::abs(*(it - 1) - v) > 1e-14 && std::abs(*it - v) > 1e-14) Ucol.insert(it, v);
    }
  }
  const std::size_t nC = Ucol.size() - 1;
  std::vector<double> Psharp(nC + 1);
  for (std::size_t i = 0; i <= nC; ++i) Psharp[i] = br.sharp(Ucol[i]);
  Psharp[nC] = 0.0;
  double fscale = 0.0;
  for (std::size_t i = 0; i <= 200; ++i) fscale = std::max(fscale, std::abs(model.f(i / 200.0)));
  fscale = 2.0 * fscale + 1e-12;

  // Column i holds nodes P_j < P#(U_i). A move from node j jumps up to q and
  // follows the orbit through q to node k of a later column i+l (l <= kSpan),
  // or jumps onto the stable manifold of one and finishes.
  struct Origin {
    std::size_t col;
    std::size_t k;
    double q;
  };
  struct Column {
    std::vector<double> W;     // cost-to-go at each node
    std::vector<int> choice;   // index into origins, -1 for the manifold
    std::vector<Origin> origins;
  };
  std::vector<Column> col(nC + 1);
  auto count = [&](std::size_t i) {
    std::size_t m = 0;
    if (i == nC) return m;
    while (m <= nP && node(m) < Psharp[i]) ++m;
    return m;
  };

  struct Cand {
    double q, v;
    int idx;
  };
  std::vector<std::vector<Cand>> sorted(nC);
  std::vector<std::vector<double>> sufmin(nC);
  std::vector<std::vector<int>> sufarg(nC);
  // Best move from an arbitrary level p at column i (after the column is built).
  auto best_from = [&](std::size_t i, double p, double w, int& arg) -> double {
    const auto& cs = sorted[i];
    auto it = std::lower_bound(cs.begin(), cs.end(), p, [](const Cand& a, double v) { return a.q < v; });
    if (it == cs.end()) return kInf;
    const std::size_t idx = std::size_t(it - cs.begin());
    arg = sufarg[i][idx];
    return sufmin[i][idx] - p * w;
  };

  for (std::size_t i = nC; i-- > 0;) {
    const double w = weight(fn, Ucol[i]);
    const double du = Ucol[i] - Ucol[i + 1];
    Column& C = col[i];
    // Orbits of column i+1 nodes, then orbits already passing through column i+1.
    // Landings within p_land of P = 0 are skipped: forward orbits there are too
    // sensitive to reproduce with the accurate integrator.
    for (std::size_t k = 0, mn = count(i + 1); k < mn; ++k) {
      if (!std::isfinite(col[i + 1].W[k]) || node(k) < p_land) continue;
      const double q = column_flow(model, c, Ucol[i + 1], du, node(k), fscale);
      if (q > 0 && q < Psharp[i]) C.origins.push_back({i + 1, k, q});
    }
    for (const Origin& o : col[i + 1].origins) {
      if (o.col - i > kSpan) continue;
      const double q = column_flow(model, c, Ucol[i + 1], du, o.q, fscale);
      if (q > 0 && q < Psharp[i]) C.origins.push_back({o.col, o.k, q});
    }
    std::vector<Cand> cs;
    if (std::isfinite(w)) {
      cs.push_back({Psharp[i], Psharp[i] * w, -1});
      for (std::size_t t = 0; t < C.origins.size(); ++t) {
        const Origin& o = C.origins[t];
        cs.push_back({o.q, o.q * w + col[o.col].W[o.k], int(t)});
      }
    }
    std::sort(cs.begin(), cs.end(), [](const Cand& a, const Cand& b) { return a.q < b.q; });
    std::vector<double> sm(cs.size());
    std::vector<int> sa(cs.size());
    for (std::size_t t = cs.size(); t-- > 0;) {
      sm[t] = cs[t].v;
      sa[t] = cs[t].idx;
      if (t + 1 < cs.size() && sm[t + 1] < sm[t]) sm[t] = sm[t + 1], sa[t] = sa[t + 1];
    }
    sorted[i] = std::move(cs);
    sufmin[i] = std::move(sm);
    sufarg[i] = std::move(sa);

    const std::size_t m = count(i);
    C.W.assign(m, kInf);
    C.choice.assign(m, -2);
    for (std::size_t j = 0; j < m; ++j) {
      int arg = -2;
      double v = best_from(i, node(j), w, arg);
      if (std::isfinite(v)) C.W[j] = v, C.choice[j] = arg;
    }
  }

  // Start: jump at U = 0 (J0), or leave the origin's unstable orbit at a column.
  GridResult res;
  res.p_max = pmax;
  double best = kInf;
  std::size_t i0 = 0;
  double p0 = 0.0;
  int k0 = -2;
  if (fn == Functional::J0) {
    int arg = -2;
    double v = best_from(0, 0.0, 1.0, arg);
    if (v < best) best = v, i0 = 0, p0 = 0.0, k0 = arg;
  }
  if (br.star) {
    for (std::size_t i = 1; i < nC && Ucol[i] <= br.star->u_hi(); ++i) {
      const double p = (*br.star)(Ucol[i]);
      int arg = -2;
      double v = best_from(i, p, weight(fn, Ucol[i]), arg);
      if (v < best) best = v, i0 = i, p0 = p, k0 = arg;
    }
  }
  if (!std::isfinite(best)) fail(ErrorCode::Unreachable, "no admissible lattice path reaches (1,0)");
  res.dp_value = best;

  // Rebuild the path with accurate orbits between columns.
  PhasePath& path = res.path;
  path.c = c;
  if (i0 > 0) {
    auto pts = br.star->slice(0.0, Ucol[i0]);
    pts.front() = {0.0, 0.0};
    append_traj(path, pts);
  } else {
    path.segments.push_back(Segment{SegmentKind::VerticalJump, {{0.0, 0.0}, {0.0, 0.0}}, {}});
  }
  double cost = 0.0;
  double p = p0;
  int k = k0;
  std::size_t i = i0;
  while (true) {
    const double w = weight(fn, Ucol[i]);
    const Origin* o = k < 0 ? nullptr : &col[i].origins[std::size_t(k)];
    double q = o ? std::max(o->q, p) : Psharp[i];
    std::vector<PhasePoint> orbit;
    if (o) {
      // Orbits are ordered in q: nudge upward if the lattice flow grazed P = 0.
      for (double bump = 0.0; orbit.empty(); bump = std::max(2 * bump, 1e-12 * (1 + q))) {
        if (bump > 1e-6 * (1 + q)) fail(ErrorCode::Unreachable, "lattice orbit left the admissible region");
        orbit = exact_orbit(model, c, Ucol[i], q + bump, Ucol[o->col]);
        if (!orbit.empty()) q += bump;
      }
    }
    if (q > p) {
      if (path.segments.back().kind == SegmentKind::VerticalJump && path.back().U == Ucol[i])
        path.segments.back().points.back().P = q;
      else
        path.jump_to(q);
      cost += (q - p) * w;
    }
    if (!o) {
      auto tail = br.sharp.slice(Ucol[i], 1.0);
      tail.back() = {1.0, 0.0};
      append_traj(path, tail);
      break;
    }
    append_traj(path, orbit);
    p = orbit.back().P;
    k = col[o->col].choice[o->k];
    i = o->col;
  }
  if (path.segments.front().kind == SegmentKind::VerticalJump &&
      path.segments.front().points.back().P <= path.segments.front().points.front().P)
    path.segments.erase(path.segments.begin());
  res.cost = cost;
  return res;
}

PhasePath random_admissible_path(const ReactionModel& model, double c, Functional fn, std::mt19937_64& rng,
                                 const RandomPathOptions& opt) {
  const Branches br = compute_branches(model, c);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  const int G = opt.grid;
  const double du = 1.0 / G;
  const double p_floor = 0.02 * br.sharp.sup();
  PhasePath path;
  path.c = c;

  const bool follow_star = fn == Functional::J1 || (br.star && U01(rng) < 0.5);
  int k;  // current column index, U = k/G
  double p;
  if (follow_star) {
    if (!br.star) fail(ErrorCode::InvalidParameter, "J1 paths need a bistable model");
    const int k_hi = int(std::floor(model.u_star() * G));
    const int k_lo = fn == Functional::J1 ? int(std::ceil(opt.min_start * G)) : 1;
    k = k_lo + int(U01(rng) * (k_hi - k_lo + 1));
    k = std::clamp(k, k_lo, k_hi);
    auto pts = br.star->slice(0.0, k * du);
    pts.front() = {0.0, 0.0};
    append_traj(path, pts);
    p = pts.back().P;
  } else {
    k = 0;
    p = (0.3 + 0.65 * U01(rng)) * br.sharp(0.0);
    path.segments.push_back(Segment{SegmentKind::VerticalJump, {{0.0, 0.0}, {0.0, p}}, {}});
  }
  const int k_end = int(std::floor(opt.end_by * G));

  for (int guard = 0; guard < 10 * G; ++guard) {
    const double u = k * du;
    const double ps = br.sharp(u);
    if (k >= k_end || U01(rng) < 0.1) {
      path.jump_to(ps);
      auto tail = br.sharp.slice(u, 1.0);
      tail.back() = {1.0, 0.0};
      append_traj(path, tail);
      return path;
    }
    if (U01(rng) < opt.jump_prob && p < ps) {
      p += (0.2 + 0.6 * U01(rng)) * (ps - p);
      path.jump_to(p);
    }
    const int step = std::min(1 + int(U01(rng) * 8), k_end - k);
    auto orbit = exact_orbit(model, c, u, p, (k + step) * du, p_floor);
    if (orbit.empty()) {
      // Falls too low before the next stop: lift now and retry.
      p += 0.5 * (ps - p);
      path.jump_to(p);
      continue;
    }
    append_traj(path, orbit);
    k += step;
    p = orbit.back().P;
  }
  path.jump_to(br.sharp(k * du));
  auto tail = br.sharp.slice(k * du, 1.0);
  tail.back() = {1.0, 0.0};
  append_traj(path, tail);
  return path;
}

}  // namespace frontctrl
