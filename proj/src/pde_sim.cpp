#include "frontctrl/pde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "frontctrl/errors.hpp"

namespace frontctrl {

namespace {

// Thomas algorithm; lo[0] and up[n-1] are ignored. Overwrites rhs.
void solve_tridiag(const std::vector<double>& lo, const std::vector<double>& di, const std::vector<double>& up,
                   std::vector<double>& rhs, std::vector<double>& work) {
  const std::size_t n = rhs.size();
  work.resize(n);
  double beta = di[0];
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    work[i] = up[i - 1] / beta;
    beta = di[i] - lo[i] * work[i];
    rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= work[i + 1] * rhs[i + 1];
}

// Constant-coefficient variant for the common case.
void solve_tridiag(double lo, double di, double up, std::vector<double>& rhs, std::vector<double>& work) {
  const std::size_t n = rhs.size();
  work.resize(n);
  double beta = di;
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    work[i] = up / beta;
    beta = di - lo * work[i];
    rhs[i] = (rhs[i] - lo * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= work[i + 1] * rhs[i + 1];
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0) || !(T >= 0)) fail(ErrorCode::InvalidParameter, "need dt > 0 and T >= 0");
  return std::size_t(std::llround(T / dt));
}

}  // namespace

Grid1D::Grid1D(double lo, double hi, std::size_t cells) : x_lo(lo), x_hi(hi), n(cells) {
  if (!(hi > lo) || cells < 2) fail(ErrorCode::InvalidParameter, "Grid1D needs x_hi > x_lo and n >= 2");
}

Grid1D Grid1D::with_spacing(double lo, double hi, double dx) {
  if (!(dx > 0)) fail(ErrorCode::InvalidParameter, "dx must be positive");
  return Grid1D(lo, hi, std::size_t(std::llround((hi - lo) / dx)));
}

void fit_trace(FrontTrace& tr) {
  const std::size_t n = tr.times.size();
  if (n < 2) return;
  const double t_half = 0.5 * (tr.times.front() + tr.times.back());
  double st = 0, sx = 0, stt = 0, stx = 0, m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tr.times[i] < t_half || !std::isfinite(tr.positions[i])) continue;
    st += tr.times[i], sx += tr.positions[i], m += 1;
    stt += tr.times[i] * tr.times[i], stx += tr.times[i] * tr.positions[i];
  }
  if (m < 2) return;
  const double den = m * stt - st * st;
  tr.speed = (m * stx - st * sx) / den;
  const double icpt = (sx - tr.speed * st) / m;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tr.times[i] < t_half || !std::isfinite(tr.positions[i])) continue;
    const double r = tr.positions[i] - (icpt + tr.speed * tr.times[i]);
    ss += r * r;
  }
  tr.residual = std::sqrt(ss / m);
}

double front_position(const std::vector<double>& u, const Grid1D& g) {
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    if (u[i] < 0.5 && u[i + 1] >= 0.5) return g.x(i) + g.dx() * (0.5 - u[i]) / (u[i + 1] - u[i]);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> control_on_grid(const TravelingProfile& p, CouplingKind kind, const Grid1D& g, double x0,
                                    double mass_factor) {
  const std::size_t N = g.nodes();
  const double dx = g.dx();
  std::vector<double> out(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double s = g.x(i) - x0;
    out[i] = kind == CouplingKind::Additive ? p.control.density_at(s) : p.alpha_at(s);
  }
  const double half = 2.0 * dx;
  for (const Atom& a : p.control.atoms) {
    double mass = a.mass;
    if (kind == CouplingKind::Multiplicative) {
      if (!(a.U > 0)) fail(ErrorCode::InvalidParameter, "multiplicative atom at U = 0 has infinite effort");
      mass /= a.U;
    }
    const double xa = x0 + a.x;
    const auto i0 = std::size_t(std::max(0.0, std::floor((xa - half - g.x_lo) / dx)));
    const auto i1 = std::min(N - 1, std::size_t(std::max(0.0, std::ceil((xa + half - g.x_lo) / dx))));
    double wsum = 0.0;
    std::vector<double> w(i1 - i0 + 1, 0.0);
    for (std::size_t i = i0; i <= i1; ++i) {
      w[i - i0] = std::max(0.0, 1.0 - std::abs(g.x(i) - xa) / half);
      wsum += w[i - i0];
    }
    if (!(wsum > 0)) continue;
    for (std::size_t i = i0; i <= i1; ++i) out[i] += mass * w[i - i0] / (wsum * dx);
  }
  for (double& v : out) v *= mass_factor;
  return out;
}

std::vector<double> profile_on_grid(const TravelingProfile& p, const Grid1D& g, double x0) {
  std::vector<double> u(g.nodes());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = p.U_at(g.x(i) - x0);
  return u;
}

std::vector<double> step_on_grid(const Grid1D& g, double x0, double width) {
  std::vector<double> u(g.nodes());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.5 * (1.0 + std::tanh((g.x(i) - x0) / width));
  u.front() = 0.0;
  u.back() = 1.0;
  return u;
}

Run1DResult run_1d(const ReactionModel& model, const ControlCoupling& coupling, const TravelingProfile* control,
                   const std::vector<double>& u0, const Run1DOptions& opt) {
  const Grid1D& g = opt.grid;
  const std::size_t N = g.nodes();
  if (u0.size() != N) fail(ErrorCode::InvalidParameter, "u0 does not match the grid");
  const double dx = g.dx(), dt = opt.dt;
  const double a = dt / (dx * dx);
  if (!opt.implicit_diffusion && dt > 0.4 * dx * dx)
    fail(ErrorCode::CflViolation, "explicit diffusion needs dt <= 0.4 dx^2");
  const std::size_t steps = step_count(opt.T, dt);
  const double c = control ? control->c : 0.0;

  Run1DResult res;
  std::vector<double> u = u0, r(N - 2), work, unew(N);
  res.u_min = *std::min_element(u.begin(), u.end());
  res.u_max = *std::max_element(u.begin(), u.end());
  const std::size_t trace_every = std::max<std::size_t>(1, std::size_t(std::llround(opt.trace_dt / dt)));
  auto record = [&](double t) {
    const double xf = front_position(u, g);
    const double margin = opt.boundary_margin_cells * dx;
    if (std::isfinite(xf) && (xf - g.x_lo < margin || g.x_hi - xf < margin))
      fail(ErrorCode::FrontHitBoundary, "front came within the boundary margin");
    res.trace.times.push_back(t);
    res.trace.positions.push_back(xf);
  };
  record(0.0);

  std::vector<double> ctrl;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = double(s) * dt;
    if (control) ctrl = control_on_grid(*control, coupling.kind, g, opt.control_origin + c * t, opt.mass_factor);
    double applied = 0.0;
    for (std::size_t i = 1; i + 1 < N; ++i) {
      const double pre = u[i] + dt * model.f(u[i]);
      double sink = control ? coupling(u[i], ctrl[i]) : 0.0;
      if (opt.clamp_sink && sink * dt > pre) sink = std::max(pre, 0.0) / dt;
      applied += sink * dx;
      r[i - 1] = pre - dt * sink;
    }
    res.applied_control = applied;
    if (opt.implicit_diffusion) {
      r.front() += a * u.front();
      r.back() += a * u.back();
      solve_tridiag(-a, 1.0 + 2.0 * a, -a, r, work);
      std::copy(r.begin(), r.end(), u.begin() + 1);
    } else {
      unew = u;
      for (std::size_t i = 1; i + 1 < N; ++i) unew[i] = r[i - 1] + a * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
      u.swap(unew);
    }
    for (double v : u) res.u_min = std::min(res.u_min, v), res.u_max = std::max(res.u_max, v);
    if ((s + 1) % trace_every == 0) record(double(s + 1) * dt);
  }
  res.t = double(steps) * dt;
  fit_trace(res.trace);
  res.u = std::move(u);
  return res;
}

StripResult run_strip_2d(const ReactionModel& model, const std::vector<double>& z, double c,
                         const std::vector<double>& u0, const StripOptions& opt) {
  const Grid1D& g = opt.grid;
  const std::size_t Nx = g.nodes(), Ny = opt.ny + 1;
  if (opt.ny < 2) fail(ErrorCode::InvalidParameter, "strip needs ny >= 2");
  if (u0.size() != Nx * Ny || z.size() != Nx * Ny) fail(ErrorCode::InvalidParameter, "strip arrays do not match the grid");
  const double dx = g.dx(), dy = 1.0 / double(opt.ny), dt = opt.dt;
  const std::size_t steps = step_count(opt.T, dt);
  auto at = [Nx](std::size_t i, std::size_t j) { return j * Nx + i; };

  // xi-direction: diffusion plus co-moving advection, central differences.
  const double ax = dt / (dx * dx), bx = dt * c / (2.0 * dx);
  if (std::abs(c) * dx >= 2.0) fail(ErrorCode::CflViolation, "co-moving advection needs |c| dx < 2");
  const double lx = -(ax - bx), dxg = 1.0 + 2.0 * ax, ux = -(ax + bx);
  // y-direction: Neumann by reflection.
  const double ay = dt / (dy * dy);
  std::vector<double> ylo(Ny, -ay), ydi(Ny, 1.0 + 2.0 * ay), yup(Ny, -ay);
  yup[0] = -2.0 * ay;
  ylo[Ny - 1] = -2.0 * ay;

  StripResult res;
  std::vector<double> u = u0, zeff(Nx * Ny, 0.0), row(Nx - 2), colv(Ny), work;
  res.u_min = *std::min_element(u.begin(), u.end());
  res.u_max = *std::max_element(u.begin(), u.end());
  const std::size_t trace_every = std::max<std::size_t>(1, std::size_t(std::llround(opt.trace_dt / dt)));
  std::vector<double> mid(Nx);
  auto record = [&](double t) {
    for (std::size_t i = 0; i < Nx; ++i) mid[i] = u[at(i, Ny / 2)];
    res.trace.times.push_back(t);
    res.trace.positions.push_back(front_position(mid, g) + c * t);
  };
  record(0.0);

  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t j = 0; j < Ny; ++j) {
      for (std::size_t i = 1; i + 1 < Nx; ++i) {
        const std::size_t k = at(i, j);
        const double pre = u[k] + dt * model.f(u[k]);
        double sink = z[k];
        if (sink * dt > pre) sink = std::max(pre, 0.0) / dt;
        zeff[k] = sink;
        row[i - 1] = pre - dt * sink;
      }
      row.front() -= lx * u[at(0, j)];
      row.back() -= ux * u[at(Nx - 1, j)];
      solve_tridiag(lx, dxg, ux, row, work);
      for (std::size_t i = 1; i + 1 < Nx; ++i) u[at(i, j)] = row[i - 1];
    }
    for (std::size_t i = 1; i + 1 < Nx; ++i) {
      for (std::size_t j = 0; j < Ny; ++j) colv[j] = u[at(i, j)];
      solve_tridiag(ylo, ydi, yup, colv, work);
      for (std::size_t j = 0; j < Ny; ++j) u[at(i, j)] = colv[j];
    }
    for (double v : u) res.u_min = std::min(res.u_min, v), res.u_max = std::max(res.u_max, v);
    if ((s + 1) % trace_every == 0) record(double(s + 1) * dt);
  }
  fit_trace(res.trace);

  // Trapezoid integrals over the truncated strip of unit height.
  double zl1 = 0.0, fint = 0.0;
  for (std::size_t j = 0; j < Ny; ++j) {
    const double wy = (j == 0 || j + 1 == Ny) ? 0.5 : 1.0;
    for (std::size_t i = 0; i < Nx; ++i) {
      const double w = wy * ((i == 0 || i + 1 == Nx) ? 0.5 : 1.0) * dx * dy;
      zl1 += w * zeff[at(i, j)];
      fint += w * model.f(u[at(i, j)]);
    }
  }
  res.l1_control = zl1;
  res.integral_f = fint;
  res.mc_residual = std::abs(zl1 - fint - c);
  res.settled = std::isfinite(res.trace.residual) && res.trace.residual < opt.settle_tol;
  res.u = std::move(u);
  return res;
}

namespace {

// Interior nodes of the plane, i fastest. The system (1 + 4a) u - a (sum of
// neighbours) = b is solved by conjugate gradients preconditioned with the
// factored operator (I - aX)(I - aY).
class PlaneImplicit {
 public:
  PlaneImplicit(std::size_t nx, std::size_t ny, double a) : mx_(nx - 1), my_(ny - 1), a_(a) {
    factor(mx_, cx_, dx_);
    factor(my_, cy_, dy_);
  }

  std::size_t size() const { return mx_ * my_; }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const double d = 1.0 + 4.0 * a_;
    for (std::size_t j = 0; j < my_; ++j)
      for (std::size_t i = 0; i < mx_; ++i) {
        const std::size_t q = j * mx_ + i;
        double nb = 0.0;
        if (i > 0) nb += x[q - 1];
        if (i + 1 < mx_) nb += x[q + 1];
        if (j > 0) nb += x[q - mx_];
        if (j + 1 < my_) nb += x[q + mx_];
        y[q] = d * x[q] - a_ * nb;
      }
  }

  void precondition(const std::vector<double>& r, std::vector<double>& z) const {
    z = r;
    // Rows: Thomas sweeps along i with the shared factorisation.
    for (std::size_t j = 0; j < my_; ++j) {
      double* row = z.data() + j * mx_;
      row[0] *= dx_[0];
      for (std::size_t i = 1; i < mx_; ++i) row[i] = (row[i] + a_ * row[i - 1]) * dx_[i];
      for (std::size_t i = mx_ - 1; i-- > 0;) row[i] -= cx_[i + 1] * row[i + 1];
    }
    // Columns, swept for all i at once.
    for (std::size_t i = 0; i < mx_; ++i) z[i] *= dy_[0];
    for (std::size_t j = 1; j < my_; ++j) {
      double* cur = z.data() + j * mx_;
      const double* prev = cur - mx_;
      for (std::size_t i = 0; i < mx_; ++i) cur[i] = (cur[i] + a_ * prev[i]) * dy_[j];
    }
    for (std::size_t j = my_ - 1; j-- > 0;) {
      double* cur = z.data() + j * mx_;
      const double* next = cur + mx_;
      const double c = cy_[j + 1];
      for (std::size_t i = 0; i < mx_; ++i) cur[i] -= c * next[i];
    }
  }

  /// Starts from the factored solve; stops when every residual is below tol.
  void solve(const std::vector<double>& b, std::vector<double>& x, double tol = 1e-11) {
    const std::size_t n = size();
    r_.resize(n);
    z_.resize(n);
    p_.resize(n);
    ap_.resize(n);
    precondition(b, x);
    apply(x, ap_);
    for (std::size_t k = 0; k < n; ++k) r_[k] = b[k] - ap_[k];
    auto rmax = [&] {
      double m = 0.0;
      for (double v : r_) m = std::max(m, std::abs(v));
      return m;
    };
    if (rmax() <= tol) return;
    precondition(r_, z_);
    p_ = z_;
    double rz = std::inner_product(r_.begin(), r_.end(), z_.begin(), 0.0);
    for (int it = 0; it < 500; ++it) {
      apply(p_, ap_);
      const double alpha = rz / std::inner_product(p_.begin(), p_.end(), ap_.begin(), 0.0);
      double m = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += alpha * p_[k];
        r_[k] -= alpha * ap_[k];
        m = std::max(m, std::abs(r_[k]));
      }
      if (m <= tol) return;
      precondition(r_, z_);
      const double rz_new = std::inner_product(r_.begin(), r_.end(), z_.begin(), 0.0);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < n; ++k) p_[k] = z_[k] + beta * p_[k];
    }
    fail(ErrorCode::BlowUp, "implicit diffusion solve did not converge");
  }

 private:
  // Elimination factors of the constant tridiagonal (-a, 1 + 2a, -a).
  void factor(std::size_t m, std::vector<double>& c, std::vector<double>& inv) const {
    c.assign(m, 0.0);
    inv.assign(m, 0.0);
    double beta = 1.0 + 2.0 * a_;
    inv[0] = 1.0 / beta;
    for (std::size_t k = 1; k < m; ++k) {
      c[k] = -a_ / beta;
      beta = 1.0 + 2.0 * a_ + a_ * c[k];
      inv[k] = 1.0 / beta;
    }
  }

  std::size_t mx_, my_;
  double a_;
  std::vector<double> cx_, dx_, cy_, dy_;
  std::vector<double> r_, z_, p_, ap_;
};

}  // namespace

std::vector<double> plane_apply_operator(const PlaneGrid& G, double a, const std::vector<double>& v) {
  std::vector<double> out = v;
  for (std::size_t j = 1; j < G.ny; ++j)
    for (std::size_t i = 1; i < G.nx; ++i)
      out[G.idx(i, j)] = (1.0 + 4.0 * a) * v[G.idx(i, j)] -
                         a * (v[G.idx(i - 1, j)] + v[G.idx(i + 1, j)] + v[G.idx(i, j - 1)] + v[G.idx(i, j + 1)]);
  return out;
}

std::vector<Snapshot> run_plane_2d(const ReactionModel& model, const PlaneGrid& G, const std::vector<double>& u0,
                                   const PlaneOptions& opt, const PlaneControl& alpha, const PlaneObserver& observer) {
  if (!(opt.eps > 0)) fail(ErrorCode::InvalidParameter, "eps must be positive");
  if (G.dx > opt.eps / 4.0 * (1.0 + 1e-12)) fail(ErrorCode::LayerUnderresolved, "plane runs need dx <= eps/4");
  if (u0.size() != G.size()) fail(ErrorCode::InvalidParameter, "u0 does not match the plane grid");
  if (G.nx < 2 || G.ny < 2) fail(ErrorCode::InvalidParameter, "plane grid needs at least 2 cells per side");
  const double dt = opt.dt, eps = opt.eps;
  const double a = dt * eps / (G.dx * G.dx);
  const std::size_t steps = step_count(opt.T, dt);
  const std::size_t nx = G.nx, ny = G.ny, mx = nx - 1;
  const double bv = opt.boundary_value;

  std::vector<double> u = u0, al(G.size(), 0.0);
  for (std::size_t i = 0; i <= nx; ++i) u[G.idx(i, 0)] = u[G.idx(i, ny)] = bv;
  for (std::size_t j = 0; j <= ny; ++j) u[G.idx(0, j)] = u[G.idx(nx, j)] = bv;

  PlaneImplicit solver(nx, ny, a);
  std::vector<double> b(solver.size()), x(solver.size());
  std::vector<Snapshot> snaps;
  auto maybe_snap = [&](double t) {
    for (double ts : opt.snapshot_times)
      if (std::abs(ts - t) <= 0.5 * dt) snaps.push_back({t, u});
  };
  maybe_snap(0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = double(s) * dt;
    if (alpha) alpha(s, t, dt, al);
    for (std::size_t j = 1; j < ny; ++j)
      for (std::size_t i = 1; i < nx; ++i) {
        const std::size_t k = G.idx(i, j), q = (j - 1) * mx + (i - 1);
        const double sink = opt.additive ? al[k] : al[k] * u[k];
        double rhs = u[k] + dt * (model.f(u[k]) / eps - sink);
        // Dirichlet neighbours move to the right-hand side.
        const int edges = (i == 1) + (i + 1 == nx) + (j == 1) + (j + 1 == ny);
        rhs += a * bv * edges;
        b[q] = rhs;
      }
    solver.solve(b, x);
    for (std::size_t j = 1; j < ny; ++j)
      for (std::size_t i = 1; i < nx; ++i) u[G.idx(i, j)] = x[(j - 1) * mx + (i - 1)];
    const double tn = double(s + 1) * dt;
    if (observer) observer(s, tn, u);
    maybe_snap(tn);
  }
  return snaps;
}

}  // namespace frontctrl
