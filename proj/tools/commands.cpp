#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "frontctrl/csv.hpp"
#include "frontctrl/errors.hpp"
#include "frontctrl/interface_limit.hpp"
#include "frontctrl/optimal_control.hpp"
#include "frontctrl/path_oracle.hpp"
#include "frontctrl/pde_sim.hpp"
#include "frontctrl/phase_plane.hpp"

namespace frontctrl::cli {

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

unsigned thread_count(const RunConfig& cfg) {
  if (cfg.numerics.threads > 0) return cfg.numerics.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = n == 1 ? lo : lo + (hi - lo) * double(k) / double(n - 1);
  return v;
}

std::string output_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) fail(ErrorCode::Config, "cannot create output directory " + cfg.output_dir);
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void save(const RunConfig& cfg, const CsvWriter& w, const std::string& name, std::ostream& out) {
  const std::string path = output_path(cfg, name);
  w.write(path);
  out << "wrote " << path << "\n";
}

Functional functional_of(const std::string& problem) { return problem == "p1" ? Functional::J0 : Functional::J1; }

TravelingProfile solve(const ReactionModel& model, const std::string& problem, double c) {
  return problem == "p1" ? solve_P1(model, c) : solve_P2(model, c);
}

double trapezoid(const std::vector<double>& v, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v[i] + v[i + 1]) * dx;
  return s;
}

// Dense field: one CSV row per grid row.
CsvWriter snapshot_csv(double t, std::size_t nx, std::size_t ny, double dx, const std::vector<double>& u) {
  CsvWriter w;
  w.comment("t=" + format_number(t) + " nx=" + std::to_string(nx) + " ny=" + std::to_string(ny) +
            " dx=" + format_number(dx));
  for (std::size_t j = 0; j < ny; ++j)
    w.row(std::vector<double>(u.begin() + std::ptrdiff_t(j * nx), u.begin() + std::ptrdiff_t((j + 1) * nx)));
  return w;
}

CsvWriter trace_csv(const FrontTrace& tr) {
  CsvWriter w({"t", "front_x", "speed_est"});
  const std::size_t m = tr.times.size();
  for (std::size_t k = 0; k < m; ++k) {
    double v = std::nan("");
    if (m >= 2) {
      const std::size_t a = k == 0 ? 0 : k - 1, b = k + 1 == m ? k : k + 1;
      v = (tr.positions[b] - tr.positions[a]) / (tr.times[b] - tr.times[a]);
    }
    w.row({tr.times[k], tr.positions[k], v});
  }
  w.comment("fit speed=" + format_number(tr.speed) + " residual=" + format_number(tr.residual));
  return w;
}

// Segment end times: requested snapshots inside (0, T), then T.
std::vector<double> segment_ends(const std::vector<double>& snaps, double T) {
  std::vector<double> ends;
  for (double s : snaps)
    if (s > 0.0 && s < T) ends.push_back(s);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  ends.push_back(T);
  return ends;
}

void append_trace(FrontTrace& all, const FrontTrace& part, double t0, double shift) {
  for (std::size_t k = 0; k < part.times.size(); ++k) {
    if (!all.times.empty() && k == 0 && part.times[k] == 0.0) continue;
    all.times.push_back(part.times[k] + t0);
    all.positions.push_back(part.positions[k] + shift);
  }
}

int simulate_1d(const RunConfig& cfg, const ReactionModel& model, std::ostream& out) {
  const auto& s = cfg.simulate;
  const Grid1D grid = Grid1D::with_spacing(s.x_lo, s.x_hi, s.dx);
  std::optional<TravelingProfile> profile;
  ControlCoupling coupling;
  if (s.control != "none") {
    profile = solve(model, s.control, s.c);
    if (s.control == "p2") coupling.kind = CouplingKind::Multiplicative;
  }
  std::vector<double> u =
      profile ? profile_on_grid(*profile, grid, s.control_origin) : step_on_grid(grid, s.front_x0);

  FrontTrace trace;
  double t0 = 0.0, applied = 0.0;
  for (double t1 : segment_ends(s.snapshots, s.T)) {
    Run1DOptions o;
    o.grid = grid;
    o.T = t1 - t0;
    o.dt = s.dt;
    o.trace_dt = s.trace_dt;
    o.mass_factor = s.mass_factor;
    o.control_origin = s.control_origin + (profile ? profile->c * t0 : 0.0);
    auto r = run_1d(model, coupling, profile ? &*profile : nullptr, u, o);
    append_trace(trace, r.trace, t0, 0.0);
    u = std::move(r.u);
    applied = r.applied_control;
    t0 = t1;
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%08.3f.csv", t1);
    save(cfg, snapshot_csv(t1, grid.nodes(), 1, grid.dx(), u), name, out);
  }
  fit_trace(trace);
  save(cfg, trace_csv(trace), "trace.csv", out);
  out << "speed = " << fixed(trace.speed, 7) << "\n";
  out << "trace_residual = " << sci(trace.residual) << "\n";
  if (profile) out << "applied_control = " << fixed(applied, 7) << "\n";
  return kOk;
}

int simulate_strip(const RunConfig& cfg, const ReactionModel& model, std::ostream& out) {
  const auto& s = cfg.simulate;
  const Grid1D grid = Grid1D::with_spacing(s.x_lo, s.x_hi, s.dx);
  const std::size_t nx = grid.nodes(), ny = s.ny + 1;
  std::vector<double> z1(nx, 0.0), u1;
  if (s.control != "none") {
    const auto p = solve(model, s.control, s.c);
    z1 = control_on_grid(p, CouplingKind::Additive, grid, s.control_origin, s.mass_factor);
    u1 = profile_on_grid(p, grid, s.control_origin);
  } else {
    u1 = step_on_grid(grid, s.front_x0);
  }
  std::vector<double> z(nx * ny), u(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      z[j * nx + i] = z1[i];
      u[j * nx + i] = u1[i];
    }

  FrontTrace trace;
  StripResult last;
  double t0 = 0.0;
  for (double t1 : segment_ends(s.snapshots, s.T)) {
    StripOptions o;
    o.grid = grid;
    o.ny = s.ny;
    o.T = t1 - t0;
    o.dt = s.dt;
    o.trace_dt = s.trace_dt;
    last = run_strip_2d(model, z, s.c, u, o);
    append_trace(trace, last.trace, t0, s.c * t0);
    u = last.u;
    t0 = t1;
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%08.3f.csv", t1);
    save(cfg, snapshot_csv(t1, nx, ny, grid.dx(), u), name, out);
  }
  fit_trace(trace);
  save(cfg, trace_csv(trace), "trace.csv", out);
  out << "speed = " << fixed(trace.speed, 7) << "\n";
  out << "l1_control = " << fixed(last.l1_control, 7) << "\n";
  out << "integral_f = " << fixed(last.integral_f, 7) << "\n";
  out << "mc_residual = " << sci(last.mc_residual) << "\n";
  out << "settled = " << (last.settled ? "yes" : "no") << "\n";
  return kOk;
}

int simulate_plane(const RunConfig& cfg, const ReactionModel& model, std::ostream& out) {
  const auto& s = cfg.simulate;
  PlaneGrid grid;
  const double half = 2.0 * s.radius;
  grid.dx = s.dx;
  grid.nx = grid.ny = std::size_t(std::ceil(2.0 * half / s.dx));
  grid.x_lo = grid.y_lo = -0.5 * double(grid.nx) * s.dx;
  const double w = s.eps * std::sqrt(2.0);
  std::vector<double> u0(grid.size());
  for (std::size_t j = 0; j <= grid.ny; ++j)
    for (std::size_t i = 0; i <= grid.nx; ++i) {
      const double r = std::hypot(grid.x(i), grid.y(j));
      u0[grid.idx(i, j)] = (i == 0 || j == 0 || i == grid.nx || j == grid.ny) ? 0.0 : 0.5 * (1.0 + std::tanh((s.radius - r) / w));
    }

  PlaneOptions o;
  o.eps = s.eps;
  o.T = s.T;
  o.dt = s.dt;
  o.snapshot_times = s.snapshots;
  FrontTrace trace;
  double next = 0.0;
  const double cell = grid.dx * grid.dx;
  auto radius_of = [&](const std::vector<double>& u) {
    double m = 0.0;
    for (double v : u) m += v;
    return std::sqrt(m * cell / M_PI);
  };
  trace.times.push_back(0.0);
  trace.positions.push_back(radius_of(u0));
  next = s.trace_dt;
  auto observer = [&](std::size_t, double t, const std::vector<double>& u) {
    if (t + 1e-12 >= next) {
      trace.times.push_back(t);
      trace.positions.push_back(radius_of(u));
      next += s.trace_dt;
    }
  };
  const auto snaps = run_plane_2d(model, grid, u0, o, {}, observer);
  for (const auto& sn : snaps) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%08.3f.csv", sn.t);
    save(cfg, snapshot_csv(sn.t, grid.nx + 1, grid.ny + 1, grid.dx, sn.u), name, out);
  }
  fit_trace(trace);
  save(cfg, trace_csv(trace), "trace.csv", out);
  out << "radius_speed = " << fixed(trace.speed, 7) << "\n";
  out << "final_radius = " << fixed(trace.positions.back(), 7) << "\n";
  return kOk;
}

MovingSet build_set(const SetConfig& s) {
  if (s.kind == "circle") return MovingSet::circle(s.R0, s.v, s.T, s.nt, s.nxi);
  if (s.kind == "translating-disc") return MovingSet::translating_disc(s.R0, s.w, s.T, s.nt, s.nxi);
  if (s.kind == "ellipse") return MovingSet::ellipse(s.a0, s.b0, s.v, s.T, s.nt, s.nxi);
  std::ifstream in(s.file);
  if (!in) fail(ErrorCode::Config, "cannot read set.file " + s.file);
  std::stringstream ss;
  ss << in.rdbuf();
  return MovingSet::from_csv(ss.str());
}

}  // namespace

int run_cstar(const RunConfig& cfg, std::ostream& out) {
  const auto model = cfg.model.build();
  const double cs = find_cstar(model);
  out << "c_star = " << fixed(cs, 7) << "\n";
  if (!model.bistable()) return kOk;
  const auto m = integrate_manifold(model, cs, Equilibrium::One, StopCondition::at_u(1e-4));
  CsvWriter w({"U", "P"});
  w.comment("c=" + format_number(cs));
  for (const auto& p : m.path.points()) w.row({p.U, p.P});
  save(cfg, w, "heteroclinic.csv", out);
  return kOk;
}

int run_profile(const RunConfig& cfg, std::ostream& out) {
  const auto model = cfg.model.build();
  const auto p = solve(model, cfg.problem.kind, cfg.problem.c);
  CsvWriter w({"x", "U", "P", "alpha_density"});
  for (std::size_t i = 0; i < p.x.size(); ++i) w.row({p.x[i], p.U[i], p.P[i], i < p.alpha.size() ? p.alpha[i] : 0.0});
  save(cfg, w, "profile.csv", out);
  CsvWriter atoms({"x", "mass"});
  for (const auto& a : p.control.atoms) atoms.row({a.x, a.mass});
  save(cfg, atoms, "atoms.csv", out);
  out << "J0 = " << fixed(p.control.total_J0, 7) << "\n";
  out << "J1 = " << fixed(p.control.total_J1, 7) << "\n";
  return kOk;
}

int run_ecurve(const RunConfig& cfg, std::ostream& out) {
  const auto model = cfg.model.build();
  const auto& e = cfg.ecurve;
  const double cs = find_cstar(model);
  if (!(e.cmax > cs)) fail(ErrorCode::InvalidParameter, "ecurve.cmax must exceed c* = " + fixed(cs, 7));
  if (!(e.cmin < e.cmax)) fail(ErrorCode::InvalidParameter, "ecurve.cmin must be below ecurve.cmax");
  const auto curve = compute_ecurve(model, linspace(e.cmin, e.cmax, e.n), thread_count(cfg));
  CsvWriter w({"c", "E", "u_minus", "u_plus"});
  for (const auto& s : curve.samples) w.row({s.c, s.E, s.u_minus, s.u_plus});
  save(cfg, w, "ecurve.csv", out);
  out << "c_star = " << fixed(curve.c_star, 7) << "\n";
  return kOk;
}

int run_verify(const RunConfig& cfg, std::ostream& out) {
  const auto model = cfg.model.build();
  const double c = cfg.problem.c;
  const Functional fn = functional_of(cfg.problem.kind);
  const auto p = solve(model, cfg.problem.kind, c);
  const double closed = fn == Functional::J0 ? p.control.total_J0 : p.control.total_J1;
  const auto g = grid_search(model, c, fn, cfg.numerics.grid, cfg.numerics.grid);
  const double rel = closed > 0.0 ? (g.cost - closed) / closed : g.cost - closed;
  const double below_bound = 1e-8 * (1.0 + closed);

  std::mt19937_64 rng(20240611);
  const auto other = random_admissible_path(model, c, fn, rng);
  const auto st = stokes_difference(p.phase_path, other, model, c, fn, cfg.numerics.n_quad);
  const double stokes_tol = 1e-3 * (1.0 + std::abs(st.line_diff));

  out << "closed_form = " << fixed(closed, 9) << "\n";
  out << "oracle = " << fixed(g.cost, 9) << "  (grid " << cfg.numerics.grid << ")\n";
  out << "relative_error = " << sci(rel) << "\n";
  out << "stokes_residual = " << sci(st.residual) << "  (line " << fixed(st.line_diff, 6) << ", area "
      << fixed(st.area_diff, 6) << ")\n";

  // Mass of the mollified control on a few grids.
  CsvWriter w({"dx", "grid_mass", "measure_mass"});
  for (double dx : {0.04, 0.02, 0.01}) {
    const double lo = p.x.empty() ? -20.0 : std::min(-20.0, p.x.front() - 5.0);
    const double hi = p.x.empty() ? 20.0 : std::max(20.0, p.x.back() + 5.0);
    const Grid1D grid = Grid1D::with_spacing(lo, hi, dx);
    const double m = trapezoid(control_on_grid(p, CouplingKind::Additive, grid, 0.0), grid.dx());
    out << "mollified_mass dx=" << dx << " : " << sci(m - p.control.total_J0) << "\n";
    w.row({dx, m, p.control.total_J0});
  }
  w.comment("closed=" + format_number(closed) + " oracle=" + format_number(g.cost) +
            " stokes_residual=" + format_number(st.residual));
  save(cfg, w, "verify.csv", out);

  const bool ok_oracle = std::abs(rel) <= cfg.numerics.tolerance && g.cost >= closed - below_bound;
  const bool ok_stokes = st.residual < stokes_tol;
  out << "oracle " << (ok_oracle ? "ok" : "FAILED") << ", stokes " << (ok_stokes ? "ok" : "FAILED") << "\n";
  return ok_oracle && ok_stokes ? kOk : kTolerance;
}

int run_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto model = cfg.model.build();
  if (cfg.simulate.dim == "1") return simulate_1d(cfg, model, out);
  if (cfg.simulate.dim == "strip") return simulate_strip(cfg, model, out);
  return simulate_plane(cfg, model, out);
}

int run_interface_limit(const RunConfig& cfg, std::ostream& out) {
  const auto model = cfg.model.build();
  const auto& L = cfg.limit;
  const auto ms = build_set(cfg.set);
  const auto bank = build_profile_bank(model, L.n, L.c2, L.c3, L.n_c, L.c1);
  const double top = L.c3 + 0.5;
  const auto curve = compute_ecurve(model, linspace(0.5 * (bank.c_star + bank.c1), top, 25), thread_count(cfg));

  VerifyOptions o;
  o.dx_factor = L.dx_factor;
  o.dt_factor = L.dt_factor;
  o.sample_dt = L.sample_dt;
  o.additive = L.additive;
  const auto reports = verify_limit(ms, model, bank, curve, L.eps, o);

  CsvWriter summary({"eps", "max_l1_error", "max_mass_gap"});
  bool ok = true;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    summary.row({r.eps, r.l1_error, r.mass_gap});
    CsvWriter per({"t", "control_mass", "effort"});
    for (std::size_t i = 0; i < r.t.size(); ++i) per.row({r.t[i], r.control_mass[i], r.effort[i]});
    save(cfg, per, "limit_eps_" + format_number(r.eps) + ".csv", out);
    out << "eps = " << format_number(r.eps) << ": l1 " << fixed(r.l1_error, 5) << ", mass_gap " << fixed(r.mass_gap, 5)
        << ", rel_gap " << fixed(r.max_rel_gap, 4) << ", sandwich " << sci(r.sandwich_violation) << "\n";
    if (r.sandwich_violation > 1e-6) ok = false;
    if (k > 0) {
      const auto& prev = reports[k - 1];
      if (r.l1_error > 1.1 * prev.l1_error || r.mass_gap > 1.1 * prev.mass_gap) ok = false;
    }
  }
  save(cfg, summary, "limit_summary.csv", out);
  out << "trend " << (ok ? "ok" : "FAILED") << "\n";
  return ok ? kOk : kTolerance;
}

int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (command == "cstar") return run_cstar(cfg, out);
    if (command == "profile") return run_profile(cfg, out);
    if (command == "ecurve") return run_ecurve(cfg, out);
    if (command == "verify") return run_verify(cfg, out);
    if (command == "simulate") return run_simulate(cfg, out);
    if (command == "interface-limit") return run_interface_limit(cfg, out);
    err << "unknown command " << command << "\n";
    return kPrecondition;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::BlowUp:
      case ErrorCode::FrontHitBoundary:
      case ErrorCode::NoRealEigenvector:
      case ErrorCode::RegionConstruction:
        return kFailure;
      default:
        return kPrecondition;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace frontctrl::cli
