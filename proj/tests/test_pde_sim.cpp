#include <cmath>

#include "doctest.h"
#include "frontctrl/errors.hpp"
#include "frontctrl/optimal_control.hpp"
#include "frontctrl/pde_sim.hpp"

using namespace frontctrl;

namespace {

double trapezoid(const std::vector<double>& v, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v[i] + v[i + 1]) * dx;
  return s;
}

}  // namespace

TEST_CASE("grid spacing divides the interval") {
  const auto g = Grid1D::with_spacing(-40.0, 40.0, 0.03);
  CHECK(g.dx() == doctest::Approx(80.0 / double(g.n)));
  CHECK(std::abs(g.dx() - 0.03) < 0.03 / double(g.n) * 2);
  CHECK(g.x(g.n) == doctest::Approx(40.0));
}

TEST_CASE("mollified atoms keep their mass exactly") {
  const auto m = make_cubic(2.0 / 3.0);
  const auto p = solve_P1(m, 0.5);
  for (double dx : {0.05, 0.02, 0.013}) {
    const auto g = Grid1D::with_spacing(-20.0, 20.0, dx);
    for (double origin : {0.0, 0.37 * dx}) {
      const auto z = control_on_grid(p, CouplingKind::Additive, g, origin);
      CHECK(trapezoid(z, g.dx()) == doctest::Approx(p.control.total_J0).epsilon(1e-13));
    }
  }
}

TEST_CASE("front position interpolates the half crossing") {
  const Grid1D g(0.0, 10.0, 10);
  std::vector<double> u(11, 0.0);
  for (std::size_t i = 4; i < 11; ++i) u[i] = 1.0;
  u[3] = 0.25;
  CHECK(front_position(u, g) == doctest::Approx(3.0 + 0.25 / 0.75));
  CHECK(std::isnan(front_position(std::vector<double>(11, 0.0), g)));
}

TEST_CASE("trace fit recovers a linear motion") {
  FrontTrace t;
  for (int k = 0; k <= 20; ++k) {
    t.times.push_back(0.5 * k);
    t.positions.push_back(3.0 - 0.25 * 0.5 * k);
  }
  fit_trace(t);
  CHECK(t.speed == doctest::Approx(-0.25));
  CHECK(t.residual == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("explicit diffusion checks the CFL bound") {
  Run1DOptions o;
  o.grid = Grid1D::with_spacing(-10.0, 10.0, 0.1);
  o.implicit_diffusion = false;
  o.dt = 0.01;
  o.T = 0.1;
  try {
    run_1d(make_cubic(2.0 / 3.0), ControlCoupling{}, nullptr, step_on_grid(o.grid, 0.0), o);
    FAIL("expected a CFL error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CflViolation);
  }
}

TEST_CASE("a front reaching the domain end is reported") {
  Run1DOptions o;
  o.grid = Grid1D::with_spacing(-5.0, 5.0, 0.05);
  o.T = 40.0;
  o.dt = 0.025;
  // The Dirichlet end pins the layer about two units away, so watch a wider band.
  o.boundary_margin_cells = 60.0;
  try {
    run_1d(make_cubic(2.0 / 3.0), ControlCoupling{}, nullptr, step_on_grid(o.grid, 0.0), o);
    FAIL("expected a boundary error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FrontHitBoundary);
  }
}

TEST_CASE("uncontrolled bistable front moves at c*") {
  Run1DOptions o;
  o.grid = Grid1D::with_spacing(-40.0, 40.0, 0.08);
  o.T = 100.0;
  o.dt = 0.04;
  const auto r = run_1d(make_cubic(2.0 / 3.0), ControlCoupling{}, nullptr, step_on_grid(o.grid, -12.0), o);
  CHECK(r.trace.speed == doctest::Approx(std::sqrt(2.0) / 6.0).epsilon(0.01));
  CHECK(r.u_min >= -1e-12);
  CHECK(r.u_max <= 1.0 + 1e-12);
}

TEST_CASE("multiplicative P2 control holds the front at its speed") {
  const auto m = make_cubic(2.0 / 3.0);
  const auto p = solve_P2(m, 0.5);
  Run1DOptions o;
  o.grid = Grid1D::with_spacing(-40.0, 40.0, 0.04);
  o.T = 40.0;
  o.dt = 0.02;
  o.control_origin = -10.0;
  const auto r = run_1d(m, ControlCoupling{CouplingKind::Multiplicative}, &p, profile_on_grid(p, o.grid, -10.0), o);
  CHECK(r.trace.speed == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("strip run in the frame of c* stays put") {
  const auto m = make_cubic(2.0 / 3.0);
  const double cs = std::sqrt(2.0) / 6.0;
  StripOptions o;
  o.grid = Grid1D::with_spacing(-20.0, 20.0, 0.1);
  o.ny = 4;
  o.T = 30.0;
  o.dt = 0.05;
  const std::size_t nx = o.grid.nodes(), ny = o.ny + 1;
  const auto u1 = step_on_grid(o.grid, 0.0);
  std::vector<double> u(nx * ny), z(nx * ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) u[j * nx + i] = u1[i];
  const auto r = run_strip_2d(m, z, cs, u, o);
  CHECK(r.trace.speed == doctest::Approx(cs).epsilon(0.03));
}

TEST_CASE("plane step solves the implicit system it reports") {
  const auto m = make_cubic(2.0 / 3.0);
  PlaneGrid g;
  g.x_lo = g.y_lo = -1.0;
  g.dx = 0.025;
  g.nx = g.ny = 80;
  std::vector<double> u0(g.size(), 0.0);
  for (std::size_t j = 1; j < g.ny; ++j)
    for (std::size_t i = 1; i < g.nx; ++i)
      u0[g.idx(i, j)] = 0.5 * (1 + std::tanh((0.6 - std::hypot(g.x(i), g.y(j))) / 0.14));
  PlaneOptions o;
  o.eps = 0.1;
  o.dt = 0.01;
  o.T = 0.01;
  std::vector<double> u1;
  run_plane_2d(m, g, u0, o, {}, [&](std::size_t, double, const std::vector<double>& u) { u1 = u; });
  REQUIRE(u1.size() == g.size());
  const double a = o.dt * o.eps / (g.dx * g.dx);
  const auto Mu = plane_apply_operator(g, a, u1);
  double worst = 0.0;
  for (std::size_t j = 1; j < g.ny; ++j)
    for (std::size_t i = 1; i < g.nx; ++i) {
      const std::size_t k = g.idx(i, j);
      worst = std::max(worst, std::abs(Mu[k] - (u0[k] + o.dt * m.f(u0[k]) / o.eps)));
    }
  CHECK(worst < 1e-9);
  // The scheme is symmetric under x <-> y.
  double asym = 0.0;
  for (std::size_t j = 0; j <= g.ny; ++j)
    for (std::size_t i = 0; i <= g.nx; ++i) asym = std::max(asym, std::abs(u1[g.idx(i, j)] - u1[g.idx(j, i)]));
  CHECK(asym < 1e-9);
}

TEST_CASE("plane runs need dx <= eps / 4") {
  PlaneGrid g;
  g.dx = 0.05;
  g.nx = g.ny = 20;
  PlaneOptions o;
  o.eps = 0.1;
  try {
    run_plane_2d(make_cubic(2.0 / 3.0), g, std::vector<double>(g.size(), 0.0), o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LayerUnderresolved);
  }
}
