#include <cmath>

#include "doctest.h"
#include "frontctrl/path_oracle.hpp"
#include "frontctrl/phase_plane.hpp"

using namespace frontctrl;

TEST_CASE("critical speed of the cubic matches sqrt(2)(a - 1/2)") {
  for (double a : {0.3, 0.5, 2.0 / 3.0, 0.8}) {
    const double cs = find_cstar(make_cubic(a));
    CHECK(cs == doctest::Approx(std::sqrt(2.0) * (a - 0.5)).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("monostable critical speed is the linear threshold") {
  CHECK(find_cstar(make_logistic()) == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("sign of c* follows the sign of the integral of f") {
  for (double a : {0.3, 0.45, 0.6, 0.8}) {
    const auto m = make_cubic(a);
    const double cs = find_cstar(m);
    CHECK((cs > 0) - (cs < 0) == wave_speed_sign(m));
  }
  CHECK(integral_f(make_cubic(2.0 / 3.0)) == doctest::Approx(-1.0 / 36.0));
}

TEST_CASE("heteroclinic at c* is the Nagumo orbit") {
  const auto m = make_cubic(2.0 / 3.0);
  const double cs = find_cstar(m);
  const auto h = integrate_manifold(m, cs, Equilibrium::One, StopCondition::at_u(1e-3));
  double worst = 0.0;
  for (const auto& p : h.path.points()) worst = std::max(worst, std::abs(p.P - p.U * (1 - p.U) / std::sqrt(2.0)));
  CHECK(worst < 1e-5);
}

TEST_CASE("eigenvalues at the origin solve the characteristic equation") {
  const auto m = make_cubic(2.0 / 3.0);
  const double c = 0.4;
  const auto e = eigen_at(m, c, 0.0);
  for (double l : {e.lambda_plus, e.lambda_minus}) CHECK(l * l + c * l + m.df(0.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(e.lambda_plus > 0.0);
  CHECK(e.lambda_minus < 0.0);
}

TEST_CASE("stable manifold of one rises with c") {
  const auto m = make_cubic(2.0 / 3.0);
  const auto lo = integrate_manifold(m, 0.4, Equilibrium::One, StopCondition::at_u(0.0));
  const auto hi = integrate_manifold(m, 0.6, Equilibrium::One, StopCondition::at_u(0.0));
  const OrbitFunction a(m, 0.4, lo.path.segments.front().points), b(m, 0.6, hi.path.segments.front().points);
  for (double u = 0.05; u < 0.99; u += 0.05) CHECK(b(u) > a(u));
}

TEST_CASE("trajectory samples satisfy the traveling-wave system") {
  const auto m = make_cubic(2.0 / 3.0);
  const double c = 0.5;
  const auto r = integrate_manifold(m, c, Equilibrium::One, StopCondition::at_u(0.05));
  const auto& seg = r.path.segments.front();
  REQUIRE(seg.x.size() == seg.points.size());
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < seg.points.size(); ++i) {
    const double dx0 = seg.x[i] - seg.x[i - 1], dx1 = seg.x[i + 1] - seg.x[i];
    if (dx0 <= 0 || dx1 <= 0) continue;
    const auto &a = seg.points[i - 1], &p = seg.points[i], &b = seg.points[i + 1];
    // Nonuniform central difference.
    const double dP = (b.P - p.P) * dx0 / (dx1 * (dx0 + dx1)) + (p.P - a.P) * dx1 / (dx0 * (dx0 + dx1));
    worst = std::max(worst, std::abs(dP + c * p.P + m.f(p.U)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("stable manifold obeys the energy balance") {
  // d(P^2 / 2) / dU = -(c P + f) along orbits.
  const auto m = make_cubic(2.0 / 3.0);
  for (double c : {0.3, 0.5, 1.0, 2.0}) {
    const auto r = integrate_manifold(m, c, Equilibrium::One, StopCondition::at_u(0.0));
    const auto& pts = r.path.points();
    double work = 0.0, worst = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto &a = pts[i - 1], &b = pts[i];
      work += 0.5 * (b.U - a.U) * (c * (a.P + b.P) + m.f(a.U) + m.f(b.U));
      const double lhs = 0.5 * (b.P * b.P - pts.front().P * pts.front().P);
      worst = std::max(worst, std::abs(lhs + work));
    }
    CHECK(worst < 1e-4 * (1.0 + c * c));
  }
}

TEST_CASE("launch offset does not change the manifolds") {
  const auto m = make_cubic(2.0 / 3.0);
  ManifoldOptions a, b;
  b.delta0 = a.delta0 / 10.0;
  const auto ra = integrate_manifold(m, 0.5, Equilibrium::One, StopCondition::at_u(m.u_star()), a);
  const auto rb = integrate_manifold(m, 0.5, Equilibrium::One, StopCondition::at_u(m.u_star()), b);
  CHECK(std::abs(ra.end.P - rb.end.P) / ra.end.P < 1e-4);
  CHECK(std::abs(manifold_gap(m, 0.5, a) - manifold_gap(m, 0.5, b)) < 1e-4 * std::abs(manifold_gap(m, 0.5, a)));
}

TEST_CASE("manifold gap changes sign at c*") {
  const auto m = make_cubic(2.0 / 3.0);
  const double cs = find_cstar(m);
  CHECK(manifold_gap(m, cs + 0.05) > 0.0);
  CHECK(manifold_gap(m, cs - 0.05) < 0.0);
}
