#include <cmath>
#include <sstream>

#include "doctest.h"
#include "frontctrl/errors.hpp"
#include "frontctrl/interface_limit.hpp"
#include "frontctrl/phase_plane.hpp"

using namespace frontctrl;

namespace {

const ReactionModel& cubic() {
  static const auto m = make_cubic(2.0 / 3.0);
  return m;
}

const ECurve& curve() {
  static const auto ec = [] {
    std::vector<double> cs{find_cstar(cubic())};
    for (int k = 0; k <= 20; ++k) cs.push_back(0.25 + 0.05 * k);
    return compute_ecurve(cubic(), cs);
  }();
  return ec;
}

const ProfileBank& bank(std::size_t n) {
  static const auto b50 = build_profile_bank(cubic(), 50, 0.5, 0.5, 1);
  static const auto b200 = build_profile_bank(cubic(), 200, 0.5, 0.5, 1);
  return n == 50 ? b50 : b200;
}

template <class F>
ErrorCode error_of(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Config;  // nothing raised
}

// Static "C": an annulus sector with round caps whose tips face each other across a gap of 0.1.
MovingSet c_shape() {
  const double rc = 2.0, w = 0.5, th0 = std::asin((0.1 + 2 * w) / (2 * rc));
  std::vector<Vec2> pts;
  const int n = 800;
  auto arc = [&](Vec2 c, double r, double a0, double a1) {
    for (int k = 0; k < n; ++k) {
      const double a = a0 + (a1 - a0) * k / n;
      pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
  };
  const double PI = std::acos(-1.0);
  arc({0, 0}, rc + w, th0, 2 * PI - th0);
  arc({rc * std::cos(th0), -rc * std::sin(th0)}, w, -th0, -th0 - PI);
  arc({0, 0}, rc - w, 2 * PI - th0, th0);
  arc({rc * std::cos(th0), rc * std::sin(th0)}, w, th0 - PI, th0 - 2 * PI);
  std::ostringstream os;
  os.precision(17);
  os << "t,xi,x1,x2\n";
  for (double t : {0.0, 1.0})
    for (std::size_t k = 0; k < pts.size(); ++k)
      os << t << "," << double(k) / double(pts.size()) << "," << pts[k].x << "," << pts[k].y << "\n";
  return MovingSet::from_csv(os.str());
}

}  // namespace

TEST_CASE("shrinking circle has beta = v") {
  const auto ms = MovingSet::circle(2.0, 0.5, 1.0);
  const auto nd = normal_data(ms);
  for (const auto& row : nd.beta)
    for (double b : row) CHECK(b == doctest::Approx(0.5).epsilon(1e-6));
  const auto fr = frame_at(ms, 0.5);
  CHECK(fr.curvature[7] == doctest::Approx(1.0 / 1.75).epsilon(1e-6));
  CHECK(fr.area == doctest::Approx(M_PI * 1.75 * 1.75).epsilon(1e-4));
}

TEST_CASE("translating disc has beta = -w cos(2 pi xi) with zero mean") {
  const double w = 0.3;
  const auto ms = MovingSet::translating_disc(1.0, w, 1.0);
  const auto fr = frame_at(ms, 0.25);
  double mean = 0.0;
  for (std::size_t k = 0; k < ms.n_xi; ++k) {
    const double xi = double(k) / double(ms.n_xi);
    CHECK(fr.beta[k] == doctest::Approx(-w * std::cos(2 * M_PI * xi)).scale(1.0).epsilon(1e-6));
    mean += fr.beta[k] / double(ms.n_xi);
  }
  CHECK(std::abs(mean) < 1e-9);
}

TEST_CASE("effort of a circle is E(v) times its length and ignores the parameterisation") {
  const auto a = MovingSet::circle(2.0, 0.5, 1.0, 101, 256);
  const auto b = MovingSet::circle(2.0, 0.5, 1.0, 101, 512);
  const double ea = instantaneous_effort(a, curve(), 0.4), eb = instantaneous_effort(b, curve(), 0.4);
  CHECK(ea == doctest::Approx(curve().E_at(0.5) * 2 * M_PI * 1.8).epsilon(1e-6));
  CHECK(std::abs(ea - eb) < 1e-6);
}

TEST_CASE("effort vanishes below c* and follows quadrature above") {
  CHECK(instantaneous_effort(MovingSet::translating_disc(1.0, 0.2, 1.0), curve(), 0.5) == 0.0);
  const double w = 1.2, R = 1.0;
  const double e = instantaneous_effort(MovingSet::translating_disc(R, w, 1.0), curve(), 0.5);
  double q = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) q += curve().E_at(-w * std::cos(2 * M_PI * (k + 0.5) / n)) * 2 * M_PI * R / n;
  CHECK(e == doctest::Approx(q).epsilon(1e-4));
  CHECK(error_of([] { instantaneous_effort(MovingSet::translating_disc(1.0, 2.0, 1.0), curve(), 0.0); }) ==
        ErrorCode::ExtrapolationRefused);
}

TEST_CASE("total cost closed forms for the shrinking circle") {
  const double R0 = 2.0, v = 0.5, T = 1.0;
  const auto ms = MovingSet::circle(R0, v, T, 201, 1024);
  const double E = curve().E_at(v);
  EffortCostFunction id;
  CHECK(total_cost(ms, curve(), id) == doctest::Approx(E * 2 * M_PI * (R0 * T - v * T * T / 2)).epsilon(1e-4));
  EffortCostFunction area;
  area.phi = [](double) { return 0.0; };
  area.kappa1 = 1.0;
  const double exact = M_PI * (R0 * R0 * T - R0 * v * T * T + v * v * T * T * T / 3);
  CHECK(total_cost(ms, curve(), area) == doctest::Approx(exact).epsilon(1e-4));
  EffortCostFunction final_area;
  final_area.phi = [](double) { return 0.0; };
  final_area.kappa2 = 1.0;
  const auto still = MovingSet::circle(R0, 0.0, T, 11, 1024);
  CHECK(total_cost(still, curve(), final_area) == doctest::Approx(M_PI * R0 * R0).epsilon(1e-4));
}

TEST_CASE("annulus area: offsets against the Jacobian") {
  const auto ms = MovingSet::ellipse(2.5, 2.0, 0.5, 1.0);
  const auto fr = frame_at(ms, 0.0);
  for (double eps : {0.1, 0.05, 0.025}) {
    const double h_in = eps, h_out = 2 * eps;
    const double a = annulus_area_offsets(fr, h_in, h_out), j = annulus_area_jacobian(fr, h_in, h_out);
    CHECK(std::abs(a - j) / a < 5 * eps);
  }
}

TEST_CASE("upper profile boundary conditions at n = 50") {
  const auto& u = bank(50).upper.front();
  const double n = 50.0;
  CHECK(u.value(u.a) == doctest::Approx(1.0 / n).epsilon(1e-6));
  CHECK(u.value(u.b) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(u.value(0.0) == doctest::Approx(cubic().u_star()).epsilon(1e-6));
  CHECK(std::abs(u.P.front()) < 1e-6);
  CHECK(u.effort > curve().E_at(0.5));
}

TEST_CASE("no upper profile at n = 10") {
  CHECK(error_of([] { build_profile_bank(cubic(), 10, 0.5, 0.5, 1); }) == ErrorCode::BracketFailure);
}

TEST_CASE("p_n converges") {
  const double p50 = bank(50).lower.p_n, p200 = bank(200).lower.p_n;
  CHECK(p50 > 0.0);
  CHECK(p200 > p50);
  CHECK(std::abs(p200 - p50) / p200 < 0.05);
}

TEST_CASE("support widths stay bounded over the speed bracket") {
  const auto b = build_profile_bank(cubic(), 50, 0.5, 0.9, 5);
  REQUIRE(b.upper.size() == 5);
  for (const auto& u : b.upper) {
    CHECK(u.b - u.a < 2.0 * (b.upper.front().b - b.upper.front().a));
    CHECK(u.value(0.0) == doctest::Approx(cubic().u_star()).epsilon(1e-6));
  }
  CHECK(b.lower_width() + b.upper_width() < 40.0);
}

TEST_CASE("lower field lies below the upper field") {
  const auto ms = MovingSet::circle(2.0, 0.5, 1.0);
  const double eps = 0.1;
  const auto grid = default_plane_grid(ms, bank(200), eps, 0.25);
  const LimitConstruction lc(cubic(), ms, bank(200), eps, grid);
  for (double t : {0.0, 0.5, 1.0}) {
    const auto f = lc.fields_at(t);
    double worst = 0.0;
    for (std::size_t k = 0; k < f.u_lower.size(); ++k) worst = std::max(worst, f.u_lower[k] - f.u_upper[k]);
    CHECK(worst <= 0.0);
    // Plateaus: the lower field differs from the indicator only in the annulus and by 1/n elsewhere.
    double l1 = 0.0;
    for (std::size_t k = 0; k < f.u_lower.size(); ++k) l1 += std::abs(f.u_lower[k] - f.inside[k]);
    l1 *= grid.dx * grid.dx;
    const double box = double(grid.nx) * double(grid.ny) * grid.dx * grid.dx;
    const auto fr = frame_at(ms, t);
    CHECK(l1 <= annulus_area_offsets(fr, lc.h_in(), lc.h_out()) + box / 200.0);
  }
}

TEST_CASE("cutoff is a stationary upper solution where it is small") {
  const auto ms = MovingSet::circle(2.0, 0.5, 1.0);
  for (double eps : {0.05, 0.025}) {
    PlaneGrid g;
    g.dx = eps / 4;
    const double half = 2.0 + eps * bank(200).reach_out() + 8.0;
    g.nx = g.ny = std::size_t(std::ceil(2 * half / g.dx));
    g.x_lo = g.y_lo = -half;
    const LimitConstruction lc(cubic(), ms, bank(200), eps, g);
    double worst = -1.0;
    std::size_t checked = 0;
    for (std::size_t j = 1; j < g.ny; j += 7)
      for (std::size_t i = 1; i < g.nx; i += 7) {
        const double x = g.x(i), y = g.y(j), p = lc.phi(x, y);
        if (p > 1.0 / 200.0 || std::hypot(x, y) <= lc.R_phi() + g.dx) continue;
        const double lap = (lc.phi(x + g.dx, y) + lc.phi(x - g.dx, y) + lc.phi(x, y + g.dx) + lc.phi(x, y - g.dx) - 4 * p) /
                           (g.dx * g.dx);
        worst = std::max(worst, eps * lap + cubic().f(p) / eps);
        ++checked;
      }
    CHECK(checked > 100);
    CHECK(worst <= 0.0);
  }
}

TEST_CASE("large eps is rejected before any run") {
  const auto ms = MovingSet::circle(2.0, 0.5, 1.0);
  CHECK(error_of([&] { verify_limit(ms, cubic(), bank(200), curve(), {0.05, 0.5}); }) == ErrorCode::VencViolation);
}

TEST_CASE("normal speeds outside the bracket are rejected") {
  const auto ms = MovingSet::circle(2.0, 0.8, 1.0);
  CHECK(error_of([&] { verify_limit(ms, cubic(), bank(200), curve(), {0.1}); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("boundary parts that face each other overlap in the annulus") {
  const auto ms = c_shape();
  const double eps = 0.02;
  PlaneGrid g;
  g.dx = 0.02;
  g.nx = g.ny = 350;
  g.x_lo = g.y_lo = -3.5;
  const LimitConstruction lc(cubic(), ms, bank(50), eps, g);
  CHECK(error_of([&] { lc.fields_at(0.0); }) == ErrorCode::AnnulusOverlap);
}

TEST_CASE("half-plane control mass approaches E(c)") {
  VerifyOptions o;
  o.dx_factor = 0.125;
  o.dt_factor = 0.01;
  const auto r = verify_halfplane(cubic(), bank(200), curve(), 0.5, 0.025, 1.0, o);
  CHECK(std::abs(r.mass_per_length / r.E - 1.0) < 0.02);
  CHECK(r.sandwich_violation <= 1e-6);
}

TEST_CASE("coarse circle run keeps the sandwich") {
  const auto ms = MovingSet::circle(2.0, 0.5, 0.2);
  VerifyOptions o;
  o.sample_dt = 0.1;
  const auto r = verify_limit(ms, cubic(), bank(200), curve(), {0.1}, o).front();
  CHECK(r.sandwich_violation <= 1e-6);
  CHECK(r.monotonicity_margin > 0.0);
  CHECK(r.t.size() == r.control_mass.size());
  CHECK(r.dx <= 0.1 / 4 + 1e-15);
}
