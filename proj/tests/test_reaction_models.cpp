#include <cmath>

#include "doctest.h"
#include "frontctrl/errors.hpp"
#include "frontctrl/reaction_models.hpp"

using namespace frontctrl;

TEST_CASE("cubic is bistable with threshold a") {
  const auto m = make_cubic(2.0 / 3.0);
  CHECK(m.bistable());
  CHECK(m.u_star() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.f(0.5) == doctest::Approx(0.5 * 0.5 * (0.5 - 2.0 / 3.0)));
  CHECK(m.f_min() < 0.0);
}

TEST_CASE("derivatives agree with finite differences") {
  const auto m = make_cubic(0.3);
  const double h = 1e-6;
  for (double u : {0.1, 0.4, 0.8}) {
    CHECK(m.df(u) == doctest::Approx((m.f(u + h) - m.f(u - h)) / (2 * h)).epsilon(1e-6));
    CHECK(m.d2f(u) == doctest::Approx((m.df(u + h) - m.df(u - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("logistic is monostable and has no threshold") {
  const auto m = make_logistic();
  CHECK_FALSE(m.bistable());
  CHECK_FALSE(m.u_star_opt().has_value());
  CHECK_THROWS_AS(m.u_star(), Error);
}

TEST_CASE("polynomial coefficients reproduce the cubic") {
  const double a = 2.0 / 3.0;
  const auto p = make_polynomial({0.0, -a, 1.0 + a, -1.0});
  const auto c = make_cubic(a);
  for (double u = 0.0; u <= 1.0; u += 0.125) CHECK(p.f(u) == doctest::Approx(c.f(u)));
  CHECK(p.bistable());
}

TEST_CASE("A4 holds for the cubic with a = 2/3") {
  const auto r = check_A4(make_cubic(2.0 / 3.0));
  CHECK(r.holds);
  CHECK(r.worst_margin < 0.0);  // largest value of a quantity that must stay nonpositive
}

TEST_CASE("invalid cubic threshold is rejected") {
  CHECK_THROWS_AS(make_cubic(1.5), Error);
  CHECK_THROWS_AS(make_cubic(0.0), Error);
}

TEST_CASE("coupling kinds") {
  ControlCoupling add{CouplingKind::Additive}, mul{CouplingKind::Multiplicative};
  CHECK(add(0.4, 2.0) == 2.0);
  CHECK(mul(0.4, 2.0) == doctest::Approx(0.8));
}

TEST_CASE("effort cost validity") {
  CHECK(EffortCostFunction::polynomial(1.0, 0.5, 0.0, 0.0).valid());
  EffortCostFunction bad;
  bad.phi = [](double s) { return -s; };
  CHECK_FALSE(bad.valid());
}
