#include "frontctrl/reaction_models.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "frontctrl/errors.hpp"

namespace frontctrl {

namespace {

constexpr double kRootTol = 1e-10;
constexpr std::size_t kScan = 10000;

int sign_of(double v) { return (v > 0) - (v < 0); }

}  // namespace

ReactionModel::ReactionModel(std::string name, Fn f, Fn df, Fn d2f)
    : name_(std::move(name)), f_(std::move(f)), df_(std::move(df)), d2f_(std::move(d2f)) {
  if (std::abs(f_(0.0)) > kRootTol || std::abs(f_(1.0)) > kRootTol)
    fail(ErrorCode::InvalidParameter, name_ + ": f(0) and f(1) must vanish");

  std::vector<double> vals(kScan + 1);
  for (std::size_t i = 0; i <= kScan; ++i) vals[i] = f_(double(i) / kScan);

  int changes = 0;
  std::size_t change_at = 0;
  int prev = 0;
  bool all_positive = true;
  for (std::size_t i = 1; i < kScan; ++i) {
    int s = sign_of(vals[i]);
    if (s <= 0) all_positive = false;
    if (s != 0 && prev != 0 && s != prev) {
      ++changes;
      change_at = i;
    }
    if (s != 0) prev = s;
  }

  if (all_positive) {
    kind_ = ModelKind::Monostable;
    for (std::size_t i = 0; i <= kScan; ++i)
      if (!(d2f_(double(i) / kScan) < 0))
        fail(ErrorCode::InvalidParameter, name_ + ": monostable model needs f'' < 0 on [0,1]");
  } else if (changes == 1 && sign_of(vals[1]) < 0 && sign_of(vals[kScan - 1]) > 0) {
    kind_ = ModelKind::Bistable;
    // Bracket may include an exact zero sample; widen by one cell.
    double lo = double(change_at - 1) / kScan, hi = double(change_at) / kScan;
    if (vals[change_at - 1] == 0.0) lo = double(change_at - 2) / kScan;
    std::uintmax_t it = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) < 1e-15; };
    auto r = boost::math::tools::toms748_solve(f_, lo, hi, tol, it);
    u_star_ = 0.5 * (r.first + r.second);
    if (!(df_(0.0) < 0) || !(df_(1.0) < 0) || !(df_(*u_star_) > 0))
      fail(ErrorCode::InvalidParameter, name_ + ": bistable model needs f'(0)<0, f'(1)<0, f'(u*)>0");
  } else {
    fail(ErrorCode::InvalidParameter, name_ + ": f is neither monostable nor bistable");
  }

  std::size_t imin = 0;
  for (std::size_t i = 1; i <= kScan; ++i)
    if (vals[i] < vals[imin]) imin = i;
  f_min_ = std::min(0.0, vals[imin]);
  if (imin > 0 && imin < kScan) {
    auto r = boost::math::tools::brent_find_minima(
        f_, double(imin - 1) / kScan, double(imin + 1) / kScan, 50);
    f_min_ = std::min(f_min_, r.second);
  }
}

double ReactionModel::u_star() const {
  if (!u_star_) fail(ErrorCode::WrongKind, name_ + " is monostable and has no interior zero");
  return *u_star_;
}

ReactionModel make_cubic(double a) {
  if (!(a > 0.0 && a < 1.0)) fail(ErrorCode::InvalidParameter, "cubic: a must lie in (0,1)");
  // u(1-u)(u-a) = -u^3 + (1+a)u^2 - a u
  return make_polynomial({0.0, -a, 1.0 + a, -1.0}, "cubic");
}

ReactionModel make_logistic() { return make_polynomial({0.0, 1.0, -1.0}, "logistic"); }

ReactionModel make_polynomial(const std::vector<double>& coeffs, std::string name) {
  if (coeffs.empty()) fail(ErrorCode::InvalidParameter, "polynomial needs coefficients");
  auto horner = [](std::vector<double> c) {
    return [c = std::move(c)](double u) {
      double s = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * u + *it;
      return s;
    };
  };
  auto derive = [](const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(double(k) * c[k]);
    if (d.empty()) d.push_back(0.0);
    return d;
  };
  auto d1 = derive(coeffs);
  auto d2 = derive(d1);
  return ReactionModel(std::move(name), horner(coeffs), horner(d1), horner(d2));
}

double h_function(const ReactionModel& m, double u) {
  double f = m.f(u);
  return -(3.0 * f + u * m.df(u)) / (2.0 * std::sqrt(u * f));
}

A4Report check_A4(const ReactionModel& m, std::size_t grid_n) {
  if (!m.bistable()) fail(ErrorCode::WrongKind, "check_A4 needs a bistable model");
  if (grid_n < 4) fail(ErrorCode::InvalidParameter, "check_A4: grid_n too small");
  const double us = m.u_star();
  const double k = 4.0 - 2.0 * std::sqrt(3.0);
  A4Report r;
  r.worst_margin = -std::numeric_limits<double>::infinity();
  r.fneq_worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= grid_n; ++i) {
    double u = us + (1.0 - us) * double(i) / grid_n;
    r.worst_margin = std::max(r.worst_margin, k * m.df(u) + 2.0 * u * m.d2f(u));
  }
  for (std::size_t i = 0; i <= grid_n; ++i) {
    double u = double(i) / grid_n;
    double f = m.f(u), fp = m.df(u), fpp = m.d2f(u);
    double v = -3.0 * f * f - u * u * fp * fp + 4.0 * u * f * fp + 2.0 * u * u * f * fpp;
    r.fneq_worst = std::max(r.fneq_worst, v);
  }
  r.holds = r.worst_margin <= 0.0;
  r.fneq_holds = r.fneq_worst <= 1e-12;
  r.h_monotone = true;
  double prev = h_function(m, us + (1.0 - us) / grid_n);
  for (std::size_t i = 2; i < grid_n; ++i) {
    double cur = h_function(m, us + (1.0 - us) * double(i) / grid_n);
    if (!(cur > prev)) {
      r.h_monotone = false;
      break;
    }
    prev = cur;
  }
  return r;
}

EffortCostFunction EffortCostFunction::polynomial(double a1, double a2, double k1, double k2) {
  if (a1 < 0 || a2 < 0 || k1 < 0 || k2 < 0)
    fail(ErrorCode::InvalidParameter, "effort cost coefficients must be nonnegative");
  EffortCostFunction e;
  e.phi = [a1, a2](double s) { return a1 * s + a2 * s * s; };
  e.kappa1 = k1;
  e.kappa2 = k2;
  return e;
}

bool EffortCostFunction::valid(double s_max, std::size_t n) const {
  if (kappa1 < 0 || kappa2 < 0 || phi(0.0) != 0.0) return false;
  const double h = s_max / double(n);
  double p0 = phi(0.0), p1 = phi(h);
  if (p1 < p0) return false;
  for (std::size_t i = 2; i <= n; ++i) {
    double p2 = phi(h * double(i));
    if (p2 < p1) return false;
    if (p2 - 2.0 * p1 + p0 < -1e-12 * (1.0 + std::abs(p1))) return false;
    p0 = p1;
    p1 = p2;
  }
  return true;
}

}  // namespace frontctrl
