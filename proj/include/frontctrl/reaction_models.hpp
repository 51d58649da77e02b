#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace frontctrl {

enum class ModelKind { Monostable, Bistable };

/// Source term f on [0,1] with analytic derivatives.
/// Classification and f_min are computed once at construction.
class ReactionModel {
 public:
  using Fn = std::function<double(double)>;

  ReactionModel(std::string name, Fn f, Fn df, Fn d2f);

  double f(double u) const { return f_(u); }
  double df(double u) const { return df_(u); }
  double d2f(double u) const { return d2f_(u); }

  ModelKind kind() const { return kind_; }
  bool bistable() const { return kind_ == ModelKind::Bistable; }
  /// Interior zero; throws wrong-kind for monostable models.
  double u_star() const;
  std::optional<double> u_star_opt() const { return u_star_; }
  double f_min() const { return f_min_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Fn f_, df_, d2f_;
  ModelKind kind_ = ModelKind::Monostable;
  std::optional<double> u_star_;
  double f_min_ = 0.0;
};

ReactionModel make_cubic(double a);
ReactionModel make_logistic();
/// coeffs in ascending powers: f(u) = sum_k coeffs[k] u^k.
ReactionModel make_polynomial(const std::vector<double>& coeffs, std::string name = "custom");

struct A4Report {
  bool holds = false;
  double worst_margin = 0.0;
  bool h_monotone = false;
  bool fneq_holds = false;
  double fneq_worst = 0.0;
};

A4Report check_A4(const ReactionModel& model, std::size_t grid_n = 10000);

/// h(u) = -(3f + u f') / (2 sqrt(u f)), defined on (u*, 1).
double h_function(const ReactionModel& model, double u);

enum class CouplingKind { Additive, Multiplicative };

struct ControlCoupling {
  CouplingKind kind = CouplingKind::Additive;
  double operator()(double u, double alpha) const {
    return kind == CouplingKind::Additive ? alpha : alpha * u;
  }
};

/// phi(s) = a1 s + a2 s^2 with a1, a2 >= 0, plus area weights.
struct EffortCostFunction {
  std::function<double(double)> phi = [](double s) { return s; };
  double kappa1 = 0.0;
  double kappa2 = 0.0;

  static EffortCostFunction polynomial(double a1, double a2, double k1, double k2);
  /// phi(0)=0, nondecreasing and convex on a uniform grid over [0, s_max].
  bool valid(double s_max = 100.0, std::size_t n = 1000) const;
};

}  // namespace frontctrl
