#include "frontctrl/ode.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "frontctrl/errors.hpp"

namespace frontctrl {

namespace odeint = boost::numeric::odeint;

OdeResult integrate_tw(const ReactionModel& model, double c, const State& y0, int direction,
                       const std::vector<OdeEvent>& events, const AuxRhs& aux,
                       const OdeOptions& opt) {
  const double dir = direction >= 0 ? 1.0 : -1.0;
  auto rhs = [&](const State& y, State& dy, double) {
    dy[0] = dir * y[1];
    dy[1] = dir * (-c * y[1] - model.f(y[0]));
    dy[2] = aux ? dir * aux(y) : 0.0;
  };

  std::vector<double> sign0(events.size());
  for (std::size_t k = 0; k < events.size(); ++k) {
    double g = events[k].g(y0);
    sign0[k] = g >= 0 ? 1.0 : -1.0;
  }

  auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(y0, 0.0, 1e-3);

  OdeResult out;
  out.s.push_back(0.0);
  out.y.push_back(y0);

  auto add_samples = [&](double t0, double t1, const State& a, const State& b) {
    double d = std::hypot(b[0] - a[0], b[1] - a[1]);
    int m = std::max(1, int(std::ceil(d / opt.sample_spacing)));
    State tmp;
    for (int k = 1; k < m; ++k) {
      double t = t0 + (t1 - t0) * double(k) / m;
      stepper.calc_state(t, tmp);
      out.s.push_back(t);
      out.y.push_back(tmp);
    }
    out.s.push_back(t1);
    out.y.push_back(b);
  };

  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    auto [t0, t1] = stepper.do_step(rhs);
    State prev = out.y.back();
    State cur = stepper.current_state();
    if (!std::isfinite(cur[1]) || std::abs(cur[1]) > opt.p_bound)
      fail(ErrorCode::BlowUp, "|P| exceeded the a-priori bound before reaching the stop condition");

    int hit = -1;
    double t_hit = t1;
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (events[k].g(cur) * sign0[k] > 0) continue;
      // Locate the crossing by bisection on the dense output.
      double lo = t0, hi = t1;
      State tmp;
      for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * (1.0 + std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, tmp);
        if (events[k].g(tmp) * sign0[k] > 0) lo = mid; else hi = mid;
      }
      if (hit < 0 || hi < t_hit) {
        hit = int(k);
        t_hit = hi;
      }
    }
    if (hit >= 0) {
      State end;
      stepper.calc_state(t_hit, end);
      add_samples(t0, t_hit, prev, end);
      out.event = events[hit].id;
      return out;
    }
    add_samples(t0, t1, prev, cur);
    if (std::abs(t1) > opt.max_length) return out;
  }
  return out;
}

}  // namespace frontctrl
