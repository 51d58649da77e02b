#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "frontctrl/reaction_models.hpp"

namespace frontctrl {

/// (U, P, aux). The third slot carries an optional linear companion quantity.
using State = std::array<double, 3>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-13;
  double sample_spacing = 2e-3;  // max (U,P) distance between stored samples
  double max_length = 1e5;       // cap on |x| travelled
  std::size_t max_steps = 5'000'000;
  double p_bound = std::numeric_limits<double>::infinity();
};

struct OdeEvent {
  std::function<double(const State&)> g;
  int id = 0;
};

using AuxRhs = std::function<double(const State&)>;

struct OdeResult {
  std::vector<double> s;  // integration variable, s = direction * x
  std::vector<State> y;
  int event = -1;  // id of the terminating event, -1 when a cap was hit
};

/// Integrates U' = P, P' = -cP - f(U) (and aux' = aux_rhs) in x, forward when
/// direction = +1 and backward when direction = -1, until the first event
/// changes sign relative to its value at y0.
OdeResult integrate_tw(const ReactionModel& model, double c, const State& y0, int direction,
                       const std::vector<OdeEvent>& events, const AuxRhs& aux,
                       const OdeOptions& opt);

}  // namespace frontctrl
