#pragma once
// Global quadratic lower bounds phi_k(x) = phi*_k + (mu/2)||x - v_k||^2 and
// their update by convex averaging with a fresh bound anchored at y.
//
// Smooth track (h = 0): the fresh bound at y is
//   f(y) - ||grad f(y)||^2 / (2 mu) + (mu/2)||x - y++||^2.
// Composite track: the fresh bound at y built from G_gamma(y) is
//   F(y+) + (1/(2 gamma) - 1/(2 mu)) ||G_gamma(y)||^2 + (mu/2)||x - y++||^2,
// valid whenever f(y+) <= f(y) + <grad f(y), y+ - y> + (gamma/2)||y+ - y||^2.

#include "ues/objective.h"
#include "ues/proxcore.h"

namespace ues {

struct QuadraticLowerBound {
  double phi_star = 0.0;
  Vec v;
  double mu = 0.0;
};

// Fresh bounds from already computed quantities at the anchor y.
QuadraticLowerBound smooth_bound_at(double f_y, const ProxStepResult& at_y,
                                    double mu);
QuadraticLowerBound composite_bound_at(double F_y_plus,
                                       const ProxStepResult& at_y, double mu);

// (1 - alpha) * lb + alpha * fresh, in canonical form. Uses
//   phi*' = (1 - a)(phi* + a (mu/2)||v - w||^2) + a * fresh.phi*,
// with w the fresh minimizer. alpha must lie in (0, 1).
QuadraticLowerBound average_bounds(const QuadraticLowerBound& lb,
                                   const QuadraticLowerBound& fresh,
                                   double alpha);

// phi_0 = phi(.; x0) for h = 0. Throws std::invalid_argument if h != 0.
QuadraticLowerBound init_smooth(const CompositeObjective& obj, ConstSpan x0,
                                EvalCounters* counters = nullptr);

// varphi_0 = varphi(.; x0) with gamma = L.
QuadraticLowerBound init_composite(const CompositeObjective& obj, ConstSpan x0,
                                   EvalCounters* counters = nullptr);

QuadraticLowerBound update_smooth(const QuadraticLowerBound& lb,
                                  const CompositeObjective& obj, ConstSpan y,
                                  double alpha,
                                  EvalCounters* counters = nullptr);

// steps must be prox_gradient(obj, y, gamma); gamma is read from steps.
QuadraticLowerBound update_composite(const QuadraticLowerBound& lb,
                                     const CompositeObjective& obj,
                                     ConstSpan y, const ProxStepResult& steps,
                                     double alpha,
                                     EvalCounters* counters = nullptr);

double eval_bound(const QuadraticLowerBound& lb, ConstSpan x);

// The gap F(x) - phi* written in differences. Subtracting phi* from F(x)
// directly loses everything below ~1e-16 |F|; these keep the gap relatively
// accurate as long as the deltas are.
//
// F(x) - fresh.phi_star, given delta = F(x) - F(anchor) where the anchor is
// y for the smooth bound and y+ for the composite one.
double fresh_bound_excess(double delta, const ProxStepResult& at_y, double mu,
                          bool composite);

// gap_{k+1} from gap_k, step_delta = F(x_{k+1}) - F(x_k) and the excess of
// F(x_{k+1}) over the fresh bound that was averaged in with weight alpha.
double next_gap(double gap, double step_delta, double fresh_excess,
                double alpha, const QuadraticLowerBound& lb,
                const QuadraticLowerBound& fresh);

}  // namespace ues
