#include "ues/underestimate.h"

#include <stdexcept>

#include "ues/errors.h"

namespace ues {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("lower bound update: alpha must lie in (0, 1)");
  }
}

}  // namespace

QuadraticLowerBound smooth_bound_at(double f_y, const ProxStepResult& at_y,
                                    double mu) {
  return {f_y - kernels::sum_squares(at_y.g) / (2.0 * mu), at_y.x_plusplus, mu};
}

QuadraticLowerBound composite_bound_at(double F_y_plus,
                                       const ProxStepResult& at_y, double mu) {
  const double coef = 1.0 / (2.0 * at_y.gamma) - 1.0 / (2.0 * mu);
  return {F_y_plus + coef * kernels::sum_squares(at_y.g), at_y.x_plusplus, mu};
}

QuadraticLowerBound average_bounds(const QuadraticLowerBound& lb,
                                   const QuadraticLowerBound& fresh,
                                   double alpha) {
  check_alpha(alpha);
  require_same_dim(lb.v.size(), fresh.v.size(), "average_bounds");
  QuadraticLowerBound out;
  out.mu = lb.mu;
  out.v.resize(lb.v.size());
  kernels::lincomb(1.0 - alpha, lb.v, alpha, fresh.v, out.v);
  const double dist2 = kernels::squared_distance(lb.v, fresh.v);
  out.phi_star = (1.0 - alpha) * (lb.phi_star + alpha * 0.5 * lb.mu * dist2) +
                 alpha * fresh.phi_star;
  return out;
}

QuadraticLowerBound init_smooth(const CompositeObjective& obj, ConstSpan x0,
                                EvalCounters* counters) {
  if (!obj.is_smooth()) {
    throw std::invalid_argument("init_smooth: objective has a nonsmooth term");
  }
  const double fx = evaluate(obj, x0, counters);
  const ProxStepResult at_x = prox_gradient(obj, x0, obj.lipschitz(), counters);
  return smooth_bound_at(fx, at_x, obj.mu());
}

QuadraticLowerBound init_composite(const CompositeObjective& obj, ConstSpan x0,
                                   EvalCounters* counters) {
  const ProxStepResult at_x =
      prox_gradient(obj, x0, obj.lipschitz(), counters, true);
  const double F_plus = evaluate(obj, at_x.x_plus, counters);
  return composite_bound_at(F_plus, at_x, obj.mu());
}

QuadraticLowerBound update_smooth(const QuadraticLowerBound& lb,
                                  const CompositeObjective& obj, ConstSpan y,
                                  double alpha, EvalCounters* counters) {
  check_alpha(alpha);
  if (!obj.is_smooth()) {
    throw std::invalid_argument("update_smooth: objective has a nonsmooth term");
  }
  const double fy = evaluate(obj, y, counters);
  const ProxStepResult at_y = prox_gradient(obj, y, obj.lipschitz(), counters);
  return average_bounds(lb, smooth_bound_at(fy, at_y, obj.mu()), alpha);
}

QuadraticLowerBound update_composite(const QuadraticLowerBound& lb,
                                     const CompositeObjective& obj,
                                     ConstSpan y, const ProxStepResult& steps,
                                     double alpha, EvalCounters* counters) {
  check_alpha(alpha);
  require_same_dim(y.size(), obj.dim(), "update_composite");
  const double F_plus = evaluate(obj, steps.x_plus, counters);
  return average_bounds(lb, composite_bound_at(F_plus, steps, obj.mu()), alpha);
}

double eval_bound(const QuadraticLowerBound& lb, ConstSpan x) {
  require_same_dim(x.size(), lb.v.size(), "eval_bound");
  return lb.phi_star + 0.5 * lb.mu * kernels::squared_distance(x, lb.v);
}

double fresh_bound_excess(double delta, const ProxStepResult& at_y, double mu,
                          bool composite) {
  const double gg = kernels::sum_squares(at_y.g);
  if (!composite) return delta + gg / (2.0 * mu);
  return delta - (1.0 / (2.0 * at_y.gamma) - 1.0 / (2.0 * mu)) * gg;
}

double next_gap(double gap, double step_delta, double fresh_excess,
                double alpha, const QuadraticLowerBound& lb,
                const QuadraticLowerBound& fresh) {
  check_alpha(alpha);
  const double dist2 = kernels::squared_distance(lb.v, fresh.v);
  return (1.0 - alpha) * (gap + step_delta) + alpha * fresh_excess -
         (1.0 - alpha) * alpha * 0.5 * lb.mu * dist2;
}

}  // namespace ues
