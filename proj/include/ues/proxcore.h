#pragma once
// Proximal-gradient primitives shared by the lower bounds and the solvers.

#include "ues/objective.h"

namespace ues {

// Everything derived from one gradient evaluation at a point x.
struct ProxStepResult {
  Vec g;           // G_gamma(x); equals grad f(x) when h is zero
  Vec x_plus;      // x - g / gamma
  Vec x_plusplus;  // x - g / mu
  double gamma = 0.0;
};

// G_gamma(x) = gamma * (x - prox_h(x - grad f(x) / gamma, gamma)).
// Counts one gradient and one prox evaluation (prox only when h != 0 or
// count_zero_prox is set).
ProxStepResult prox_gradient(const CompositeObjective& obj, ConstSpan x,
                             double gamma, EvalCounters* counters = nullptr,
                             bool count_zero_prox = false);

// Same as prox_gradient but reuses an already computed grad f(x).
ProxStepResult prox_gradient_from(const CompositeObjective& obj, ConstSpan x,
                                  ConstSpan grad_f, double gamma,
                                  EvalCounters* counters = nullptr,
                                  bool count_zero_prox = false);

struct MembershipReport {
  bool ok = true;
  double max_violation = 0.0;
  std::size_t worst_index = 0;
};

// Checks G_gamma(x) - grad f(x) in the subdifferential of h at x+,
// coordinate-wise, to absolute tolerance tol. Only zero and weighted l1
// terms are supported; anything else throws UnsupportedOperation.
MembershipReport subgradient_membership(const CompositeObjective& obj,
                                        ConstSpan x, double gamma,
                                        double tol = 1e-9);

}  // namespace ues
