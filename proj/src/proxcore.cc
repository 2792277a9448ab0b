#include "ues/proxcore.h"

#include <cmath>
#include <stdexcept>

#include "ues/errors.h"

namespace ues {

ProxStepResult prox_gradient_from(const CompositeObjective& obj, ConstSpan x,
                                  ConstSpan grad_f, double gamma,
                                  EvalCounters* counters,
                                  bool count_zero_prox) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("prox_gradient: gamma must be > 0");
  }
  require_same_dim(x.size(), obj.dim(), "prox_gradient");
  require_same_dim(grad_f.size(), obj.dim(), "prox_gradient");
  const std::size_t n = x.size();
  ProxStepResult r;
  r.gamma = gamma;
  if (obj.h().is_zero()) {
    // G reduces to grad f exactly; no round trip through the prox.
    r.g.assign(grad_f.begin(), grad_f.end());
    if (counters && count_zero_prox) ++counters->proxevals;
  } else {
    Vec shifted(n);
    kernels::lincomb(1.0, x, -1.0 / gamma, grad_f, shifted);
    Vec p(n);
    obj.h().prox(shifted, gamma, p);
    if (counters) ++counters->proxevals;
    r.g.resize(n);
    kernels::lincomb(gamma, x, -gamma, p, r.g);
    // x+ is the prox point itself; forming x - g/gamma would smear exact
    // zeros of the l1 prox by one rounding.
    r.x_plus = std::move(p);
  }
  if (r.x_plus.empty()) {
    r.x_plus.resize(n);
    kernels::lincomb(1.0, x, -1.0 / gamma, r.g, r.x_plus);
  }
  r.x_plusplus.resize(n);
  kernels::lincomb(1.0, x, -1.0 / obj.mu(), r.g, r.x_plusplus);
  return r;
}

ProxStepResult prox_gradient(const CompositeObjective& obj, ConstSpan x,
                             double gamma, EvalCounters* counters,
                             bool count_zero_prox) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("prox_gradient: gamma must be > 0");
  }
  const Vec grad_f = gradient(obj, x, counters);
  return prox_gradient_from(obj, x, grad_f, gamma, counters, count_zero_prox);
}

MembershipReport subgradient_membership(const CompositeObjective& obj,
                                        ConstSpan x, double gamma,
                                        double tol) {
  const NonsmoothKind kind = obj.h().kind();
  if (kind != NonsmoothKind::kZero && kind != NonsmoothKind::kWeightedL1) {
    throw UnsupportedOperation(
        "subgradient_membership: only zero and weighted l1 terms are known");
  }
  const Vec grad_f = gradient(obj, x);
  const ProxStepResult step = prox_gradient_from(obj, x, grad_f, gamma);
  const double c = obj.h().l1_weight();

  MembershipReport report;
  for (std::size_t i = 0; i < grad_f.size(); ++i) {
    const double s = step.g[i] - grad_f[i];
    double violation = 0.0;
    if (kind == NonsmoothKind::kZero) {
      violation = std::fabs(s);
    } else if (step.x_plus[i] != 0.0) {
      violation = std::fabs(s - std::copysign(c, step.x_plus[i]));
    } else {
      violation = std::max(0.0, std::fabs(s) - c);
    }
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_index = i;
    }
  }
  report.ok = report.max_violation <= tol;
  return report;
}

}  // namespace ues
