#include "ues/objective.h"

#include <cmath>
#include <stdexcept>

#include "ues/errors.h"

namespace ues {

ValueDelta SmoothOracle::value_delta(ConstSpan x_new, ConstSpan x_old) const {
  const double v = value(x_new);
  const double w = value(x_old);
  return {v, v - w, std::fabs(v) + std::fabs(w)};
}

ValueDelta NonsmoothTerm::value_delta(ConstSpan x_new, ConstSpan x_old) const {
  const double v = value(x_new);
  const double w = value(x_old);
  return {v, v - w, std::fabs(v) + std::fabs(w)};
}

void ZeroTerm::prox(ConstSpan x, double gamma, MutSpan out) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox: gamma must be > 0");
  require_same_dim(x.size(), out.size(), "prox");
  std::copy(x.begin(), x.end(), out.begin());
}

WeightedL1Term::WeightedL1Term(double weight) : weight_(weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("l1 weight must be finite and >= 0");
  }
}

double WeightedL1Term::value(ConstSpan x) const {
  return weight_ * kernels::abs_sum(x);
}

ValueDelta WeightedL1Term::value_delta(ConstSpan x_new,
                                       ConstSpan x_old) const {
  require_same_dim(x_new.size(), x_old.size(), "l1 value_delta");
  long double d = 0.0L;
  long double scale = 0.0L;
  for (std::size_t i = 0; i < x_new.size(); ++i) {
    const long double t =
        static_cast<long double>(std::fabs(x_new[i])) - std::fabs(x_old[i]);
    d += t;
    scale += std::fabs(t);
  }
  return {value(x_new), weight_ * static_cast<double>(d),
          weight_ * static_cast<double>(scale)};
}

void WeightedL1Term::prox(ConstSpan x, double gamma, MutSpan out) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox: gamma must be > 0");
  kernels::soft_threshold(x, weight_ / gamma, out);
}

CompositeObjective::CompositeObjective(std::shared_ptr<const SmoothOracle> f,
                                       std::shared_ptr<const NonsmoothTerm> h,
                                       double mu, double lipschitz)
    : f_(std::move(f)), h_(std::move(h)), mu_(mu), lipschitz_(lipschitz) {
  if (!f_) throw std::invalid_argument("smooth oracle is null");
  if (!h_) h_ = std::make_shared<ZeroTerm>();
  if (!(mu_ > 0.0) || !(mu_ <= lipschitz_) || !std::isfinite(lipschitz_)) {
    throw std::invalid_argument("objective constants must satisfy 0 < mu <= L");
  }
}

CompositeObjective CompositeObjective::with_constants(double mu,
                                                      double lipschitz) const {
  return CompositeObjective(f_, h_, mu, lipschitz);
}

SplitValue evaluate_split(const CompositeObjective& obj, ConstSpan x,
                          EvalCounters* counters) {
  require_same_dim(x.size(), obj.dim(), "evaluate");
  if (counters) ++counters->fevals;
  return {obj.f().value(x), obj.h().value(x)};
}

SplitDelta evaluate_delta(const CompositeObjective& obj, ConstSpan x_new,
                          ConstSpan x_old, EvalCounters* counters) {
  require_same_dim(x_new.size(), obj.dim(), "evaluate");
  require_same_dim(x_old.size(), obj.dim(), "evaluate");
  if (counters) ++counters->fevals;
  const ValueDelta f = obj.f().value_delta(x_new, x_old);
  const ValueDelta h = obj.h().value_delta(x_new, x_old);
  return {{f.value, h.value}, {f.delta, h.delta}, {f.scale, h.scale}};
}

double evaluate(const CompositeObjective& obj, ConstSpan x,
                EvalCounters* counters) {
  return evaluate_split(obj, x, counters).total();
}

Vec gradient(const CompositeObjective& obj, ConstSpan x,
             EvalCounters* counters) {
  require_same_dim(x.size(), obj.dim(), "gradient");
  if (counters) ++counters->gevals;
  Vec g(x.size());
  obj.f().gradient(x, g);
  return g;
}

Assumption1Report check_assumption1(
    const CompositeObjective& obj,
    std::span<const std::pair<Vec, Vec>> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("check_assumption1: no sample pairs");
  }
  Assumption1Report report;
  report.pairs.reserve(samples.size());
  const auto& f = obj.f();
  Vec gy(obj.dim());
  Vec diff(obj.dim());
  for (const auto& [x, y] : samples) {
    require_same_dim(x.size(), obj.dim(), "check_assumption1");
    require_same_dim(y.size(), obj.dim(), "check_assumption1");
    const double fx = f.value(x);
    const double fy = f.value(y);
    f.gradient(y, gy);
    kernels::lincomb(1.0, x, -1.0, y, diff);
    const double lin = kernels::dot(gy, diff);
    const double dist2 = kernels::sum_squares(diff);

    PairResidual r;
    r.strong_convexity = fx - fy - lin - 0.5 * obj.mu() * dist2;
    r.smoothness = fy + lin + 0.5 * obj.lipschitz() * dist2 - fx;
    r.tolerance = mixed_tolerance(fx);
    r.strong_convexity_ok = r.strong_convexity >= -r.tolerance;
    r.smoothness_ok = r.smoothness >= -r.tolerance;
    if (!r.strong_convexity_ok) ++report.strong_convexity_violations;
    if (!r.smoothness_ok) ++report.smoothness_violations;
    report.pairs.push_back(r);
  }
  return report;
}

}  // namespace ues
