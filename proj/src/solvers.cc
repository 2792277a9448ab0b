#include "ues/solvers.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "ues/errors.h"

namespace ues {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kAlphaFloor = 1e-12;
constexpr double kSearchCeiling = 1e12;
// Rounding slack in the sufficient-decrease tests.
constexpr double kDecreaseSlack = 4.0 * std::numeric_limits<double>::epsilon();

using Clock = std::chrono::steady_clock;

double alpha_for(double lk, double mu, bool accelerated) {
  const double ratio = mu / alpha_constant(lk, mu);
  return accelerated ? std::sqrt(ratio) : ratio;
}

// Shared driver for the four UES algorithms.
class UesRun {
 public:
  UesRun(Algorithm algo, const CompositeObjective& obj, ConstSpan x0,
         const SolverConfig& cfg, const Observer& observer)
      : algo_(algo),
        obj_(obj),
        cfg_(cfg),
        observer_(observer),
        accelerated_(is_accelerated(algo)),
        composite_(is_composite(algo)) {
    cfg_.validate();
    require_same_dim(x0.size(), obj.dim(), std::string(algorithm_name(algo)).c_str());
    if (!composite_ && !obj.is_smooth()) {
      throw std::invalid_argument(std::string(algorithm_name(algo)) +
                                  " requires h = 0; use a composite solver");
    }
    x_.assign(x0.begin(), x0.end());
  }

  SolveResult run() {
    start_ = Clock::now();
    initialize();
    while (gap_ > cfg_.epsilon && k_ < cfg_.max_iters) step();

    SolveResult r;
    r.algorithm = algo_;
    r.adaptive = cfg_.adaptive;
    r.x = x_;
    r.certified = gap_ <= cfg_.epsilon;
    r.iterations = k_;
    r.f_val = fx_.total();
    r.phi_star = bound_.phi_star;
    r.gap = gap_;
    r.counters = counters_;
    r.trace = std::move(trace_);
    return r;
  }

 private:
  SearchMode mode() const {
    if (composite_) {
      return accelerated_ ? SearchMode::kCompositeAccel
                          : SearchMode::kCompositePlain;
    }
    return accelerated_ ? SearchMode::kSmoothAccel : SearchMode::kSmoothPlain;
  }

  void initialize() {
    const double L = obj_.lipschitz();
    cache_.grad = gradient(obj_, x_, &counters_);
    ProxStepResult at_x0 = prox_gradient_from(obj_, x_, cache_.grad, L,
                                              &counters_, composite_);
    fx_ = evaluate_split(obj_, x_, &counters_);
    cache_.value = fx_;
    if (composite_) {
      const SplitDelta plus = evaluate_delta(obj_, at_x0.x_plus, x_, &counters_);
      bound_ = composite_bound_at(plus.value.total(), at_x0, obj_.mu());
      gap_ = fresh_bound_excess(-plus.delta.total(), at_x0, obj_.mu(), true);
    } else {
      bound_ = smooth_bound_at(fx_.total(), at_x0, obj_.mu());
      gap_ = fresh_bound_excess(0.0, at_x0, obj_.mu(), false);
    }
    if (cfg_.adaptive) {
      lk_ = cfg_.l0 ? *cfg_.l0 : estimate_l0(obj_, x_, cfg_.seed, &counters_);
    } else {
      lk_ = L;
    }
    at_x_ = std::move(at_x0);

    require_finite();
    IterationRecord rec = base_record();
    rec.alpha = kNaN;
    trace_.push_back(rec);
    notify(x_, kNaN, 1.0);
  }

  void step() {
    double alpha = 0.0;
    double beta = 1.0;
    Vec y;
    ProxStepResult at_y;
    SplitValue f_next;
    double step_delta = 0.0;   // F(x_{k+1}) - F(x_k)
    double anchor_delta = 0.0;  // F(x_{k+1}) - F(y), smooth tracks only
    int inner = 0;

    if (cfg_.adaptive) {
      AdaptiveStep s = adaptive_l_search(obj_, x_, bound_.v, lk_, k_ == 0,
                                         cfg_, mode(), &counters_, &cache_);
      lk_ = s.lk;
      alpha = s.alpha;
      beta = s.beta;
      y = std::move(s.y);
      at_y = std::move(s.steps);
      f_next = s.value_next;
      step_delta = s.delta_next.total();
      anchor_delta = step_delta - s.delta_y.total();
      inner = s.inner_count;
    } else {
      const double L = obj_.lipschitz();
      alpha = alpha_for(L, obj_.mu(), accelerated_);
      if (accelerated_) {
        beta = 1.0 / (1.0 + alpha);
        y.resize(x_.size());
        kernels::lincomb(beta, x_, 1.0 - beta, bound_.v, y);
        at_y = prox_gradient(obj_, y, L, &counters_, composite_);
        if (!composite_) {
          anchor_delta = -evaluate_delta(obj_, y, x_, &counters_).delta.total();
        }
      } else {
        y = x_;
        at_y = std::move(at_x_);
      }
      const SplitDelta next = evaluate_delta(obj_, at_y.x_plus, x_, &counters_);
      f_next = next.value;
      step_delta = next.delta.total();
      anchor_delta += step_delta;
    }

    // The composite bound is anchored at y+ = x_{k+1}, so its delta is 0.
    const double f_y = fx_.total() + (step_delta - anchor_delta);
    const QuadraticLowerBound fresh =
        composite_ ? composite_bound_at(f_next.total(), at_y, obj_.mu())
                   : smooth_bound_at(f_y, at_y, obj_.mu());
    const double excess = fresh_bound_excess(composite_ ? 0.0 : anchor_delta,
                                             at_y, obj_.mu(), composite_);
    const double prev_gap = gap_;
    gap_ = next_gap(gap_, step_delta, excess, alpha, bound_, fresh);
    bound_ = average_bounds(bound_, fresh, alpha);
    x_ = std::move(at_y.x_plus);
    fx_ = f_next;
    ++k_;

    // Plain variants step from x_{k+1} next; pay for that gradient now so
    // every iteration costs the same.
    if (!accelerated_) {
      cache_.grad = gradient(obj_, x_, &counters_);
      cache_.value = fx_;
      if (!cfg_.adaptive) {
        at_x_ = prox_gradient_from(obj_, x_, cache_.grad, obj_.lipschitz(),
                                   &counters_, composite_);
      }
    }

    lambda_ *= 1.0 - alpha;
    require_finite();

    IterationRecord rec = base_record();
    rec.alpha = alpha;
    rec.ratio = gap_ / prev_gap;
    rec.inner_count = inner;
    trace_.push_back(rec);
    notify(y, alpha, beta);
  }

  // A NaN gap would end the loop looking certified.
  void require_finite() const {
    if (!std::isfinite(gap_) || !std::isfinite(fx_.total()) ||
        !std::isfinite(bound_.phi_star)) {
      throw NumericalError("non-finite value, gap or bound at iteration " +
                           std::to_string(k_));
    }
  }

  IterationRecord base_record() const {
    IterationRecord rec;
    rec.k = k_;
    rec.fevals = counters_.fevals;
    rec.gevals = counters_.gevals;
    rec.proxevals = counters_.proxevals;
    rec.cpu_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                     Clock::now() - start_)
                     .count();
    rec.f_val = fx_.total();
    rec.phi_star = bound_.phi_star;
    rec.gap = gap_;
    rec.lk = lk_;
    rec.lambda_cum = lambda_;
    return rec;
  }

  void notify(const Vec& y, double alpha, double beta) {
    if (!observer_) return;
    UESState s;
    s.x = x_;
    s.v = bound_.v;
    s.y = y;
    s.alpha = alpha;
    s.beta = beta;
    s.lk = lk_;
    s.bound = bound_;
    s.f_val = fx_.total();
    s.gap = gap_;
    s.k = k_;
    observer_(s);
  }

  Algorithm algo_;
  const CompositeObjective& obj_;
  SolverConfig cfg_;
  const Observer& observer_;
  bool accelerated_;
  bool composite_;

  Clock::time_point start_;
  EvalCounters counters_;
  std::vector<IterationRecord> trace_;
  Vec x_;
  SplitValue fx_;
  PointCache cache_;
  ProxStepResult at_x_;
  QuadraticLowerBound bound_;
  double gap_ = 0.0;
  double lk_ = 0.0;
  double lambda_ = 1.0;
  std::int64_t k_ = 0;
};

}  // namespace

std::string_view algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kSuesa:
      return "suesa";
    case Algorithm::kAsuesa:
      return "asuesa";
    case Algorithm::kCuesa:
      return "cuesa";
    case Algorithm::kAcuesa:
      return "acuesa";
    case Algorithm::kGradientDescent:
      return "gd";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::kSuesa, Algorithm::kAsuesa, Algorithm::kCuesa,
                 Algorithm::kAcuesa, Algorithm::kGradientDescent}) {
    if (algorithm_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

bool is_accelerated(Algorithm algo) {
  return algo == Algorithm::kAsuesa || algo == Algorithm::kAcuesa;
}

bool is_composite(Algorithm algo) {
  return algo == Algorithm::kCuesa || algo == Algorithm::kAcuesa;
}

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (!(u > 1.0)) throw std::invalid_argument("increase factor u must be > 1");
  if (!(d > 1.0)) throw std::invalid_argument("decrease factor d must be > 1");
  if (l0 && !(*l0 > 0.0)) throw std::invalid_argument("l0 must be > 0");
}

double alpha_constant(double lk, double mu) {
  return std::max(lk, mu * (1.0 + kAlphaFloor));
}

SolveResult suesa(const CompositeObjective& obj, ConstSpan x0,
                  const SolverConfig& cfg, const Observer& observer) {
  return UesRun(Algorithm::kSuesa, obj, x0, cfg, observer).run();
}

SolveResult asuesa(const CompositeObjective& obj, ConstSpan x0,
                   const SolverConfig& cfg, const Observer& observer) {
  return UesRun(Algorithm::kAsuesa, obj, x0, cfg, observer).run();
}

SolveResult cuesa(const CompositeObjective& obj, ConstSpan x0,
                  const SolverConfig& cfg, const Observer& observer) {
  return UesRun(Algorithm::kCuesa, obj, x0, cfg, observer).run();
}

SolveResult acuesa(const CompositeObjective& obj, ConstSpan x0,
                   const SolverConfig& cfg, const Observer& observer) {
  return UesRun(Algorithm::kAcuesa, obj, x0, cfg, observer).run();
}

SolveResult gradient_descent(const CompositeObjective& obj, ConstSpan x0,
                             const SolverConfig& cfg,
                             const Observer& observer) {
  cfg.validate();
  require_same_dim(x0.size(), obj.dim(), "gradient_descent");
  if (!obj.is_smooth()) {
    throw std::invalid_argument("gradient_descent requires h = 0");
  }
  const auto start = Clock::now();
  const double L = obj.lipschitz();
  SolveResult r;
  r.algorithm = Algorithm::kGradientDescent;
  r.x.assign(x0.begin(), x0.end());
  Vec g(x0.size());
  double fx = evaluate(obj, r.x, &r.counters);
  auto gap_of = [&](double f) { return cfg.f_ref ? f - *cfg.f_ref : kNaN; };

  auto record = [&](std::int64_t k, double alpha) {
    IterationRecord rec;
    rec.k = k;
    rec.fevals = r.counters.fevals;
    rec.gevals = r.counters.gevals;
    rec.proxevals = r.counters.proxevals;
    rec.cpu_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                     Clock::now() - start)
                     .count();
    rec.f_val = fx;
    rec.phi_star = kNaN;
    rec.gap = gap_of(fx);
    rec.alpha = alpha;
    rec.lk = L;
    rec.lambda_cum = kNaN;
    r.trace.push_back(rec);
    if (observer) {
      UESState s;
      s.x = r.x;
      s.y = r.x;
      s.lk = L;
      s.f_val = fx;
      s.gap = rec.gap;
      s.k = k;
      s.alpha = alpha;
      observer(s);
    }
  };
  auto done = [&] { return cfg.f_ref && fx - *cfg.f_ref <= cfg.epsilon; };

  record(0, kNaN);
  std::int64_t k = 0;
  while (!done() && k < cfg.max_iters) {
    g = gradient(obj, r.x, &r.counters);
    kernels::axpy(-1.0 / L, g, r.x);
    fx = evaluate(obj, r.x, &r.counters);
    ++k;
    record(k, kNaN);
  }
  r.iterations = k;
  r.f_val = fx;
  r.phi_star = kNaN;
  r.gap = gap_of(fx);
  r.reached_target = done();
  return r;
}

SolveResult solve(Algorithm algo, const CompositeObjective& obj, ConstSpan x0,
                  const SolverConfig& cfg, const Observer& observer) {
  if (algo == Algorithm::kGradientDescent) {
    return gradient_descent(obj, x0, cfg, observer);
  }
  return UesRun(algo, obj, x0, cfg, observer).run();
}

AdaptiveStep adaptive_l_search(const CompositeObjective& obj, ConstSpan x_k,
                               ConstSpan v_k, double l_prev,
                               bool first_iteration, const SolverConfig& cfg,
                               SearchMode mode, EvalCounters* counters,
                               const PointCache* at_x) {
  cfg.validate();
  if (!(l_prev > 0.0)) {
    throw std::invalid_argument("adaptive_l_search: l_prev must be > 0");
  }
  require_same_dim(x_k.size(), obj.dim(), "adaptive_l_search");
  require_same_dim(v_k.size(), obj.dim(), "adaptive_l_search");
  const bool accelerated =
      mode == SearchMode::kSmoothAccel || mode == SearchMode::kCompositeAccel;
  const bool composite = mode == SearchMode::kCompositePlain ||
                         mode == SearchMode::kCompositeAccel;
  if (!composite && !obj.is_smooth()) {
    throw std::invalid_argument("smooth search mode needs h = 0");
  }
  const double mu = obj.mu();
  const std::size_t n = x_k.size();

  // Plain modes anchor at x_k for every trial.
  PointCache local;
  if (!accelerated && !at_x) {
    local.grad = gradient(obj, x_k, counters);
    local.value = evaluate_split(obj, x_k, counters);
    at_x = &local;
  }

  const double first_trial = first_iteration ? l_prev : l_prev / cfg.d;
  double ls = first_trial;
  AdaptiveStep out;
  Vec diff(n);
  for (int trial = 1;; ++trial) {
    if (ls > kSearchCeiling * first_trial || !std::isfinite(ls)) {
      throw DivergingSearchError(
          "adaptive_l_search: trial constant exceeded 1e12 x first trial");
    }
    const double alpha = alpha_for(ls, mu, accelerated);
    const double beta = 1.0 / (1.0 + alpha);

    Vec y;
    Vec grad_y;
    SplitDelta at_y;  // deltas relative to x_k
    if (accelerated) {
      y.resize(n);
      kernels::lincomb(beta, x_k, 1.0 - beta, v_k, y);
      grad_y = gradient(obj, y, counters);
      at_y = evaluate_delta(obj, y, x_k, counters);
    } else {
      y.assign(x_k.begin(), x_k.end());
      grad_y = at_x->grad;
      at_y.value = at_x->value;
    }
    ProxStepResult steps =
        prox_gradient_from(obj, y, grad_y, ls, counters, composite);
    const SplitDelta next = evaluate_delta(obj, steps.x_plus, x_k, counters);

    // Descent tests on F(x_s) - F(y), with a few ulps of the terms as slack.
    // The resolution term covers steps below the spacing of y, where x_s
    // rounds back onto y and the decrease cannot be observed; rounding x_s
    // moves F by at most ~eps/2 sum |G_i y_i|.
    double resolution = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      resolution += std::fabs(steps.g[i] * y[i]);
    }
    resolution *= std::numeric_limits<double>::epsilon();
    const double ds = next.delta.smooth - at_y.delta.smooth;
    bool accepted = false;
    if (!composite) {
      const double drop = kernels::sum_squares(grad_y) / (2.0 * ls);
      const double slack =
          kDecreaseSlack * (next.scale.smooth + at_y.scale.smooth + drop) +
          resolution;
      accepted = ds <= -drop + slack;
    } else {
      const double dt = next.delta.total() - at_y.delta.total();
      const double drop = kernels::sum_squares(steps.g) / (2.0 * ls);
      kernels::lincomb(1.0, steps.x_plus, -1.0, y, diff);
      const double lin = kernels::dot(grad_y, diff);
      double lin_scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        lin_scale += std::fabs(grad_y[i] * diff[i]);
      }
      const double quad = 0.5 * ls * kernels::sum_squares(diff);
      const double mag = next.scale.total() + at_y.scale.total();
      accepted = dt <= -drop + kDecreaseSlack * (mag + drop) + resolution &&
                 ds <= lin + quad +
                           kDecreaseSlack * (mag + lin_scale + quad);
    }
    if (accepted) {
      out.lk = ls;
      out.alpha = alpha;
      out.beta = accelerated ? beta : 1.0;
      out.y = std::move(y);
      out.steps = std::move(steps);
      out.value_y = at_y.value;
      out.value_next = next.value;
      out.delta_y = at_y.delta;
      out.delta_next = next.delta;
      out.inner_count = trial;
      return out;
    }
    ls *= cfg.u;
  }
}

double estimate_l0(const CompositeObjective& obj, ConstSpan x0,
                   std::uint64_t seed, EvalCounters* counters) {
  require_same_dim(x0.size(), obj.dim(), "estimate_l0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vec dir(x0.size());
  double norm = 0.0;
  while (norm == 0.0) {
    for (auto& di : dir) di = normal(rng);
    norm = std::sqrt(kernels::sum_squares(dir));
  }
  const double len = 1e-4 * (1.0 + std::sqrt(kernels::sum_squares(x0)));
  Vec shifted(x0.begin(), x0.end());
  kernels::axpy(len / norm, dir, shifted);
  const Vec g0 = gradient(obj, x0, counters);
  const Vec g1 = gradient(obj, shifted, counters);
  const double secant = std::sqrt(kernels::squared_distance(g0, g1)) / len;
  return std::max(secant, obj.mu() * (1.0 + kAlphaFloor));
}

}  // namespace ues
