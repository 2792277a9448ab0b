#pragma once
// Underestimate-sequence solvers. Each maintains x_k and a global quadratic
// lower bound phi_k and stops as soon as F(x_k) - phi*_k <= epsilon, which
// certifies F(x_k) - F* <= epsilon.
//
//   suesa   gradient step from x_k,            alpha = mu/L         (h = 0)
//   asuesa  gradient step from y_k = b x + (1-b) v, alpha = sqrt(mu/L) (h = 0)
//   cuesa   proximal gradient step from x_k,   alpha = mu/L
//   acuesa  proximal gradient step from y_k,   alpha = sqrt(mu/L)
//
// With cfg.adaptive the constant L is replaced per iteration by the first
// trial L_k accepted by adaptive_l_search().

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ues/objective.h"
#include "ues/proxcore.h"
#include "ues/underestimate.h"

namespace ues {

enum class Algorithm { kSuesa, kAsuesa, kCuesa, kAcuesa, kGradientDescent };

std::string_view algorithm_name(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);
bool is_accelerated(Algorithm algo);
bool is_composite(Algorithm algo);

struct SolverConfig {
  double epsilon = 1e-8;
  std::int64_t max_iters = 100000;
  bool adaptive = false;
  // Initial Lipschitz estimate for adaptive mode; estimated from a secant
  // when unset.
  std::optional<double> l0;
  double u = 2.0;  // increase factor
  double d = 2.0;  // decrease factor
  std::uint64_t seed = 1;
  // Reference optimum for the gradient-descent stop rule.
  std::optional<double> f_ref;

  // Throws std::invalid_argument on epsilon <= 0, u <= 1, d <= 1, ...
  void validate() const;
};

struct IterationRecord {
  std::int64_t k = 0;
  std::int64_t fevals = 0;
  std::int64_t gevals = 0;
  std::int64_t proxevals = 0;
  std::int64_t cpu_ns = 0;
  double f_val = 0.0;
  double phi_star = 0.0;  // NaN when no lower bound exists
  double gap = 0.0;       // NaN for gradient descent without a reference
  std::optional<double> ratio;  // gap_k / gap_{k-1}; empty at k = 0
  // Step parameters that produced this row (alpha is NaN at k = 0).
  double alpha = 0.0;
  double lk = 0.0;
  double lambda_cum = 1.0;  // prod_{i<k} (1 - alpha_i)
  int inner_count = 0;      // adaptive trials spent on this row
};

// Snapshot handed to observers after initialization and every iteration.
// y, alpha, beta and lk are the quantities that produced (x_k, phi_k).
struct UESState {
  Vec x;
  Vec v;
  Vec y;
  double alpha = 0.0;
  double beta = 1.0;
  double lk = 0.0;
  QuadraticLowerBound bound;
  double f_val = 0.0;
  double gap = 0.0;
  std::int64_t k = 0;
};

using Observer = std::function<void(const UESState&)>;

struct SolveResult {
  Algorithm algorithm = Algorithm::kSuesa;
  bool adaptive = false;
  Vec x;
  bool certified = false;  // gap <= epsilon reached
  bool reached_target = false;  // gradient descent: F - f_ref <= epsilon
  std::int64_t iterations = 0;
  double f_val = 0.0;
  double phi_star = 0.0;
  double gap = 0.0;
  EvalCounters counters;
  std::vector<IterationRecord> trace;
};

SolveResult suesa(const CompositeObjective& obj, ConstSpan x0,
                  const SolverConfig& cfg, const Observer& observer = {});
SolveResult asuesa(const CompositeObjective& obj, ConstSpan x0,
                   const SolverConfig& cfg, const Observer& observer = {});
SolveResult cuesa(const CompositeObjective& obj, ConstSpan x0,
                  const SolverConfig& cfg, const Observer& observer = {});
SolveResult acuesa(const CompositeObjective& obj, ConstSpan x0,
                   const SolverConfig& cfg, const Observer& observer = {});
// Fixed 1/L gradient steps; no lower bound. Stops on max_iters or, given
// cfg.f_ref, once F(x_k) - f_ref <= epsilon.
SolveResult gradient_descent(const CompositeObjective& obj, ConstSpan x0,
                             const SolverConfig& cfg,
                             const Observer& observer = {});

SolveResult solve(Algorithm algo, const CompositeObjective& obj, ConstSpan x0,
                  const SolverConfig& cfg, const Observer& observer = {});

enum class SearchMode { kSmoothPlain, kSmoothAccel, kCompositePlain,
                        kCompositeAccel };

// Values already known at x_k, reused by the plain modes.
struct PointCache {
  Vec grad;
  SplitValue value;
};

struct AdaptiveStep {
  double lk = 0.0;     // accepted trial constant L_s
  double alpha = 0.0;
  double beta = 1.0;
  Vec y;
  ProxStepResult steps;  // at y with gamma = lk; x_{k+1} = steps.x_plus
  SplitValue value_y;
  SplitValue value_next;
  SplitValue delta_y;     // F(y) - F(x_k)
  SplitValue delta_next;  // F(x_{k+1}) - F(x_k)
  int inner_count = 0;
};

// One call of the adaptive Lipschitz search. The first trial is l_prev when
// first_iteration is set and l_prev / d otherwise; each rejected trial is
// multiplied by u. Smooth modes accept once
//   f(x_s) <= f(y_s) - ||grad f(y_s)||^2 / (2 L_s);
// composite modes once
//   F(x_s) <= F(y_s) - ||G_{L_s}(y_s)||^2 / (2 L_s)
// and f(x_s) <= f(y_s) + <grad f(y_s), x_s - y_s> + (L_s/2)||x_s - y_s||^2.
// Throws DivergingSearchError if L_s exceeds 1e12 times the first trial.
AdaptiveStep adaptive_l_search(const CompositeObjective& obj, ConstSpan x_k,
                               ConstSpan v_k, double l_prev,
                               bool first_iteration, const SolverConfig& cfg,
                               SearchMode mode,
                               EvalCounters* counters = nullptr,
                               const PointCache* at_x = nullptr);

// Secant estimate ||grad f(x0 + delta) - grad f(x0)|| / ||delta|| along a
// random direction of length 1e-4 (1 + ||x0||), floored at mu (1 + 1e-12).
double estimate_l0(const CompositeObjective& obj, ConstSpan x0,
                   std::uint64_t seed, EvalCounters* counters = nullptr);

// The constant that defines alpha: L_k, kept strictly above mu so that
// alpha stays inside (0, 1).
double alpha_constant(double lk, double mu);

}  // namespace ues
