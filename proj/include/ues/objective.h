#pragma once
// Composite objective F = f + h: a smooth, strongly convex part f behind an
// oracle interface and a convex nonsmooth part h with an exact prox.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ues/kernels.h"

namespace ues {

// Per-run evaluation counters. Oracles never own these.
struct EvalCounters {
  std::int64_t fevals = 0;
  std::int64_t gevals = 0;
  std::int64_t proxevals = 0;
};

// value(x_new) plus value(x_new) - value(x_old). scale is the sum of the
// magnitudes the delta was accumulated from, so eps * scale bounds its
// rounding error up to a small factor.
struct ValueDelta {
  double value = 0.0;
  double delta = 0.0;
  double scale = 0.0;
};

class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(ConstSpan x) const = 0;
  virtual void gradient(ConstSpan x, MutSpan grad) const = 0;
  // Overrides form the difference directly so it keeps relative accuracy
  // when it is far below |f|; the default subtracts two values.
  virtual ValueDelta value_delta(ConstSpan x_new, ConstSpan x_old) const;
};

enum class NonsmoothKind { kZero, kWeightedL1, kOther };

class NonsmoothTerm {
 public:
  virtual ~NonsmoothTerm() = default;
  virtual NonsmoothKind kind() const = 0;
  virtual double value(ConstSpan x) const = 0;
  virtual ValueDelta value_delta(ConstSpan x_new, ConstSpan x_old) const;
  // argmin_u { h(u) + (gamma/2) ||x - u||^2 }
  virtual void prox(ConstSpan x, double gamma, MutSpan out) const = 0;
  // Weight c of h = c ||.||_1; zero for the zero term.
  virtual double l1_weight() const { return 0.0; }
  bool is_zero() const { return kind() == NonsmoothKind::kZero; }
};

class ZeroTerm final : public NonsmoothTerm {
 public:
  NonsmoothKind kind() const override { return NonsmoothKind::kZero; }
  double value(ConstSpan) const override { return 0.0; }
  ValueDelta value_delta(ConstSpan, ConstSpan) const override { return {}; }
  void prox(ConstSpan x, double gamma, MutSpan out) const override;
};

// h(x) = c ||x||_1, c >= 0.
class WeightedL1Term final : public NonsmoothTerm {
 public:
  explicit WeightedL1Term(double weight);
  NonsmoothKind kind() const override { return NonsmoothKind::kWeightedL1; }
  double value(ConstSpan x) const override;
  ValueDelta value_delta(ConstSpan x_new, ConstSpan x_old) const override;
  void prox(ConstSpan x, double gamma, MutSpan out) const override;
  double l1_weight() const override { return weight_; }

 private:
  double weight_;
};

class CompositeObjective {
 public:
  // Throws std::invalid_argument unless 0 < mu <= lipschitz.
  CompositeObjective(std::shared_ptr<const SmoothOracle> f,
                     std::shared_ptr<const NonsmoothTerm> h, double mu,
                     double lipschitz);

  const SmoothOracle& f() const { return *f_; }
  const NonsmoothTerm& h() const { return *h_; }
  std::shared_ptr<const SmoothOracle> f_ptr() const { return f_; }
  std::shared_ptr<const NonsmoothTerm> h_ptr() const { return h_; }
  double mu() const { return mu_; }
  double lipschitz() const { return lipschitz_; }
  std::size_t dim() const { return f_->dim(); }
  bool is_smooth() const { return h_->is_zero(); }

  // Same f and h with different constants.
  CompositeObjective with_constants(double mu, double lipschitz) const;

 private:
  std::shared_ptr<const SmoothOracle> f_;
  std::shared_ptr<const NonsmoothTerm> h_;
  double mu_;
  double lipschitz_;
};

// Values of f and h at one point.
struct SplitValue {
  double smooth = 0.0;
  double nonsmooth = 0.0;
  double total() const { return smooth + nonsmooth; }
};

// F(x) = f(x) + h(x). Throws DimensionError on size mismatch.
double evaluate(const CompositeObjective& obj, ConstSpan x,
                EvalCounters* counters = nullptr);
SplitValue evaluate_split(const CompositeObjective& obj, ConstSpan x,
                          EvalCounters* counters = nullptr);

struct SplitDelta {
  SplitValue value;  // at x_new
  SplitValue delta;  // value at x_new minus value at x_old
  SplitValue scale;  // rounding scale of delta
};

// One counted evaluation at x_new, with the change from x_old.
SplitDelta evaluate_delta(const CompositeObjective& obj, ConstSpan x_new,
                          ConstSpan x_old, EvalCounters* counters = nullptr);
Vec gradient(const CompositeObjective& obj, ConstSpan x,
             EvalCounters* counters = nullptr);

struct PairResidual {
  // f(x) - f(y) - <grad f(y), x - y> - (mu/2)||x - y||^2, should be >= 0
  double strong_convexity = 0.0;
  // f(y) + <grad f(y), x - y> + (L/2)||x - y||^2 - f(x), should be >= 0
  double smoothness = 0.0;
  double tolerance = 0.0;
  bool strong_convexity_ok = true;
  bool smoothness_ok = true;
};

struct Assumption1Report {
  std::vector<PairResidual> pairs;
  std::size_t strong_convexity_violations = 0;
  std::size_t smoothness_violations = 0;
  bool ok() const {
    return strong_convexity_violations == 0 && smoothness_violations == 0;
  }
};

// Checks the strong convexity and smoothness inequalities of f with the
// objective's (mu, L) at every (x, y) pair. A residual counts as violated
// below -1e-9 * (1 + |f(x)|).
Assumption1Report check_assumption1(
    const CompositeObjective& obj,
    std::span<const std::pair<Vec, Vec>> samples);

// Mixed absolute/relative slack used by every certificate check.
inline double mixed_tolerance(double value, double scale = 1e-9) {
  return scale * (1.0 + (value < 0 ? -value : value));
}

}  // namespace ues
