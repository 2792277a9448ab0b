#pragma once
// Experimental objectives: regularized ERM with logistic, squared-hinge or
// least-squares loss, the elastic net, and diagonal quadratics.

#include <cstdint>
#include <memory>

#include "ues/dataio.h"
#include "ues/objective.h"

namespace ues {

enum class Loss { kLogistic, kSquaredHinge, kLeastSquares };

std::string_view loss_name(Loss loss);
Loss parse_loss(std::string_view name);

struct ErmSpec {
  Loss loss = Loss::kLogistic;
  double lambda1 = 0.0;  // l2 weight, also the strong convexity modulus
  double lambda2 = 0.0;  // l1 weight (elastic net only)
  std::shared_ptr<const SparseDataset> dataset;
  // Alternative loss forms: squared log-loss and max{0, y - a'x}^2.
  // Off by default.
  bool literal_paper_losses = false;
};

// f(x) = (1/m) sum_i loss(a_i'x, y_i) + (lambda/2)||x||^2.
class ErmOracle final : public SmoothOracle {
 public:
  ErmOracle(std::shared_ptr<const SparseDataset> data, Loss loss,
            double lambda, bool literal);
  std::size_t dim() const override { return data_->cols(); }
  double value(ConstSpan x) const override;
  void gradient(ConstSpan x, MutSpan grad) const override;
  ValueDelta value_delta(ConstSpan x_new, ConstSpan x_old) const override;

  const SparseDataset& data() const { return *data_; }

 private:
  double loss_value(double z, double y) const;
  double loss_derivative(double z, double y) const;
  double loss_delta(double z, double dz, double y) const;

  std::shared_ptr<const SparseDataset> data_;
  CsrMatrix at_;  // transpose of the design matrix
  Loss loss_;
  double lambda_;
  bool literal_;
};

// f(x) = 1/2 sum_i d_i (x_i - c_i)^2.
class DiagonalQuadratic final : public SmoothOracle {
 public:
  explicit DiagonalQuadratic(Vec diag, Vec center = {});
  std::size_t dim() const override { return diag_.size(); }
  double value(ConstSpan x) const override;
  void gradient(ConstSpan x, MutSpan grad) const override;
  ValueDelta value_delta(ConstSpan x_new, ConstSpan x_old) const override;
  const Vec& diag() const { return diag_; }
  const Vec& center() const { return center_; }

 private:
  Vec diag_;
  Vec center_;
};

CompositeObjective build_logistic(const ErmSpec& spec);
CompositeObjective build_squared_hinge(const ErmSpec& spec);
CompositeObjective build_elastic_net(const ErmSpec& spec);
// Dispatches on spec.loss (least squares builds the elastic net).
CompositeObjective build_objective(const ErmSpec& spec);

// Diagonal quadratic with mu = min d_i and L = max d_i.
CompositeObjective make_diagonal_quadratic(Vec diag, Vec center = {});

// Largest singular value of A by power iteration on A'A. Stops when the
// eigen-residual ||A'Av - theta v|| drops below tol * theta, theta = ||Av||^2
// with ||v|| = 1. The result never exceeds sigma_max. Throws ConvergenceError
// (carrying the last estimate) after max_iters.
double estimate_sigma_max(const SparseDataset& data, double tol = 1e-6,
                          int max_iters = 1000, std::uint64_t seed = 0x5eed);

}  // namespace ues
