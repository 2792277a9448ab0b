#include "ues/problems.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "ues/errors.h"

namespace ues {
namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// 1 / (1 + exp(-t))
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Power iteration needs to be tight enough that the reported L bounds the
// true curvature well below the 1e-9 check tolerance.
constexpr double kSigmaTol = 1e-10;
constexpr int kSigmaIters = 200000;
constexpr double kSigmaInflation = 1.0 + 1e-9;

void require_dataset(const ErmSpec& spec) {
  if (!spec.dataset || spec.dataset->empty() || spec.dataset->cols() == 0) {
    throw std::invalid_argument("ERM objective needs a nonempty dataset");
  }
  if (!(spec.lambda1 > 0.0)) {
    throw std::invalid_argument("ERM objective needs lambda1 > 0");
  }
  require_same_dim(spec.dataset->labels.size(), spec.dataset->rows(),
                   "ERM labels");
}

double sigma_max_squared(const SparseDataset& data) {
  const double s = estimate_sigma_max(data, kSigmaTol, kSigmaIters);
  return s * s * kSigmaInflation;
}

}  // namespace

std::string_view loss_name(Loss loss) {
  switch (loss) {
    case Loss::kLogistic:
      return "logistic";
    case Loss::kSquaredHinge:
      return "squared-hinge";
    case Loss::kLeastSquares:
      return "least-squares";
  }
  return "?";
}

Loss parse_loss(std::string_view name) {
  if (name == "logistic") return Loss::kLogistic;
  if (name == "squared-hinge") return Loss::kSquaredHinge;
  if (name == "least-squares") return Loss::kLeastSquares;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

ErmOracle::ErmOracle(std::shared_ptr<const SparseDataset> data, Loss loss,
                     double lambda, bool literal)
    : data_(std::move(data)), loss_(loss), lambda_(lambda), literal_(literal) {
  if (!data_ || data_->empty()) {
    throw std::invalid_argument("ErmOracle: empty dataset");
  }
  data_->a.validate();
  at_ = data_->a.transpose();
}

double ErmOracle::loss_value(double z, double y) const {
  switch (loss_) {
    case Loss::kLogistic: {
      const double l = softplus(-y * z);
      return literal_ ? l * l : l;
    }
    case Loss::kSquaredHinge: {
      const double r = std::max(0.0, literal_ ? y - z : 1.0 - y * z);
      return r * r;
    }
    case Loss::kLeastSquares: {
      const double r = z - y;
      return r * r;
    }
  }
  return 0.0;
}

double ErmOracle::loss_derivative(double z, double y) const {
  switch (loss_) {
    case Loss::kLogistic: {
      const double d = -y * sigmoid(-y * z);
      return literal_ ? 2.0 * softplus(-y * z) * d : d;
    }
    case Loss::kSquaredHinge: {
      if (literal_) return -2.0 * std::max(0.0, y - z);
      return -2.0 * y * std::max(0.0, 1.0 - y * z);
    }
    case Loss::kLeastSquares:
      return 2.0 * (z - y);
  }
  return 0.0;
}

namespace {

// softplus(t + dt) - softplus(t) = log1p(sigmoid(t) * expm1(dt))
double softplus_delta(double t, double dt) {
  // softplus(u) = u + softplus(-u): evaluate from the side where
  // sigmoid <= 1/2, so log1p never sees an argument near -1.
  if (t > 0) return dt + softplus_delta(-t, -dt);
  const double s = std::exp(t) / (1.0 + std::exp(t));
  const double e = std::expm1(dt);
  if (!std::isfinite(e)) return softplus(t + dt) - softplus(t);
  return std::log1p(s * e);
}

// max(0, r - dr)^2 - max(0, r)^2
double hinge_sq_delta(double r, double dr) {
  const double p0 = std::max(0.0, r);
  const double p1 = std::max(0.0, r - dr);
  const double dp = (r > 0 && r - dr > 0) ? -dr : p1 - p0;
  return dp * (p1 + p0);
}

}  // namespace

double ErmOracle::loss_delta(double z, double dz, double y) const {
  switch (loss_) {
    case Loss::kLogistic: {
      const double d = softplus_delta(-y * z, -y * dz);
      if (!literal_) return d;
      return d * (2.0 * softplus(-y * z) + d);
    }
    case Loss::kSquaredHinge:
      return literal_ ? hinge_sq_delta(y - z, dz)
                      : hinge_sq_delta(1.0 - y * z, y * dz);
    case Loss::kLeastSquares:
      return dz * (2.0 * (z - y) + dz);
  }
  return 0.0;
}

// Per-row differences are accurate to a few ulps of themselves, so the sum
// is accurate relative to sum |row delta| rather than to |f|.
ValueDelta ErmOracle::value_delta(ConstSpan x_new, ConstSpan x_old) const {
  require_same_dim(x_new.size(), dim(), "ErmOracle::value_delta");
  require_same_dim(x_old.size(), dim(), "ErmOracle::value_delta");
  const auto& a = data_->a;
  const auto& k = kernels::active();
  Vec d(x_new.size());
  kernels::lincomb(1.0, x_new, -1.0, x_old, d);
  double value = 0.0;
  long double delta = 0.0L;
  long double scale = 0.0L;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const auto b = static_cast<std::size_t>(a.row_ptr[i]);
    const auto e = static_cast<std::size_t>(a.row_ptr[i + 1]);
    const auto* idx = a.col_idx.data() + b;
    const auto* val = a.values.data() + b;
    const double y = data_->labels[i];
    value += loss_value(k.sparse_dot(idx, val, x_new.data(), e - b), y);
    const double row = loss_delta(k.sparse_dot(idx, val, x_old.data(), e - b),
                                  k.sparse_dot(idx, val, d.data(), e - b), y);
    delta += row;
    scale += std::fabs(row);
  }
  long double reg = 0.0L;
  long double reg_scale = 0.0L;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const long double t =
        static_cast<long double>(d[j]) * (x_new[j] + x_old[j]);
    reg += t;
    reg_scale += std::fabs(t);
  }
  const auto m = static_cast<double>(a.rows);
  return {value / m + 0.5 * lambda_ * kernels::sum_squares(x_new),
          static_cast<double>(delta / m + 0.5L * lambda_ * reg),
          static_cast<double>(scale / m + 0.5L * lambda_ * reg_scale)};
}

double ErmOracle::value(ConstSpan x) const {
  require_same_dim(x.size(), dim(), "ErmOracle::value");
  const auto& a = data_->a;
  const auto& k = kernels::active();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const auto b = static_cast<std::size_t>(a.row_ptr[i]);
    const auto e = static_cast<std::size_t>(a.row_ptr[i + 1]);
    const double z =
        k.sparse_dot(a.col_idx.data() + b, a.values.data() + b, x.data(), e - b);
    sum += loss_value(z, data_->labels[i]);
  }
  return sum / static_cast<double>(a.rows) +
         0.5 * lambda_ * kernels::sum_squares(x);
}

void ErmOracle::gradient(ConstSpan x, MutSpan grad) const {
  require_same_dim(x.size(), dim(), "ErmOracle::gradient");
  require_same_dim(grad.size(), dim(), "ErmOracle::gradient");
  const auto& a = data_->a;
  Vec r(a.rows);
  a.multiply(x, r);
  const double inv_m = 1.0 / static_cast<double>(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    r[i] = inv_m * loss_derivative(r[i], data_->labels[i]);
  }
  at_.multiply(r, grad);
  kernels::axpy(lambda_, x, grad);
}

DiagonalQuadratic::DiagonalQuadratic(Vec diag, Vec center)
    : diag_(std::move(diag)), center_(std::move(center)) {
  if (diag_.empty()) throw std::invalid_argument("DiagonalQuadratic: empty");
  if (center_.empty()) center_.assign(diag_.size(), 0.0);
  require_same_dim(center_.size(), diag_.size(), "DiagonalQuadratic");
}

double DiagonalQuadratic::value(ConstSpan x) const {
  require_same_dim(x.size(), dim(), "DiagonalQuadratic::value");
  double s = 0.0;
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    const double d = x[i] - center_[i];
    s += diag_[i] * d * d;
  }
  return 0.5 * s;
}

ValueDelta DiagonalQuadratic::value_delta(ConstSpan x_new,
                                          ConstSpan x_old) const {
  require_same_dim(x_new.size(), dim(), "DiagonalQuadratic::value_delta");
  require_same_dim(x_old.size(), dim(), "DiagonalQuadratic::value_delta");
  long double s = 0.0L;
  long double scale = 0.0L;
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    const long double d = static_cast<long double>(x_new[i]) - x_old[i];
    const long double mid = static_cast<long double>(x_new[i]) + x_old[i] -
                            2.0L * center_[i];
    s += diag_[i] * d * mid;
    scale += std::fabs(diag_[i] * d * mid);
  }
  return {value(x_new), static_cast<double>(0.5L * s),
          static_cast<double>(0.5L * scale)};
}

void DiagonalQuadratic::gradient(ConstSpan x, MutSpan grad) const {
  require_same_dim(x.size(), dim(), "DiagonalQuadratic::gradient");
  require_same_dim(grad.size(), dim(), "DiagonalQuadratic::gradient");
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    grad[i] = diag_[i] * (x[i] - center_[i]);
  }
}

CompositeObjective build_logistic(const ErmSpec& spec) {
  require_dataset(spec);
  const SparseDataset& data = *spec.dataset;
  const double m = static_cast<double>(data.rows());
  const double s2 = sigma_max_squared(data);
  double curvature = 0.25;
  if (spec.literal_paper_losses) {
    // The squared log-loss has no global curvature bound. Bound it on the
    // sublevel set {F <= F(0)}, where ||x|| <= log(2) sqrt(2 / lambda):
    // loss'' <= 2 + softplus(|t|) / 2 with |t| <= ||x|| max_i ||a_i||.
    double max_row = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      max_row = std::max(max_row, kernels::sum_squares(data.a.row_values(i)));
    }
    const double radius = std::log(2.0) * std::sqrt(2.0 / spec.lambda1);
    curvature = 2.0 + 0.5 * softplus(radius * std::sqrt(max_row));
  }
  auto f = std::make_shared<ErmOracle>(spec.dataset, Loss::kLogistic,
                                       spec.lambda1, spec.literal_paper_losses);
  return CompositeObjective(std::move(f), std::make_shared<ZeroTerm>(),
                            spec.lambda1, curvature * s2 / m + spec.lambda1);
}

CompositeObjective build_squared_hinge(const ErmSpec& spec) {
  require_dataset(spec);
  const SparseDataset& data = *spec.dataset;
  const double m = static_cast<double>(data.rows());
  auto f = std::make_shared<ErmOracle>(spec.dataset, Loss::kSquaredHinge,
                                       spec.lambda1, spec.literal_paper_losses);
  return CompositeObjective(std::move(f), std::make_shared<ZeroTerm>(),
                            spec.lambda1,
                            2.0 * sigma_max_squared(data) / m + spec.lambda1);
}

CompositeObjective build_elastic_net(const ErmSpec& spec) {
  require_dataset(spec);
  if (!(spec.lambda2 >= 0.0)) {
    throw std::invalid_argument("elastic net needs lambda2 >= 0");
  }
  const SparseDataset& data = *spec.dataset;
  const double m = static_cast<double>(data.rows());
  auto f = std::make_shared<ErmOracle>(spec.dataset, Loss::kLeastSquares,
                                       spec.lambda1, false);
  std::shared_ptr<const NonsmoothTerm> h;
  if (spec.lambda2 > 0.0) {
    h = std::make_shared<WeightedL1Term>(0.5 * spec.lambda2);
  } else {
    h = std::make_shared<ZeroTerm>();
  }
  return CompositeObjective(std::move(f), std::move(h), spec.lambda1,
                            2.0 * sigma_max_squared(data) / m + spec.lambda1);
}

CompositeObjective build_objective(const ErmSpec& spec) {
  switch (spec.loss) {
    case Loss::kLogistic:
      return build_logistic(spec);
    case Loss::kSquaredHinge:
      return build_squared_hinge(spec);
    case Loss::kLeastSquares:
      return build_elastic_net(spec);
  }
  throw std::invalid_argument("unknown loss");
}

CompositeObjective make_diagonal_quadratic(Vec diag, Vec center) {
  auto f = std::make_shared<DiagonalQuadratic>(std::move(diag),
                                               std::move(center));
  const auto [lo, hi] = std::minmax_element(f->diag().begin(), f->diag().end());
  const double mu = *lo;
  const double l = *hi;
  return CompositeObjective(std::move(f), std::make_shared<ZeroTerm>(), mu, l);
}

double estimate_sigma_max(const SparseDataset& data, double tol, int max_iters,
                          std::uint64_t seed) {
  if (data.empty() || data.cols() == 0) {
    throw std::invalid_argument("estimate_sigma_max: empty dataset");
  }
  if (data.a.nnz() == 0) return 0.0;
  const CsrMatrix at = data.a.transpose();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vec v(data.cols());
  for (auto& vi : v) vi = normal(rng);
  Vec av(data.rows());
  Vec w(data.cols());

  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const double vn = std::sqrt(kernels::sum_squares(v));
    if (vn == 0.0) return 0.0;
    for (auto& vi : v) vi /= vn;
    data.a.multiply(v, av);
    // theta = v'A'Av is a lower bound on sigma_max^2. The residual
    // ||A'Av - theta v|| bounds the eigenvalue error and, unlike the change
    // between iterates, stays large on plateaus near a second eigenvalue.
    const double theta = kernels::sum_squares(av);
    at.multiply(av, w);
    double r2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double rj = w[j] - theta * v[j];
      r2 += rj * rj;
    }
    estimate = std::sqrt(theta);
    if (std::sqrt(r2) <= tol * theta) return estimate;
    v.swap(w);
  }
  throw ConvergenceError("estimate_sigma_max: no convergence after " +
                             std::to_string(max_iters) + " iterations",
                         estimate);
}

}  // namespace ues
