#include <quadmath.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "test_support.h"
#include "ues/errors.h"
#include "ues/problems.h"
#include "ues/solvers.h"

using namespace ues;

namespace {

using Quad = __float128;

std::shared_ptr<const SparseDataset> dataset(std::size_t rows, std::size_t cols,
                                             double density, std::uint64_t seed,
                                             bool binary = true) {
  return std::make_shared<SparseDataset>(
      testing::random_sparse_dataset(rows, cols, density, seed, binary));
}

Eigen::MatrixXd dense(const SparseDataset& d) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d.rows(), d.cols());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto idx = d.a.row_indices(i);
    const auto val = d.a.row_values(i);
    for (std::size_t p = 0; p < idx.size(); ++p) a(i, idx[p]) = val[p];
  }
  return a;
}

double svd_sigma_max(const SparseDataset& d) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense(d));
  return svd.singularValues()(0);
}

// Hessian of the ERM smooth part from per-row second derivatives.
double hessian_max_eig(const SparseDataset& d, const Vec& x, double lambda,
                       double (*second)(double z, double y)) {
  const Eigen::MatrixXd a = dense(d);
  const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  const Eigen::VectorXd z = a * xv;
  Eigen::VectorXd w(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) w(i) = second(z(i), d.labels[i]);
  Eigen::MatrixXd h = a.transpose() * w.asDiagonal() * a / static_cast<double>(d.rows());
  h.diagonal().array() += lambda;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return es.eigenvalues().maxCoeff();
}

double logistic_second(double z, double y) {
  const double s = 1.0 / (1.0 + std::exp(-y * z));
  return s * (1.0 - s);
}

double literal_logistic_second(double z, double y) {
  // d2/dt2 softplus(t)^2 = 2 (sigmoid(t)^2 + softplus(t) sigmoid'(t)), t = -y z
  const double t = -y * z;
  const double s = 1.0 / (1.0 + std::exp(-t));
  const double sp = t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  return 2.0 * (s * s + sp * s * (1.0 - s));
}

// Direct quad-precision evaluation of the ERM objective.
Quad quad_erm_value(const SparseDataset& d, const Vec& x, Loss loss, double lambda,
                    bool literal) {
  Quad sum = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    Quad z = 0;
    const auto idx = d.a.row_indices(i);
    const auto val = d.a.row_values(i);
    for (std::size_t p = 0; p < idx.size(); ++p) z += Quad(val[p]) * Quad(x[idx[p]]);
    const Quad y = d.labels[i];
    Quad l = 0;
    switch (loss) {
      case Loss::kLogistic: {
        const Quad t = -y * z;
        const Quad sp = t > 0 ? t + log1pq(expq(-t)) : log1pq(expq(t));
        l = literal ? sp * sp : sp;
        break;
      }
      case Loss::kSquaredHinge: {
        Quad r = literal ? y - z : 1 - y * z;
        if (r < 0) r = 0;
        l = r * r;
        break;
      }
      case Loss::kLeastSquares:
        l = (z - y) * (z - y);
        break;
    }
    sum += l;
  }
  Quad reg = 0;
  for (double xi : x) reg += Quad(xi) * Quad(xi);
  return sum / Quad(static_cast<double>(d.rows())) + Quad(lambda) / 2 * reg;
}

}  // namespace

TEST_CASE("logistic: values and gradients at known points") {
  const auto d = dataset(30, 6, 0.5, 1);
  const auto obj = build_logistic({Loss::kLogistic, 0.1, 0.0, d});
  CHECK(evaluate(obj, Vec(6, 0.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(obj.is_smooth());
  CHECK(obj.mu() == 0.1);

  auto single = std::make_shared<SparseDataset>(SparseDataset::from_dense({{1.0}}, {1.0}));
  const auto one = build_logistic({Loss::kLogistic, 1.0, 0.0, single});
  CHECK(gradient(one, Vec{0.0})[0] == -0.5);
}

TEST_CASE("squared hinge: inactive and all-active regimes") {
  auto d = std::make_shared<SparseDataset>(
      SparseDataset::from_dense({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, {1.0, -1.0, 1.0}));
  const auto obj = build_squared_hinge({Loss::kSquaredHinge, 0.2, 0.0, d});
  CHECK(evaluate(obj, Vec{0.0, 0.0}) == 1.0);
  // margins: 3, 2, 1 -> all >= 1, hinge inactive
  const Vec x{3.0, -2.0};
  CHECK(evaluate(obj, x) == doctest::Approx(0.1 * 13.0).epsilon(1e-15));
  const Vec g = gradient(obj, x);
  CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(-0.4).epsilon(1e-15));
}

TEST_CASE("literal paper losses") {
  auto d = std::make_shared<SparseDataset>(
      SparseDataset::from_dense({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, {1.0, -1.0, 1.0}));
  const auto lg = build_logistic({Loss::kLogistic, 0.1, 0.0, d, true});
  CHECK(evaluate(lg, Vec{0.0, 0.0}) ==
        doctest::Approx(std::log(2.0) * std::log(2.0)).epsilon(1e-15));
  // hinge on y - a^T x: at x = 0 the terms are max(0, y)^2 = 1, 0, 1
  const auto hg = build_squared_hinge({Loss::kSquaredHinge, 0.1, 0.0, d, true});
  CHECK(evaluate(hg, Vec{0.0, 0.0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("least squares: F(0) is the mean squared target") {
  const auto d = dataset(25, 5, 0.6, 2, false);
  const auto obj = build_elastic_net({Loss::kLeastSquares, 0.1, 0.3, d});
  double want = 0.0;
  for (double y : d->labels) want += y * y;
  want /= 25.0;
  CHECK(evaluate(obj, Vec(5, 0.0)) == doctest::Approx(want).epsilon(1e-14));
  CHECK(obj.h().kind() == NonsmoothKind::kWeightedL1);
  CHECK(obj.h().l1_weight() == 0.15);
}

TEST_CASE("builders reject bad inputs") {
  CHECK_THROWS_AS(build_logistic({Loss::kLogistic, 0.1, 0.0, nullptr}), std::invalid_argument);
  auto empty = std::make_shared<SparseDataset>();
  CHECK_THROWS_AS(build_logistic({Loss::kLogistic, 0.1, 0.0, empty}), std::invalid_argument);
  const auto d = dataset(10, 3, 0.5, 3);
  CHECK_THROWS_AS(build_logistic({Loss::kLogistic, 0.0, 0.0, d}), std::invalid_argument);
  CHECK_THROWS_AS(build_elastic_net({Loss::kLeastSquares, 0.1, -1.0, d}), std::invalid_argument);
  CHECK(parse_loss("squared-hinge") == Loss::kSquaredHinge);
  CHECK_THROWS_AS(parse_loss("hinge"), std::invalid_argument);
}

TEST_CASE("sigma_max: closed forms") {
  const SparseDataset diag = SparseDataset::from_dense({{3.0, 0.0}, {0.0, 1.0}}, {1.0, 1.0});
  CHECK(estimate_sigma_max(diag, 1e-12, 10000) == doctest::Approx(3.0).epsilon(1e-9));
  const SparseDataset ones = SparseDataset::from_dense({{1.0, 1.0}, {1.0, 1.0}}, {1.0, 1.0});
  CHECK(estimate_sigma_max(ones, 1e-12, 10000) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("sigma_max matches a dense SVD on random sparse matrices") {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const auto d = dataset(50, 20, 0.3, seed);
    const double want = svd_sigma_max(*d);
    CHECK(std::fabs(estimate_sigma_max(*d) - want) <= 1e-5 * want);
  }
}

TEST_CASE("sigma_max reports non-convergence with its last estimate") {
  const auto d = dataset(50, 20, 0.3, 4);
  try {
    estimate_sigma_max(*d, 1e-15, 2);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_estimate() > 0.0);
    CHECK(e.last_estimate() <= svd_sigma_max(*d) * (1 + 1e-12));
  }
}

TEST_CASE("builder L bounds the Hessian; Assumption 1 holds on samples") {
  std::mt19937_64 rng(77);
  const auto d = dataset(80, 12, 0.4, 5);
  const auto obj = build_logistic({Loss::kLogistic, 1e-4, 0.0, d});
  for (int t = 0; t < 20; ++t) {
    const Vec x = testing::random_vec(rng, 12, 3.0);
    CHECK(hessian_max_eig(*d, x, 1e-4, logistic_second) <= obj.lipschitz());
  }
  // Tightness: the bound at x = 0 (where sigma(1-sigma) = 1/4) is attained.
  CHECK(hessian_max_eig(*d, Vec(12, 0.0), 1e-4, logistic_second) ==
        doctest::Approx(obj.lipschitz()).epsilon(1e-6));

  std::vector<std::pair<Vec, Vec>> pairs;
  for (int i = 0; i < 100; ++i)
    pairs.emplace_back(testing::random_vec(rng, 12, 2.0), testing::random_vec(rng, 12, 2.0));
  CHECK(check_assumption1(obj, pairs).ok());

  const auto hinge = build_squared_hinge({Loss::kSquaredHinge, 1e-3, 0.0, d});
  CHECK(check_assumption1(hinge, pairs).ok());
  const auto reg = dataset(80, 12, 0.4, 6, false);
  const auto en = build_elastic_net({Loss::kLeastSquares, 1e-3, 1e-2, reg});
  CHECK(check_assumption1(en, pairs).ok());
}

TEST_CASE("literal squared log-loss: curvature bound on the sublevel set") {
  const auto d = dataset(40, 5, 0.6, 8);
  const double lambda = 0.05;
  const auto obj = build_logistic({Loss::kLogistic, lambda, 0.0, d, true});
  const double f0 = evaluate(obj, Vec(5, 0.0));
  std::mt19937_64 rng(3);
  int tested = 0;
  std::uniform_real_distribution<double> radius(0.0, 1.0);
  for (int t = 0; t < 400; ++t) {
    Vec x = testing::random_vec(rng, 5, 1.0);
    const double r = 3.0 * radius(rng) / testing::norm2(x);
    for (auto& xi : x) xi *= r;
    if (evaluate(obj, x) > f0) continue;
    ++tested;
    CHECK(hessian_max_eig(*d, x, lambda, literal_logistic_second) <= obj.lipschitz());
  }
  CHECK(tested > 10);
  SolverConfig cfg;
  const auto r = suesa(obj, Vec(5, 0.0), cfg);
  CHECK(r.certified);
}

TEST_CASE("elastic net with A = I matches the per-coordinate soft-threshold") {
  auto d = std::make_shared<SparseDataset>(
      SparseDataset::from_dense({{1.0, 0.0}, {0.0, 1.0}}, {1.0, 0.0}));
  const auto obj = build_elastic_net({Loss::kLeastSquares, 0.1, 0.1, d});
  CHECK(obj.lipschitz() == doctest::Approx(2.0 / 2.0 + 0.1).epsilon(1e-8));
  // (1/2)(x - y)^2 + 0.05 x^2 + 0.05 |x|  ->  x = soft(y, 0.05) / 1.1
  const Vec closed{0.95 / 1.1, 0.0};
  SolverConfig cfg;
  cfg.epsilon = 1e-8;
  for (auto algo : {Algorithm::kCuesa, Algorithm::kAcuesa}) {
    const auto r = solve(algo, obj, Vec{0.0, 0.0}, cfg);
    CHECK(r.certified);
    CHECK(r.f_val - evaluate(obj, closed) <= 1e-8);
    CHECK(std::sqrt(testing::dist2(r.x, closed)) <= std::sqrt(2e-8 / obj.mu()));
  }
  SolverConfig ref_cfg;
  ref_cfg.epsilon = 1e-11;
  const auto ref = acuesa(obj, Vec{0.0, 0.0}, ref_cfg);
  const auto r = cuesa(obj, Vec{0.0, 0.0}, cfg);
  CHECK(r.f_val - ref.f_val <= 1e-8);
}

TEST_CASE("elastic net with lambda2 = 0 is ridge regression") {
  const auto d = dataset(30, 6, 0.5, 9, false);
  const auto en = build_elastic_net({Loss::kLeastSquares, 0.05, 0.0, d});
  CHECK(en.is_smooth());
  SolverConfig cfg;
  cfg.max_iters = 100;
  const auto a = cuesa(en, Vec(6, 1.0), cfg);
  const auto b = suesa(en, Vec(6, 1.0), cfg);
  CHECK(a.iterations == b.iterations);
  CHECK(std::sqrt(testing::dist2(a.x, b.x)) <= 1e-12 * (1 + testing::norm2(b.x)));
}

TEST_CASE("value_delta agrees with a quad-precision difference") {
  std::mt19937_64 rng(101);
  const auto bin = dataset(50, 8, 0.5, 11);
  const auto reg = dataset(50, 8, 0.5, 12, false);
  struct Case {
    std::shared_ptr<const SparseDataset> data;
    Loss loss;
    bool literal;
  };
  const Case cases[] = {{bin, Loss::kLogistic, false}, {bin, Loss::kLogistic, true},
                        {bin, Loss::kSquaredHinge, false}, {bin, Loss::kSquaredHinge, true},
                        {reg, Loss::kLeastSquares, false}};
  for (const auto& c : cases) {
    CAPTURE(loss_name(c.loss));
    CAPTURE(c.literal);
    const ErmOracle f(c.data, c.loss, 0.03, c.literal);
    for (double step : {1.0, 1e-4, 1e-9}) {
      for (int t = 0; t < 10; ++t) {
        const Vec x = testing::random_vec(rng, 8, 0.8);
        Vec xn = testing::random_vec(rng, 8, step);
        for (std::size_t i = 0; i < 8; ++i) xn[i] += x[i];
        const Quad want = quad_erm_value(*c.data, xn, c.loss, 0.03, c.literal) -
                          quad_erm_value(*c.data, x, c.loss, 0.03, c.literal);
        const ValueDelta got = f.value_delta(xn, x);
        const double err = std::fabs(static_cast<double>(Quad(got.delta) - want));
        CHECK(err <= 16 * 2.2e-16 * got.scale + 1e-300);
        CHECK(got.value == f.value(xn));
        if (step == 1e-9) {
          // the plain difference of values would be off by ~1e-7 here
          CHECK(err <= 1e-12 * std::fabs(static_cast<double>(want)));
        }
      }
    }
  }
}

TEST_CASE("value_delta for the quadratic and the l1 term") {
  std::mt19937_64 rng(5);
  const DiagonalQuadratic q({1.0, 3.0, 10.0}, {0.5, -1.0, 2.0});
  const WeightedL1Term h(0.7);
  for (int t = 0; t < 20; ++t) {
    const Vec x = testing::random_vec(rng, 3);
    Vec xn = testing::random_vec(rng, 3, 1e-9);
    for (std::size_t i = 0; i < 3; ++i) xn[i] += x[i];
    Quad wq = 0, wh = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      const Quad a = Quad(xn[i]) - Quad(q.center()[i]);
      const Quad b = Quad(x[i]) - Quad(q.center()[i]);
      wq += Quad(q.diag()[i]) * (a * a - b * b) / 2;
      wh += Quad(0.7) * (fabsq(Quad(xn[i])) - fabsq(Quad(x[i])));
    }
    const auto dq = q.value_delta(xn, x);
    const auto dh = h.value_delta(xn, x);
    CHECK(std::fabs(static_cast<double>(Quad(dq.delta) - wq)) <= 1e-12 * std::fabs(static_cast<double>(wq)));
    CHECK(std::fabs(static_cast<double>(Quad(dh.delta) - wh)) <= 1e-12 * std::fabs(static_cast<double>(wh)) + 1e-300);
  }
}

TEST_CASE("value_delta stays finite and accurate at extreme margins") {
  // Margins of several hundred: sigmoid rounds to 0 or 1 and expm1 of the
  // margin change overflows or saturates at -1.
  auto d = std::make_shared<SparseDataset>(SparseDataset::from_dense(
      {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {-1.0, 2.0}}, {1.0, -1.0, 1.0, -1.0}));
  for (bool literal : {false, true}) {
    const ErmOracle f(d, Loss::kLogistic, 1e-3, literal);
    const Vec pts[] = {{40.0, -40.0}, {-40.0, 40.0}, {400.0, 300.0},
                       {-500.0, 20.0}, {40.0, -40.0 + 1e-9}, {0.0, 0.0}};
    for (const auto& a : pts) {
      for (const auto& b : pts) {
        const ValueDelta got = f.value_delta(a, b);
        const Quad want = quad_erm_value(*d, a, Loss::kLogistic, 1e-3, literal) -
                          quad_erm_value(*d, b, Loss::kLogistic, 1e-3, literal);
        CHECK(std::isfinite(got.delta));
        CHECK(std::fabs(static_cast<double>(Quad(got.delta) - want)) <=
              16 * 2.2e-16 * got.scale + 1e-300);
      }
    }
  }
}
