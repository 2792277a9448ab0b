#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "test_support.h"
#include "ues/errors.h"
#include "ues/objective.h"
#include "ues/problems.h"

using namespace ues;

namespace {

CompositeObjective half_norm(std::shared_ptr<const NonsmoothTerm> h = nullptr) {
  return CompositeObjective(std::make_shared<DiagonalQuadratic>(Vec{1.0, 1.0}),
                            std::move(h), 1.0, 1.0);
}

}  // namespace

TEST_CASE("evaluate: worked values") {
  CHECK(evaluate(half_norm(), Vec{3.0, 4.0}) == 12.5);
  CHECK(evaluate(half_norm(std::make_shared<WeightedL1Term>(1.0)),
                 Vec{1.0, -1.0}) == 3.0);

  auto data = std::make_shared<SparseDataset>(
      SparseDataset::from_dense({{1.0, 0.0}, {0.0, 1.0}}, {1.0, -1.0}));
  const auto logistic = build_logistic({Loss::kLogistic, 0.1, 0.0, data});
  CHECK(evaluate(logistic, Vec{0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("evaluate splits F into f and h and counts") {
  const auto obj = half_norm(std::make_shared<WeightedL1Term>(2.0));
  EvalCounters c;
  const auto s = evaluate_split(obj, Vec{1.0, -2.0}, &c);
  CHECK(s.smooth == 2.5);
  CHECK(s.nonsmooth == 6.0);
  CHECK(s.total() == 8.5);
  CHECK(c.fevals == 1);
  gradient(obj, Vec{1.0, -2.0}, &c);
  CHECK(c.gevals == 1);
}

TEST_CASE("evaluate rejects dimension mismatch") {
  CHECK_THROWS_AS(evaluate(half_norm(), Vec{1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(gradient(half_norm(), Vec{1.0}), DimensionError);
}

TEST_CASE("objective constants are validated") {
  auto f = std::make_shared<DiagonalQuadratic>(Vec{1.0, 4.0});
  CHECK_THROWS_AS(CompositeObjective(f, nullptr, 0.0, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(CompositeObjective(f, nullptr, 5.0, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(CompositeObjective(nullptr, nullptr, 1.0, 4.0), std::invalid_argument);
  CompositeObjective ok(f, nullptr, 1.0, 4.0);
  CHECK(ok.is_smooth());
  const auto changed = ok.with_constants(1.0, 3.0);
  CHECK(changed.lipschitz() == 3.0);
  CHECK(ok.lipschitz() == 4.0);
}

TEST_CASE("zero term prox is the identity") {
  ZeroTerm z;
  Vec out(3);
  const Vec x{1.5, -2.0, 0.0};
  for (double gamma : {1e-3, 1.0, 1e6}) {
    z.prox(x, gamma, out);
    CHECK(out == x);
  }
}

TEST_CASE("check_assumption1 on an exact quadratic") {
  const auto obj = make_diagonal_quadratic({1.0, 4.0});
  std::mt19937_64 rng(3);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int i = 0; i < 50; ++i)
    pairs.emplace_back(testing::random_vec(rng, 2, 5.0), testing::random_vec(rng, 2, 5.0));
  pairs.emplace_back(Vec{0.0, 1.0}, Vec{0.0, 0.0});
  const auto rep = check_assumption1(obj, pairs);
  CHECK(rep.ok());
  CHECK(rep.pairs.size() == pairs.size());
}

TEST_CASE("check_assumption1 detects an understated L") {
  const auto obj = make_diagonal_quadratic({1.0, 4.0}).with_constants(1.0, 3.0);
  const std::vector<std::pair<Vec, Vec>> pairs{{Vec{0.0, 1.0}, Vec{0.0, 0.0}}};
  const auto rep = check_assumption1(obj, pairs);
  CHECK(rep.smoothness_violations == 1);
  CHECK(rep.strong_convexity_violations == 0);
  CHECK_FALSE(rep.pairs[0].smoothness_ok);
  // slack = f(y) + <grad f(y), x - y> + (L/2)|x-y|^2 - f(x) = 1.5 - 2
  CHECK(rep.pairs[0].smoothness == doctest::Approx(-0.5));
}

TEST_CASE("check_assumption1 detects an overstated mu") {
  const auto obj = make_diagonal_quadratic({1.0, 4.0}).with_constants(2.0, 4.0);
  const std::vector<std::pair<Vec, Vec>> pairs{{Vec{1.0, 0.0}, Vec{0.0, 0.0}}};
  CHECK(check_assumption1(obj, pairs).strong_convexity_violations == 1);
}

TEST_CASE("check_assumption1 requires samples") {
  const auto obj = make_diagonal_quadratic({1.0, 4.0});
  CHECK_THROWS_AS(check_assumption1(obj, std::vector<std::pair<Vec, Vec>>{}),
                  std::invalid_argument);
}

TEST_CASE("gradients match finite differences") {
  std::mt19937_64 rng(11);
  const auto data = std::make_shared<SparseDataset>(
      testing::random_sparse_dataset(40, 12, 0.4, 5));
  const auto reg_data = std::make_shared<SparseDataset>(
      testing::random_sparse_dataset(40, 12, 0.4, 6, false));
  const std::vector<CompositeObjective> objs{
      make_diagonal_quadratic({1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0}),
      build_logistic({Loss::kLogistic, 1e-2, 0.0, data}),
      build_squared_hinge({Loss::kSquaredHinge, 1e-2, 0.0, data}),
      build_elastic_net({Loss::kLeastSquares, 1e-2, 1e-3, reg_data}),
      build_logistic({Loss::kLogistic, 1e-2, 0.0, data, true}),
      build_squared_hinge({Loss::kSquaredHinge, 1e-2, 0.0, data, true}),
  };
  for (std::size_t i = 0; i < objs.size(); ++i) {
    CAPTURE(i);
    const auto& f = objs[i].f();
    for (int trial = 0; trial < 5; ++trial) {
      const Vec x = testing::random_vec(rng, 12, 0.7);
      Vec g(12);
      f.gradient(x, g);
      const Vec fd = testing::fd_gradient([&](const Vec& z) { return f.value(z); }, x);
      CHECK(testing::relative_error(g, fd) <= 1e-5);
    }
  }
}
