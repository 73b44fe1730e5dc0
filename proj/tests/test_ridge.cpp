#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/util.hpp"
#include "tempest/errors.hpp"
#include "tempest/kernels.hpp"
#include "tempest/models/model.hpp"
#include "tempest/rng.hpp"

using namespace tempest;

namespace {

Matrix random_matrix(std::size_t n, std::size_t p, Rng& rng, double lo = -3.0, double hi = 3.0) {
  Matrix x(n, p);
  for (auto& v : x.data) v = rng.uniform(lo, hi);
  return x;
}

double ridge_objective(const Matrix& x, const std::vector<double>& y,
                       const std::vector<double>& w, double b, double lambda) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    double r = y[i] - kernels::dot(x.row(i), w.data(), x.cols) - b;
    sse += r * r;
  }
  return sse + lambda * kernels::dot(w.data(), w.data(), w.size());
}

EncodedDataset as_dataset(Matrix x, std::vector<double> y) {
  EncodedDataset d;
  d.x = std::move(x);
  d.y = std::move(y);
  d.schema_hash = 1;
  return d;
}

}  // namespace

TEST_CASE("exact linear fit with zero penalty") {
  Matrix x(2, 1);
  x.at(0, 0) = 1.0;
  x.at(1, 0) = 2.0;
  auto m = train_ridge(x, {2.0, 4.0}, 0.0);
  CHECK(m.weights[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.intercept == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("1-d normal equation by hand") {
  // Mirrored points make the means zero, so centering is the identity and
  // the fit solves X'y / (X'X + lambda) directly. Doubling the data doubles
  // X'X and X'y, so lambda 2 here equals the single-pair case with lambda 1:
  // w = 10/6.
  Matrix x(4, 1);
  x.at(0, 0) = 1.0;
  x.at(1, 0) = 2.0;
  x.at(2, 0) = -1.0;
  x.at(3, 0) = -2.0;
  auto m = train_ridge(x, {2.0, 4.0, -2.0, -4.0}, 2.0);
  CHECK(m.weights[0] == doctest::Approx(10.0 / 6.0).epsilon(1e-12));
  CHECK(m.weights[0] == doctest::Approx(1.6667).epsilon(1e-4));
  CHECK(m.intercept == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("infinite shrinkage collapses to the mean") {
  Rng rng = Rng::stream(2, "ridge", 0);
  Matrix x = random_matrix(40, 5, rng);
  std::vector<double> y(40);
  for (auto& v : y) v = rng.uniform(-10.0, 10.0);
  auto m = train_ridge(x, y, 1e12);
  double norm = std::sqrt(kernels::dot(m.weights.data(), m.weights.data(), m.weights.size()));
  CHECK(norm < 1e-6);
  double mean = kernels::sum(y.data(), y.size()) / static_cast<double>(y.size());
  CHECK(m.intercept == doctest::Approx(mean).epsilon(1e-6));
}

TEST_CASE("singular system reported only at lambda zero") {
  // duplicate column -> X'X singular
  Rng rng = Rng::stream(3, "ridge", 0);
  Matrix x(20, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    x.at(i, 0) = rng.uniform(-1.0, 1.0);
    x.at(i, 1) = x.at(i, 0);
  }
  std::vector<double> y(20);
  for (auto& v : y) v = rng.uniform(-1.0, 1.0);
  CHECK_THROWS_AS(train_ridge(x, y, 0.0), SingularSystem);
  CHECK_NOTHROW(train_ridge(x, y, 1.0));
}

TEST_CASE("planted weights recovered exactly at lambda zero") {
  Rng rng = Rng::stream(4, "ridge", 0);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t n = 30 + rng.below(30);
    std::size_t p = 2 + rng.below(6);
    Matrix x = random_matrix(n, p, rng);
    std::vector<double> planted(p);
    for (auto& v : planted) v = rng.uniform(-4.0, 4.0);
    double b = rng.uniform(-10.0, 10.0);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = kernels::dot(x.row(i), planted.data(), p) + b;

    auto m = train_ridge(x, y, 0.0);
    for (std::size_t j = 0; j < p; ++j)
      CHECK(m.weights[j] == doctest::Approx(planted[j]).epsilon(1e-8));
    CHECK(m.intercept == doctest::Approx(b).epsilon(1e-8));
  }
}

TEST_CASE("closed form beats random perturbations") {
  Rng rng = Rng::stream(5, "ridge", 0);
  for (int rep = 0; rep < 25; ++rep) {
    std::size_t n = 20 + rng.below(20);
    std::size_t p = 2 + rng.below(5);
    Matrix x = random_matrix(n, p, rng);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform(-5.0, 5.0);
    double lambda = rng.uniform(0.0, 2.0);
    auto m = train_ridge(x, y, lambda);
    double best = ridge_objective(x, y, m.weights, m.intercept, lambda);
    for (int d = 0; d < 20; ++d) {
      std::vector<double> wp = m.weights;
      double bp = m.intercept;
      std::vector<double> dir(p + 1);
      double norm = 0.0;
      for (auto& v : dir) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (std::size_t j = 0; j < p; ++j) wp[j] += 1e-3 * dir[j] / norm;
      bp += 1e-3 * dir[p] / norm;
      CHECK(ridge_objective(x, y, wp, bp, lambda) >= best);
    }
  }
}

TEST_CASE("ridge fit is exactly row-order invariant") {
  Rng rng = Rng::stream(6, "ridge", 0);
  Matrix x = random_matrix(60, 7, rng);
  std::vector<double> y(60);
  for (auto& v : y) v = rng.uniform(-5.0, 5.0);
  Matrix probe = random_matrix(10, 7, rng);

  auto m1 = train_ridge(x, y, 0.7);

  std::vector<std::size_t> perm(60);
  for (std::size_t i = 0; i < 60; ++i) perm[i] = i;
  rng.shuffle(perm.begin(), perm.end());
  Matrix xs(60, 7);
  std::vector<double> ys(60);
  for (std::size_t i = 0; i < 60; ++i) {
    std::copy(x.row(perm[i]), x.row(perm[i]) + 7, xs.row(i));
    ys[i] = y[perm[i]];
  }
  auto m2 = train_ridge(xs, ys, 0.7);

  REQUIRE(m1.weights.size() == m2.weights.size());
  for (std::size_t j = 0; j < m1.weights.size(); ++j) CHECK(m1.weights[j] == m2.weights[j]);
  CHECK(m1.intercept == m2.intercept);
}

TEST_CASE("constant target is recovered exactly") {
  Rng rng = Rng::stream(7, "ridge", 0);
  Matrix x = random_matrix(25, 4, rng);
  std::vector<double> y(25, 42.5);
  auto m = train_ridge(x, y, 1.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double pred = kernels::dot(m.weights.data(), x.row(i), x.cols) + m.intercept;
    CHECK(pred == doctest::Approx(42.5).epsilon(1e-9));
  }
}

TEST_CASE("train dispatch: validation, determinism, serialization") {
  Rng rng = Rng::stream(8, "ridge", 0);
  auto data = as_dataset(random_matrix(30, 4, rng), std::vector<double>(30, 0.0));
  for (auto& v : data.y) v = rng.uniform(-5.0, 5.0);

  ModelConfig config;
  config.variant = ModelVariant::Ridge;
  config.seed = 11;

  ModelConfig bad = config;
  bad.params["weight_decay"] = 1.0;
  CHECK_THROWS_AS(train(bad, data), BadHyperparameter);

  ModelConfig negative = config;
  negative.params["lambda"] = -1.0;
  CHECK_THROWS_AS(train(negative, data), BadHyperparameter);

  auto m1 = train(config, data);
  auto m2 = train(config, data);
  CHECK(m1.config.params.at("lambda") == 1.0);  // default recorded

  Matrix probe = random_matrix(5, 4, rng);
  CHECK(m1.predict(probe) == m2.predict(probe));

  Matrix wrong(2, 3);
  CHECK_THROWS_AS(m1.predict(wrong), WidthMismatch);
  Matrix empty(0, 4);
  CHECK(m1.predict(empty).empty());

  tempest::testing::TempDir dir("ridge-model");
  m1.save(dir.path() / "model.json");
  auto loaded = TrainedModel::load(dir.path() / "model.json");
  CHECK(loaded.schema_hash == m1.schema_hash);
  CHECK(loaded.predict(probe) == m1.predict(probe));

  Matrix one_row(1, 4);
  EncodedDataset tiny = as_dataset(one_row, {1.0});
  CHECK_THROWS_AS(train(config, tiny), DegenerateData);
}
