#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tempest/errors.hpp"
#include "tempest/kernels.hpp"
#include "tempest/models/model.hpp"

namespace tempest {

namespace {

// Accumulation order for the normal equations is fixed by sorting rows by
// content, which makes the fit exactly invariant to the input row order:
// permuting rows permutes bitwise-identical summands into the same slots.
std::vector<std::size_t> canonical_order(const Matrix& x, const std::vector<double>& y) {
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double* ra = x.row(a);
    const double* rb = x.row(b);
    for (std::size_t j = 0; j < x.cols; ++j) {
      if (ra[j] != rb[j]) return ra[j] < rb[j];
    }
    return y[a] < y[b];
  });
  return order;
}

// In-place lower Cholesky of a symmetric matrix stored fully. Throws
// SingularSystem when a pivot collapses.
void cholesky(Matrix& a, double lambda) {
  const std::size_t p = a.rows;
  double max_diag = 0.0;
  for (std::size_t j = 0; j < p; ++j) max_diag = std::max(max_diag, a.at(j, j));
  const double floor = std::max(max_diag, 1.0) * 1e-13;

  for (std::size_t j = 0; j < p; ++j) {
    double d = a.at(j, j) - kernels::dot(a.row(j), a.row(j), j);
    if (d <= floor) {
      if (lambda == 0.0)
        throw SingularSystem(
            "X'X is singular with lambda=0; retry with a positive ridge penalty");
      throw SingularSystem("normal equations lost positive definiteness");
    }
    double l = std::sqrt(d);
    a.at(j, j) = l;
    for (std::size_t i = j + 1; i < p; ++i)
      a.at(i, j) = (a.at(i, j) - kernels::dot(a.row(i), a.row(j), j)) / l;
  }
}

}  // namespace

RidgeModel train_ridge(const Matrix& x, const std::vector<double>& y, double lambda) {
  if (lambda < 0.0) throw BadHyperparameter("ridge lambda must be >= 0");
  const std::size_t n = x.rows;
  const std::size_t p = x.cols;
  if (n < 2 || p == 0) throw DegenerateData("ridge needs n >= 2 rows and p >= 1 columns");

  std::vector<std::size_t> order = canonical_order(x, y);

  std::vector<double> x_mean(p, 0.0);
  double y_mean = 0.0;
  for (std::size_t r : order) {
    kernels::axpy(1.0, x.row(r), x_mean.data(), p);
    y_mean += y[r];
  }
  for (double& m : x_mean) m /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  // Centered Gram (lower triangle) and right-hand side.
  Matrix gram(p, p);
  std::vector<double> rhs(p, 0.0);
  std::vector<double> centered(p);
  for (std::size_t r : order) {
    const double* row = x.row(r);
    for (std::size_t j = 0; j < p; ++j) centered[j] = row[j] - x_mean[j];
    double yc = y[r] - y_mean;
    for (std::size_t j = 0; j < p; ++j)
      kernels::axpy(centered[j], centered.data() + j, gram.row(j) + j, p - j);
    kernels::axpy(yc, centered.data(), rhs.data(), p);
  }
  for (std::size_t j = 0; j < p; ++j) {
    gram.at(j, j) += lambda;
    for (std::size_t i = j + 1; i < p; ++i) gram.at(i, j) = gram.at(j, i);
  }

  cholesky(gram, lambda);

  // Forward then back substitution: L L' w = rhs.
  std::vector<double> w(p, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    w[i] = (rhs[i] - kernels::dot(gram.row(i), w.data(), i)) / gram.at(i, i);
  for (std::size_t ii = p; ii-- > 0;) {
    double s = w[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= gram.at(k, ii) * w[k];
    w[ii] = s / gram.at(ii, ii);
  }

  RidgeModel model;
  model.intercept = y_mean - kernels::dot(x_mean.data(), w.data(), p);
  model.weights = std::move(w);
  return model;
}

}  // namespace tempest
