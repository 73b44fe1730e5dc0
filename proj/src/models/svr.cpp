#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tempest/errors.hpp"
#include "tempest/kernels.hpp"
#include "tempest/models/model.hpp"

namespace tempest {

namespace {

constexpr double kTau = 1e-12;  // curvature floor for degenerate pairs

// The dual is solved over 2n box variables: index k < n is alpha_k (sign +1),
// k >= n is alpha*_{k-n} (sign -1), constraint sum(sign * lambda) = 0. The
// gradient of the alpha-form objective is kept incrementally; one working
// pair is updated per iteration.
struct Smo {
  const Matrix& x;
  const std::vector<double>& y;
  double c;
  double eps;
  double gamma;
  std::size_t n;

  std::vector<double> lambda;  // 2n
  std::vector<double> grad;    // 2n
  std::vector<std::vector<double>> cache;  // lazy kernel rows

  Smo(const Matrix& x_, const std::vector<double>& y_, double c_, double eps_, double gamma_)
      : x(x_), y(y_), c(c_), eps(eps_), gamma(gamma_), n(x_.rows) {
    lambda.assign(2 * n, 0.0);
    grad.resize(2 * n);
    for (std::size_t k = 0; k < n; ++k) grad[k] = eps - y[k];
    for (std::size_t k = 0; k < n; ++k) grad[n + k] = eps + y[k];
    cache.resize(n);
  }

  double sign(std::size_t k) const { return k < n ? 1.0 : -1.0; }

  const std::vector<double>& kernel_row(std::size_t i) {
    auto& row = cache[i];
    if (row.empty()) {
      row.resize(n);
      const double* xi = x.row(i);
      for (std::size_t j = 0; j < n; ++j)
        row[j] = std::exp(-gamma * kernels::squared_distance(xi, x.row(j), x.cols));
    }
    return row;
  }

  bool in_up(std::size_t k) const { return k < n ? lambda[k] < c : lambda[k] > 0.0; }
  bool in_low(std::size_t k) const { return k < n ? lambda[k] > 0.0 : lambda[k] < c; }
  double value(std::size_t k) const { return -sign(k) * grad[k]; }
};

}  // namespace

SvrModel train_svr(const Matrix& x, const std::vector<double>& y, SvrParams params) {
  const std::size_t n = x.rows;
  const std::size_t p = x.cols;
  if (n < 2 || p == 0) throw DegenerateData("svr needs n >= 2 rows and p >= 1 columns");
  if (params.c <= 0.0) throw BadHyperparameter("svr C must be > 0");
  if (params.epsilon < 0.0) throw BadHyperparameter("svr epsilon must be >= 0");
  if (params.gamma == 0.0) params.gamma = 1.0 / static_cast<double>(p);
  if (params.gamma <= 0.0) throw BadHyperparameter("svr gamma must be > 0");
  if (params.tol <= 0.0) throw BadHyperparameter("svr tol must be > 0");

  Smo smo(x, y, params.c, params.epsilon, params.gamma);
  std::vector<double> diff(n);

  bool converged = false;
  std::uint64_t iter = 0;
  for (; iter < params.max_iter; ++iter) {
    // Maximal KKT violator over the "up" set.
    double m_up = -std::numeric_limits<double>::infinity();
    std::size_t i = 2 * n;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      if (smo.in_up(k) && smo.value(k) > m_up) {
        m_up = smo.value(k);
        i = k;
      }
    }
    double m_low = std::numeric_limits<double>::infinity();
    std::size_t j_first = 2 * n;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      if (smo.in_low(k) && smo.value(k) < m_low) {
        m_low = smo.value(k);
        j_first = k;
      }
    }
    if (i == 2 * n || j_first == 2 * n || m_up - m_low < params.tol) {
      converged = true;
      break;
    }

    // Partner maximizing the guaranteed objective decrease; the plain
    // minimal-value scan is the fallback.
    const std::size_t bi = i % n;
    const auto& ki = smo.kernel_row(bi);
    std::size_t j = 2 * n;
    double best_gain = 0.0;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      if (!smo.in_low(k)) continue;
      double v = smo.value(k);
      if (v >= m_up) continue;
      double q = std::max(2.0 * (1.0 - ki[k % n]), kTau);
      double d = m_up - v;
      double gain = d * d / q;
      if (gain > best_gain) {
        best_gain = gain;
        j = k;
      }
    }
    if (j == 2 * n) j = j_first;

    const std::size_t bj = j % n;
    const auto& kj = smo.kernel_row(bj);
    const double si = smo.sign(i);
    const double sj = smo.sign(j);

    double q = std::max(2.0 * (1.0 - ki[bj]), kTau);
    double g = si * smo.grad[i] - sj * smo.grad[j];  // negative along the descent direction
    double delta = -g / q;
    double bound_i = si > 0.0 ? params.c - smo.lambda[i] : smo.lambda[i];
    double bound_j = sj > 0.0 ? smo.lambda[j] : params.c - smo.lambda[j];
    delta = std::min(delta, std::min(bound_i, bound_j));
    if (delta <= 0.0) {
      converged = m_up - m_low < params.tol;
      break;
    }

    smo.lambda[i] = std::clamp(smo.lambda[i] + si * delta, 0.0, params.c);
    smo.lambda[j] = std::clamp(smo.lambda[j] - sj * delta, 0.0, params.c);

    for (std::size_t m = 0; m < n; ++m) diff[m] = ki[m] - kj[m];
    kernels::axpy(delta, diff.data(), smo.grad.data(), n);
    kernels::axpy(-delta, diff.data(), smo.grad.data() + n, n);
  }

  // Bias from the free variables, else the midpoint of the KKT interval.
  double m_up = -std::numeric_limits<double>::infinity();
  double m_low = std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t k = 0; k < 2 * n; ++k) {
    if (smo.in_up(k)) m_up = std::max(m_up, smo.value(k));
    if (smo.in_low(k)) m_low = std::min(m_low, smo.value(k));
    if (smo.lambda[k] > kTau && smo.lambda[k] < params.c - kTau) {
      free_sum += smo.value(k);
      ++free_count;
    }
  }
  double bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                               : 0.5 * (m_up + m_low);

  SvrModel model;
  model.gamma = params.gamma;
  model.bias = bias;
  model.converged = converged;
  model.iterations = iter;

  double objective = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    objective += smo.lambda[k] * (smo.grad[k] + params.epsilon - y[k]);
  for (std::size_t k = 0; k < n; ++k)
    objective += smo.lambda[n + k] * (smo.grad[n + k] + params.epsilon + y[k]);
  model.dual_objective = 0.5 * objective;

  std::vector<std::size_t> sv;
  for (std::size_t k = 0; k < n; ++k) {
    double beta = smo.lambda[k] - smo.lambda[n + k];
    model.beta_sum += beta;
    if (beta != 0.0) sv.push_back(k);
  }
  model.support_vectors = Matrix(sv.size(), p);
  model.coefficients.resize(sv.size());
  for (std::size_t r = 0; r < sv.size(); ++r) {
    const double* src = x.row(sv[r]);
    std::copy(src, src + p, model.support_vectors.row(r));
    model.coefficients[r] = smo.lambda[sv[r]] - smo.lambda[n + sv[r]];
  }
  return model;
}

}  // namespace tempest
