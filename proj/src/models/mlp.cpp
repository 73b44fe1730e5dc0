#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "tempest/errors.hpp"
#include "tempest/kernels.hpp"
#include "tempest/models/model.hpp"
#include "tempest/rng.hpp"

namespace tempest {

namespace {

// Parameter layout offsets within MlpModel::params.
struct Layout {
  std::size_t w1, b1, w2, b2, w3, b3, total;

  Layout(std::size_t p, std::size_t h1, std::size_t h2) {
    w1 = 0;
    b1 = w1 + h1 * p;
    w2 = b1 + h1;
    b2 = w2 + h2 * h1;
    w3 = b2 + h2;
    b3 = w3 + h2;
    total = b3 + 1;
  }
};

struct Workspace {
  std::vector<double> z1, a1, z2, a2;   // per-sample activations
  std::vector<double> dz1, dz2, da1, da2;

  explicit Workspace(std::size_t h1, std::size_t h2)
      : z1(h1), a1(h1), z2(h2), a2(h2), dz1(h1), dz2(h2), da1(h1), da2(h2) {}
};

double forward(const MlpModel& m, const Layout& lay, const double* x, Workspace& ws) {
  const double* params = m.params.data();
  for (std::size_t j = 0; j < m.hidden1; ++j) {
    double z = kernels::dot(params + lay.w1 + j * m.input, x, m.input) + params[lay.b1 + j];
    ws.z1[j] = z;
    ws.a1[j] = z > 0.0 ? z : 0.0;
  }
  for (std::size_t j = 0; j < m.hidden2; ++j) {
    double z =
        kernels::dot(params + lay.w2 + j * m.hidden1, ws.a1.data(), m.hidden1) + params[lay.b2 + j];
    ws.z2[j] = z;
    ws.a2[j] = z > 0.0 ? z : 0.0;
  }
  return kernels::dot(params + lay.w3, ws.a2.data(), m.hidden2) + params[lay.b3];
}

// Accumulates the gradient of mean((out - y)^2) over the given sample set.
double loss_and_gradient(const MlpModel& m, const Layout& lay, const Matrix& x,
                         const std::vector<double>& y, const std::uint32_t* idx, std::size_t count,
                         Workspace& ws, double* grad) {
  const double* params = m.params.data();
  const double inv = 1.0 / static_cast<double>(count);
  double loss = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t r = idx ? idx[s] : s;
    const double* xr = x.row(r);
    double out = forward(m, lay, xr, ws);
    double err = out - y[r];
    loss += err * err * inv;
    if (!grad) continue;

    double dout = 2.0 * err * inv;
    grad[lay.b3] += dout;
    kernels::axpy(dout, ws.a2.data(), grad + lay.w3, m.hidden2);

    std::fill(ws.da2.begin(), ws.da2.end(), 0.0);
    kernels::axpy(dout, params + lay.w3, ws.da2.data(), m.hidden2);
    for (std::size_t j = 0; j < m.hidden2; ++j)
      ws.dz2[j] = ws.z2[j] > 0.0 ? ws.da2[j] : 0.0;

    std::fill(ws.da1.begin(), ws.da1.end(), 0.0);
    for (std::size_t j = 0; j < m.hidden2; ++j) {
      double d = ws.dz2[j];
      if (d == 0.0) continue;
      grad[lay.b2 + j] += d;
      kernels::axpy(d, ws.a1.data(), grad + lay.w2 + j * m.hidden1, m.hidden1);
      kernels::axpy(d, params + lay.w2 + j * m.hidden1, ws.da1.data(), m.hidden1);
    }
    for (std::size_t j = 0; j < m.hidden1; ++j)
      ws.dz1[j] = ws.z1[j] > 0.0 ? ws.da1[j] : 0.0;
    for (std::size_t j = 0; j < m.hidden1; ++j) {
      double d = ws.dz1[j];
      if (d == 0.0) continue;
      grad[lay.b1 + j] += d;
      kernels::axpy(d, xr, grad + lay.w1 + j * m.input, m.input);
    }
  }
  return loss;
}

void he_uniform_fill(double* w, std::size_t count, std::size_t fan_in, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < count; ++i) w[i] = rng.uniform(-limit, limit);
}

}  // namespace

MlpModel init_mlp(std::size_t input, const MlpParams& params, std::uint64_t seed) {
  if (input == 0) throw DegenerateData("mlp needs p >= 1 columns");
  if (params.hidden1 == 0 || params.hidden2 == 0)
    throw BadHyperparameter("mlp hidden layer sizes must be >= 1");
  MlpModel m;
  m.input = input;
  m.hidden1 = params.hidden1;
  m.hidden2 = params.hidden2;
  Layout lay(input, m.hidden1, m.hidden2);
  m.params.assign(lay.total, 0.0);

  Rng r1 = Rng::stream(seed, "mlp-layer", 0);
  Rng r2 = Rng::stream(seed, "mlp-layer", 1);
  Rng r3 = Rng::stream(seed, "mlp-layer", 2);
  he_uniform_fill(m.params.data() + lay.w1, m.hidden1 * input, input, r1);
  he_uniform_fill(m.params.data() + lay.w2, m.hidden2 * m.hidden1, m.hidden1, r2);
  he_uniform_fill(m.params.data() + lay.w3, m.hidden2, m.hidden2, r3);
  // Small nonzero biases keep pre-activations off the exact ReLU kink even
  // for samples whose previous layer is fully dead.
  Rng rb = Rng::stream(seed, "mlp-bias", 0);
  for (std::size_t j = 0; j < m.hidden1; ++j)
    m.params[lay.b1 + j] = rb.uniform(-0.05, 0.05);
  for (std::size_t j = 0; j < m.hidden2; ++j)
    m.params[lay.b2 + j] = rb.uniform(-0.05, 0.05);
  return m;
}

double mlp_batch_loss(const MlpModel& model, const Matrix& x, const std::vector<double>& y) {
  Layout lay(model.input, model.hidden1, model.hidden2);
  Workspace ws(model.hidden1, model.hidden2);
  return loss_and_gradient(model, lay, x, y, nullptr, x.rows, ws, nullptr);
}

std::vector<double> mlp_batch_gradient(const MlpModel& model, const Matrix& x,
                                       const std::vector<double>& y) {
  Layout lay(model.input, model.hidden1, model.hidden2);
  Workspace ws(model.hidden1, model.hidden2);
  std::vector<double> grad(lay.total, 0.0);
  loss_and_gradient(model, lay, x, y, nullptr, x.rows, ws, grad.data());
  return grad;
}

std::vector<double> mlp_predict(const MlpModel& model, const Matrix& x) {
  Layout lay(model.input, model.hidden1, model.hidden2);
  Workspace ws(model.hidden1, model.hidden2);
  std::vector<double> out(x.rows, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = forward(model, lay, x.row(i), ws);
  return out;
}

MlpModel train_mlp(const Matrix& x, const std::vector<double>& y, const MlpParams& params,
                   std::uint64_t seed) {
  const std::size_t n = x.rows;
  if (n < 2 || x.cols == 0) throw DegenerateData("mlp needs n >= 2 rows and p >= 1 columns");
  if (params.batch == 0) throw BadHyperparameter("mlp batch size must be >= 1");
  if (params.learning_rate <= 0.0) throw BadHyperparameter("mlp learning rate must be > 0");

  // The net expects standardized inputs; flag suspicious continuous columns
  // (anything not 0/1-valued) whose mean is far from zero.
  for (std::size_t j = 0; j < x.cols; ++j) {
    bool indicator_like = true;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = x.at(i, j);
      mean += v;
      if (v != 0.0 && v != 1.0) indicator_like = false;
    }
    mean /= static_cast<double>(n);
    if (!indicator_like && std::abs(mean) > 0.5) {
      std::fprintf(stderr,
                   "tempest: warning: mlp input column %zu has |mean| %.3f > 0.5; "
                   "training expects scaled data\n",
                   j, mean);
      break;
    }
  }

  MlpModel m = init_mlp(x.cols, params, seed);
  Layout lay(m.input, m.hidden1, m.hidden2);
  Workspace ws(m.hidden1, m.hidden2);

  std::vector<double> grad(lay.total);
  std::vector<double> adam_m(lay.total, 0.0);
  std::vector<double> adam_v(lay.total, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double beta1_t = 1.0, beta2_t = 1.0;

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    Rng shuffle_rng = Rng::stream(seed, "mlp-shuffle", epoch);
    shuffle_rng.shuffle(order.begin(), order.end());

    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += params.batch) {
      std::size_t count = std::min(params.batch, n - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss =
          loss_and_gradient(m, lay, x, y, order.data() + start, count, ws, grad.data());
      epoch_loss += loss;
      ++batches;
      if (!std::isfinite(loss))
        throw Divergence("mlp loss became non-finite at epoch " + std::to_string(epoch) +
                         " after " + std::to_string(m.loss_history.size()) +
                         " recorded epochs");

      beta1_t *= beta1;
      beta2_t *= beta2;
      for (std::size_t i = 0; i < lay.total; ++i) {
        adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * grad[i];
        adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * grad[i] * grad[i];
        double mhat = adam_m[i] / (1.0 - beta1_t);
        double vhat = adam_v[i] / (1.0 - beta2_t);
        m.params[i] -= params.learning_rate * mhat / (std::sqrt(vhat) + adam_eps);
      }
    }
    m.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }
  return m;
}

}  // namespace tempest
