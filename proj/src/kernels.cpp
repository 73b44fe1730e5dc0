#include "tempest/kernels.hpp"

#include <cstdlib>
#include <string>

namespace tempest::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double sum_squared_diff(const double* x, std::size_t n, double center) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = x[i] - center;
    s += d * d;
  }
  return s;
}

}  // namespace scalar

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sum_squared_diff)(const double*, std::size_t, double);
  Backend backend;
};

constexpr KernelTable kScalarTable{scalar::dot,
                                   scalar::squared_distance,
                                   scalar::axpy,
                                   scalar::sum,
                                   scalar::sum_squared_diff,
                                   Backend::Scalar};

KernelTable select_table() {
  const char* env = std::getenv("TEMPEST_KERNELS");
  std::string want = env ? env : "";
  if (want == "scalar") return kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
  if ((want.empty() || want == "avx2") && avx2::supported())
    return {avx2::dot,
            avx2::squared_distance,
            avx2::axpy,
            avx2::sum,
            avx2::sum_squared_diff,
            Backend::Avx2};
#endif
#if defined(__aarch64__)
  if ((want.empty() || want == "neon") && neon::supported())
    return {neon::dot,
            neon::squared_distance,
            neon::axpy,
            neon::sum,
            neon::sum_squared_diff,
            Backend::Neon};
#endif
  return kScalarTable;
}

const KernelTable& table() {
  static const KernelTable t = select_table();
  return t;
}

}  // namespace

Backend active_backend() { return table().backend; }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
    default:
      return "scalar";
  }
}

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }

double squared_distance(const double* a, const double* b, std::size_t n) {
  return table().squared_distance(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  table().axpy(alpha, x, y, n);
}

double sum(const double* x, std::size_t n) { return table().sum(x, n); }

double sum_squared_diff(const double* x, std::size_t n, double center) {
  return table().sum_squared_diff(x, n, center);
}

}  // namespace tempest::kernels
