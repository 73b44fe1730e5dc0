#pragma once

#include <cstddef>
#include <string_view>

// Dense double-precision kernels behind the regressors' inner loops.
// Each kernel has a scalar reference implementation and, on x86-64 with
// AVX2/FMA (or aarch64 with NEON), a vector variant. The dispatched entry
// points pick the widest supported backend once at startup; the environment
// variable TEMPEST_KERNELS=scalar|avx2|neon overrides the choice (requests
// for an unsupported backend fall back to scalar).
//
// Vector variants use a fixed lane/accumulator structure, so a given backend
// is bit-deterministic run to run. Backends may differ from each other in
// the last bits because float addition is not associative; the equivalence
// tests bound that difference.

namespace tempest::kernels {

enum class Backend { Scalar, Avx2, Neon };

Backend active_backend();
std::string_view backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_squared_diff(const double* x, std::size_t n, double center);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_squared_diff(const double* x, std::size_t n, double center);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
bool supported();
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_squared_diff(const double* x, std::size_t n, double center);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
bool supported();
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_squared_diff(const double* x, std::size_t n, double center);
}  // namespace neon
#endif

}  // namespace tempest::kernels
