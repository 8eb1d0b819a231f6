#pragma once

#include <cstddef>

// Vector primitives behind the solver and feature inner loops.
//
// Every operation has a scalar reference implementation plus SIMD variants
// (AVX2+FMA on x86-64, NEON on aarch64). The active backend is chosen once at
// startup from CPU capabilities; LAGSYNTH_KERNELS=scalar|avx2|neon|auto
// overrides the choice. The per-backend namespaces stay exported so the
// equivalence tests can compare implementations directly.

namespace lagsynth::kernels {

enum class Backend { scalar, avx2, neon };

Backend active();
const char* backend_name(Backend b);
// Force a backend (throws if unavailable on this CPU). Mainly for tests.
void select(Backend b);

// dot product <a, b>
double dot(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// x *= alpha
void scal(double alpha, double* x, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
// out[i] = sign(v[i]) * max(|v[i]| - thr, 0); thr >= 0
void soft_threshold(const double* v, double thr, double* out, std::size_t n);
// y = A x, A row-major [rows x cols]
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x,
          double* y);
// y = A^T x, A row-major [rows x cols], y has length cols
void gemv_t(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
void soft_threshold(const double* v, double thr, double* out, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x,
          double* y);
void gemv_t(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define LAGSYNTH_HAVE_AVX2_BUILD 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
void soft_threshold(const double* v, double thr, double* out, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x,
          double* y);
void gemv_t(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define LAGSYNTH_HAVE_NEON_BUILD 1
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
void soft_threshold(const double* v, double thr, double* out, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x,
          double* y);
void gemv_t(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
}  // namespace neon
#endif

}  // namespace lagsynth::kernels
