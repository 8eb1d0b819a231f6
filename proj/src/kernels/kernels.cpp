// Runtime backend dispatch. The table is populated once (thread-safe via
// static init) from CPU capability checks, with an environment override
// LAGSYNTH_KERNELS=scalar|avx2|neon|auto.

#include "lagsynth/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace lagsynth::kernels {

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  void (*soft_threshold)(const double*, double, double*, std::size_t);
  void (*gemv)(const double*, std::size_t, std::size_t, const double*,
               double*);
  void (*gemv_t)(const double*, std::size_t, std::size_t, const double*,
                 double*);
};

constexpr Vtable kScalar = {
    scalar::dot,  scalar::axpy,           scalar::scal, scalar::sum,
    scalar::sumsq, scalar::soft_threshold, scalar::gemv, scalar::gemv_t,
};

#ifdef LAGSYNTH_HAVE_AVX2_BUILD
constexpr Vtable kAvx2 = {
    avx2::dot,  avx2::axpy,           avx2::scal, avx2::sum,
    avx2::sumsq, avx2::soft_threshold, avx2::gemv, avx2::gemv_t,
};
#endif

#ifdef LAGSYNTH_HAVE_NEON_BUILD
constexpr Vtable kNeon = {
    neon::dot,  neon::axpy,           neon::scal, neon::sum,
    neon::sumsq, neon::soft_threshold, neon::gemv, neon::gemv_t,
};
#endif

bool cpu_has_avx2() {
#ifdef LAGSYNTH_HAVE_AVX2_BUILD
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool cpu_has_neon() {
#ifdef LAGSYNTH_HAVE_NEON_BUILD
  return true;  // NEON is mandatory on aarch64
#else
  return false;
#endif
}

struct State {
  Backend backend;
  const Vtable* vt;
};

State make_state(Backend b) {
  switch (b) {
    case Backend::scalar:
      return {Backend::scalar, &kScalar};
    case Backend::avx2:
#ifdef LAGSYNTH_HAVE_AVX2_BUILD
      if (cpu_has_avx2()) return {Backend::avx2, &kAvx2};
#endif
      throw std::runtime_error("kernels: avx2 backend unavailable on this CPU");
    case Backend::neon:
#ifdef LAGSYNTH_HAVE_NEON_BUILD
      if (cpu_has_neon()) return {Backend::neon, &kNeon};
#endif
      throw std::runtime_error("kernels: neon backend unavailable on this CPU");
  }
  return {Backend::scalar, &kScalar};
}

Backend detect() {
  if (const char* env = std::getenv("LAGSYNTH_KERNELS")) {
    std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2") return Backend::avx2;
    if (v == "neon") return Backend::neon;
    if (!v.empty() && v != "auto")
      throw std::runtime_error("kernels: unknown LAGSYNTH_KERNELS value '" + v +
                               "'");
  }
  if (cpu_has_avx2()) return Backend::avx2;
  if (cpu_has_neon()) return Backend::neon;
  return Backend::scalar;
}

State& state() {
  static State s = make_state(detect());
  return s;
}

}  // namespace

Backend active() { return state().backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

void select(Backend b) { state() = make_state(b); }

double dot(const double* a, const double* b, std::size_t n) {
  return state().vt->dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  state().vt->axpy(alpha, x, y, n);
}
void scal(double alpha, double* x, std::size_t n) {
  state().vt->scal(alpha, x, n);
}
double sum(const double* x, std::size_t n) { return state().vt->sum(x, n); }
double sumsq(const double* x, std::size_t n) {
  return state().vt->sumsq(x, n);
}
void soft_threshold(const double* v, double thr, double* out, std::size_t n) {
  state().vt->soft_threshold(v, thr, out, n);
}
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x,
          double* y) {
  state().vt->gemv(a, rows, cols, x, y);
}
void gemv_t(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y) {
  state().vt->gemv_t(a, rows, cols, x, y);
}

}  // namespace lagsynth::kernels
