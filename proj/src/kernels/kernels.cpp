// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/kernels/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "mtpgd/common.hpp"
#include "radial_return_point.hpp"

namespace mtpgd::kernels {

// ---------------------------------------------------------------------------
// Scalar reference kernels.
//
// Reductions run four interleaved accumulators and fold them as
// (acc0 + acc2) + (acc1 + acc3), matching the lane layout and reduction tree
// of the 4-wide vector variants so that all backends agree bit for bit.
// ---------------------------------------------------------------------------

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 += a[i] * b[i];
    acc1 += a[i + 1] * b[i + 1];
    acc2 += a[i + 2] * b[i + 2];
    acc3 += a[i + 3] * b[i + 3];
  }
  double s = (acc0 + acc2) + (acc1 + acc3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double nrm2sq_scalar(const double* a, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 += a[i] * a[i];
    acc1 += a[i + 1] * a[i + 1];
    acc2 += a[i + 2] * a[i + 2];
    acc3 += a[i + 3] * a[i + 3];
  }
  double s = (acc0 + acc2) + (acc1 + acc3);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void radial_return_scalar(const PlasticConstants& c, std::size_t n,
                          const double* e11, const double* e22,
                          const double* e12, double* p11, double* p22,
                          double* p33, double* p12, double* ebar, double* s11,
                          double* s22, double* s33, double* s12) {
  for (std::size_t i = 0; i < n; ++i)
    detail::radial_return_point(c, i, e11, e22, e12, p11, p22, p33, p12, ebar,
                                s11, s22, s33, s12);
}

constexpr KernelTable kScalarTable{dot_scalar, nrm2sq_scalar, axpy_scalar,
                                   scal_scalar, radial_return_scalar};

}  // namespace

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable* avx2_table_or_null();  // defined in kernels_avx2.cpp
bool avx2_supported();
#endif
#if defined(__aarch64__)
const KernelTable* neon_table_or_null();  // defined in kernels_neon.cpp
#endif

namespace {

const KernelTable* table_or_null(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalarTable;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return avx2_supported() ? avx2_table_or_null() : nullptr;
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return neon_table_or_null();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

struct Dispatch {
  Backend backend;
  const KernelTable* kt;
};

Dispatch make_dispatch() {
  Backend b = detect_backend();
  return {b, table_or_null(b)};
}

Dispatch& dispatch() {
  static Dispatch d = make_dispatch();
  return d;
}

}  // namespace

PlasticConstants PlasticConstants::from_material(double young, double poisson,
                                                 double sigma_y0,
                                                 double hardening) {
  PlasticConstants c;
  const double g = young / (2.0 * (1.0 + poisson));
  c.lame_lambda =
      young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  c.two_g = 2.0 * g;
  c.denom = 3.0 * g + hardening;
  c.sigma_y0 = sigma_y0;
  c.hardening = hardening;
  return c;
}

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

bool backend_available(Backend b) { return table_or_null(b) != nullptr; }

Backend detect_backend() {
  if (const char* env = std::getenv("MTPGD_SIMD")) {
    const std::string s(env);
    if (s == "scalar") return Backend::scalar;
    if (s == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
    if (s == "neon" && backend_available(Backend::neon)) return Backend::neon;
    // "auto" or an unusable request falls through to detection
  }
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

Backend active_backend() { return dispatch().backend; }

void set_backend(Backend b) {
  const KernelTable* kt = table_or_null(b);
  if (!kt)
    throw ArgumentError(std::string("kernel backend not available: ") +
                        backend_name(b));
  dispatch() = {b, kt};
}

const KernelTable& table(Backend b) {
  const KernelTable* kt = table_or_null(b);
  if (!kt)
    throw ArgumentError(std::string("kernel backend not available: ") +
                        backend_name(b));
  return *kt;
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().kt->dot(a, b, n);
}

double nrm2sq(const double* a, std::size_t n) {
  return dispatch().kt->nrm2sq(a, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().kt->axpy(alpha, x, y, n);
}

void scal(double alpha, double* x, std::size_t n) {
  dispatch().kt->scal(alpha, x, n);
}

void matvec(const double* a, const double* x, double* y, std::size_t rows,
            std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

void matvec_t(const double* a, const double* x, double* y, std::size_t rows,
              std::size_t cols) {
  std::memset(y, 0, cols * sizeof(double));
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], a + r * cols, y, cols);
}

void rank1_update(double* a, double alpha, const double* u, const double* v,
                  std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(alpha * u[r], v, a + r * cols, cols);
}

void radial_return_batch(const PlasticConstants& c, std::size_t n,
                         const double* e11, const double* e22,
                         const double* e12, double* p11, double* p22,
                         double* p33, double* p12, double* ebar, double* s11,
                         double* s22, double* s33, double* s12) {
  dispatch().kt->radial_return_batch(c, n, e11, e22, e12, p11, p22, p33, p12,
                                     ebar, s11, s22, s33, s12);
}

}  // namespace mtpgd::kernels
