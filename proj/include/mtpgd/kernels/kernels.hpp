// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace mtpgd::kernels {

// Compute kernels used by the inner loops (constitutive batches, separated
// tensor algebra). A scalar reference implementation always exists; wider
// variants are selected at runtime from CPU capabilities, or forced through
// the MTPGD_SIMD environment variable ("scalar", "avx2", "neon", "auto").
//
// Every backend is required to produce bit-identical results to the scalar
// reference: vector lanes evaluate the same operation sequence, reductions
// use the same 4-accumulator tree, and the build disables FP contraction.
// The equivalence suite asserts exact equality.

enum class Backend { scalar, avx2, neon };

const char* backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Throws ArgumentError if the backend is not available on this machine.
void set_backend(Backend b);
// Capability detection + MTPGD_SIMD override; called lazily on first use.
Backend detect_backend();

// Constitutive constants for the J2 plane-strain radial return with linear
// isotropic hardening.
struct PlasticConstants {
  double lame_lambda = 0.0;
  double two_g = 0.0;       // 2G
  double denom = 0.0;       // 3G + H
  double sigma_y0 = 0.0;
  double hardening = 0.0;   // H

  static PlasticConstants from_material(double young, double poisson,
                                        double sigma_y0, double hardening);
};

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*nrm2sq)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  void (*radial_return_batch)(const PlasticConstants&, std::size_t,
                              const double*, const double*, const double*,
                              double*, double*, double*, double*, double*,
                              double*, double*, double*, double*);
};

// Table for an explicit backend (equivalence tests use this directly).
const KernelTable& table(Backend b);

// --- dispatched entry points ------------------------------------------------

double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* a, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);

// Row-major A (rows x cols): y = A x.
void matvec(const double* a, const double* x, double* y, std::size_t rows,
            std::size_t cols);
// y = A^T x.
void matvec_t(const double* a, const double* x, double* y, std::size_t rows,
              std::size_t cols);
// A += alpha * u v^T.
void rank1_update(double* a, double alpha, const double* u, const double* v,
                  std::size_t rows, std::size_t cols);

// One backward-Euler radial-return step for a batch of Gauss points, SoA
// layout. e12/p12/s12 hold tensor shear components (not engineering). The
// plastic state (p11, p22, p33, p12, ebar) is updated in place; the stress
// at the end of the step is written to s11..s12. Inputs are not validated;
// callers check finiteness where the contract requires it.
void radial_return_batch(const PlasticConstants& c, std::size_t n,
                         const double* e11, const double* e22, const double* e12,
                         double* p11, double* p22, double* p33, double* p12,
                         double* ebar, double* s11, double* s22, double* s33,
                         double* s12);

}  // namespace mtpgd::kernels
