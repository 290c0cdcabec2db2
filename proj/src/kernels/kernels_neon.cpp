// SPDX-License-Identifier: Apache-2.0
//
// NEON kernel backend (aarch64, where Advanced SIMD is mandatory). Same
// contract as the AVX2 backend: correctly rounded ops only (vmul+vadd, never
// the fused vmla/vfma), and reductions reproduce the scalar 4-accumulator
// tree by running two 2-lane accumulators side by side.
#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

#include "mtpgd/kernels/kernels.hpp"
#include "radial_return_point.hpp"

namespace mtpgd::kernels {

namespace {

inline double reduce4(float64x2_t acc_a, float64x2_t acc_b) {
  // acc_a = [acc0 acc1], acc_b = [acc2 acc3]
  const float64x2_t pair = vaddq_f64(acc_a, acc_b);  // [acc0+acc2, acc1+acc3]
  return vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc_a = vdupq_n_f64(0.0);
  float64x2_t acc_b = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc_a = vaddq_f64(acc_a, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc_b = vaddq_f64(acc_b,
                      vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double s = reduce4(acc_a, acc_b);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double nrm2sq_neon(const double* a, std::size_t n) {
  float64x2_t acc_a = vdupq_n_f64(0.0);
  float64x2_t acc_b = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t va = vld1q_f64(a + i);
    const float64x2_t vb = vld1q_f64(a + i + 2);
    acc_a = vaddq_f64(acc_a, vmulq_f64(va, va));
    acc_b = vaddq_f64(acc_b, vmulq_f64(vb, vb));
  }
  double s = reduce4(acc_a, acc_b);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vy = vld1q_f64(y + i);
    const float64x2_t vx = vld1q_f64(x + i);
    vst1q_f64(y + i, vaddq_f64(vy, vmulq_f64(va, vx)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_neon(double alpha, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void radial_return_neon(const PlasticConstants& c, std::size_t n,
                        const double* e11, const double* e22,
                        const double* e12, double* p11, double* p22,
                        double* p33, double* p12, double* ebar, double* s11,
                        double* s22, double* s33, double* s12) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t third = vdupq_n_f64(detail::kThird);
  const float64x2_t two = vdupq_n_f64(2.0);
  const float64x2_t onep5 = vdupq_n_f64(1.5);
  const float64x2_t lam = vdupq_n_f64(c.lame_lambda);
  const float64x2_t twog = vdupq_n_f64(c.two_g);
  const float64x2_t sy0 = vdupq_n_f64(c.sigma_y0);
  const float64x2_t hard = vdupq_n_f64(c.hardening);
  const float64x2_t denom = vdupq_n_f64(c.denom);

  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vp11 = vld1q_f64(p11 + i);
    const float64x2_t vp22 = vld1q_f64(p22 + i);
    const float64x2_t vp33 = vld1q_f64(p33 + i);
    const float64x2_t vp12 = vld1q_f64(p12 + i);
    const float64x2_t ve = vld1q_f64(ebar + i);

    const float64x2_t ee11 = vsubq_f64(vld1q_f64(e11 + i), vp11);
    const float64x2_t ee22 = vsubq_f64(vld1q_f64(e22 + i), vp22);
    const float64x2_t ee33 = vsubq_f64(zero, vp33);
    const float64x2_t ee12 = vsubq_f64(vld1q_f64(e12 + i), vp12);

    const float64x2_t tr = vaddq_f64(vaddq_f64(ee11, ee22), ee33);
    const float64x2_t lt = vmulq_f64(lam, tr);
    const float64x2_t t11 = vaddq_f64(lt, vmulq_f64(twog, ee11));
    const float64x2_t t22 = vaddq_f64(lt, vmulq_f64(twog, ee22));
    const float64x2_t t33 = vaddq_f64(lt, vmulq_f64(twog, ee33));
    const float64x2_t t12 = vmulq_f64(twog, ee12);

    const float64x2_t mean =
        vmulq_f64(vaddq_f64(vaddq_f64(t11, t22), t33), third);
    const float64x2_t d11 = vsubq_f64(t11, mean);
    const float64x2_t d22 = vsubq_f64(t22, mean);
    const float64x2_t d33 = vsubq_f64(t33, mean);
    const float64x2_t d12 = t12;

    const float64x2_t j2 = vaddq_f64(
        vaddq_f64(vaddq_f64(vmulq_f64(d11, d11), vmulq_f64(d22, d22)),
                  vmulq_f64(d33, d33)),
        vmulq_f64(vmulq_f64(d12, d12), two));
    const float64x2_t q = vsqrtq_f64(vmulq_f64(j2, onep5));
    const float64x2_t f = vsubq_f64(q, vaddq_f64(sy0, vmulq_f64(hard, ve)));

    const uint64x2_t mask = vcgtq_f64(f, zero);
    const float64x2_t dg = vdivq_f64(f, denom);
    const float64x2_t coef = vdivq_f64(vmulq_f64(dg, onep5), q);

    vst1q_f64(p11 + i,
              vbslq_f64(mask, vaddq_f64(vp11, vmulq_f64(coef, d11)), vp11));
    vst1q_f64(p22 + i,
              vbslq_f64(mask, vaddq_f64(vp22, vmulq_f64(coef, d22)), vp22));
    vst1q_f64(p33 + i,
              vbslq_f64(mask, vaddq_f64(vp33, vmulq_f64(coef, d33)), vp33));
    vst1q_f64(p12 + i,
              vbslq_f64(mask, vaddq_f64(vp12, vmulq_f64(coef, d12)), vp12));
    vst1q_f64(ebar + i, vbslq_f64(mask, vaddq_f64(ve, dg), ve));

    const float64x2_t sf = vmulq_f64(twog, coef);
    vst1q_f64(s11 + i,
              vbslq_f64(mask, vsubq_f64(t11, vmulq_f64(sf, d11)), t11));
    vst1q_f64(s22 + i,
              vbslq_f64(mask, vsubq_f64(t22, vmulq_f64(sf, d22)), t22));
    vst1q_f64(s33 + i,
              vbslq_f64(mask, vsubq_f64(t33, vmulq_f64(sf, d33)), t33));
    vst1q_f64(s12 + i,
              vbslq_f64(mask, vsubq_f64(t12, vmulq_f64(sf, d12)), t12));
  }
  for (; i < n; ++i)
    detail::radial_return_point(c, i, e11, e22, e12, p11, p22, p33, p12, ebar,
                                s11, s22, s33, s12);
}

constexpr KernelTable kNeonTable{dot_neon, nrm2sq_neon, axpy_neon, scal_neon,
                                 radial_return_neon};

}  // namespace

const KernelTable* neon_table_or_null() { return &kNeonTable; }

}  // namespace mtpgd::kernels

#endif  // aarch64
