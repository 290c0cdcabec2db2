// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernel backend. This translation unit is the only one compiled with
// -mavx2. To stay bit-identical with the scalar reference it restricts itself
// to correctly rounded vector ops (add/sub/mul/div/sqrt) — in particular no
// FMA — and reduces with the same (acc0+acc2)+(acc1+acc3) tree the scalar
// kernels use.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

#include "mtpgd/kernels/kernels.hpp"
#include "radial_return_point.hpp"

namespace mtpgd::kernels {

namespace {

inline double reduce4(__m256d v) {
  // lanes: [acc0 acc1 acc2 acc3] -> (acc0+acc2) + (acc1+acc3)
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);  // [acc0+acc2, acc1+acc3]
  const __m128d swap = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swap));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double s = reduce4(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double nrm2sq_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, va));
  }
  double s = reduce4(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void radial_return_avx2(const PlasticConstants& c, std::size_t n,
                        const double* e11, const double* e22,
                        const double* e12, double* p11, double* p22,
                        double* p33, double* p12, double* ebar, double* s11,
                        double* s22, double* s33, double* s12) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d third = _mm256_set1_pd(detail::kThird);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d onep5 = _mm256_set1_pd(1.5);
  const __m256d lam = _mm256_set1_pd(c.lame_lambda);
  const __m256d twog = _mm256_set1_pd(c.two_g);
  const __m256d sy0 = _mm256_set1_pd(c.sigma_y0);
  const __m256d hard = _mm256_set1_pd(c.hardening);
  const __m256d denom = _mm256_set1_pd(c.denom);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vp11 = _mm256_loadu_pd(p11 + i);
    const __m256d vp22 = _mm256_loadu_pd(p22 + i);
    const __m256d vp33 = _mm256_loadu_pd(p33 + i);
    const __m256d vp12 = _mm256_loadu_pd(p12 + i);
    const __m256d ve = _mm256_loadu_pd(ebar + i);

    const __m256d ee11 = _mm256_sub_pd(_mm256_loadu_pd(e11 + i), vp11);
    const __m256d ee22 = _mm256_sub_pd(_mm256_loadu_pd(e22 + i), vp22);
    const __m256d ee33 = _mm256_sub_pd(zero, vp33);
    const __m256d ee12 = _mm256_sub_pd(_mm256_loadu_pd(e12 + i), vp12);

    const __m256d tr = _mm256_add_pd(_mm256_add_pd(ee11, ee22), ee33);
    const __m256d lt = _mm256_mul_pd(lam, tr);
    const __m256d t11 = _mm256_add_pd(lt, _mm256_mul_pd(twog, ee11));
    const __m256d t22 = _mm256_add_pd(lt, _mm256_mul_pd(twog, ee22));
    const __m256d t33 = _mm256_add_pd(lt, _mm256_mul_pd(twog, ee33));
    const __m256d t12 = _mm256_mul_pd(twog, ee12);

    const __m256d mean =
        _mm256_mul_pd(_mm256_add_pd(_mm256_add_pd(t11, t22), t33), third);
    const __m256d d11 = _mm256_sub_pd(t11, mean);
    const __m256d d22 = _mm256_sub_pd(t22, mean);
    const __m256d d33 = _mm256_sub_pd(t33, mean);
    const __m256d d12 = t12;

    const __m256d j2 = _mm256_add_pd(
        _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(d11, d11), _mm256_mul_pd(d22, d22)),
            _mm256_mul_pd(d33, d33)),
        _mm256_mul_pd(_mm256_mul_pd(d12, d12), two));
    const __m256d q = _mm256_sqrt_pd(_mm256_mul_pd(j2, onep5));
    const __m256d f =
        _mm256_sub_pd(q, _mm256_add_pd(sy0, _mm256_mul_pd(hard, ve)));

    const __m256d mask = _mm256_cmp_pd(f, zero, _CMP_GT_OQ);
    // compute the plastic branch unconditionally; dead lanes are blended away
    // (their q may be 0, the resulting inf/nan is discarded by the blend)
    const __m256d dg = _mm256_div_pd(f, denom);
    const __m256d coef = _mm256_div_pd(_mm256_mul_pd(dg, onep5), q);

    _mm256_storeu_pd(p11 + i,
                     _mm256_blendv_pd(
                         vp11, _mm256_add_pd(vp11, _mm256_mul_pd(coef, d11)),
                         mask));
    _mm256_storeu_pd(p22 + i,
                     _mm256_blendv_pd(
                         vp22, _mm256_add_pd(vp22, _mm256_mul_pd(coef, d22)),
                         mask));
    _mm256_storeu_pd(p33 + i,
                     _mm256_blendv_pd(
                         vp33, _mm256_add_pd(vp33, _mm256_mul_pd(coef, d33)),
                         mask));
    _mm256_storeu_pd(p12 + i,
                     _mm256_blendv_pd(
                         vp12, _mm256_add_pd(vp12, _mm256_mul_pd(coef, d12)),
                         mask));
    _mm256_storeu_pd(ebar + i,
                     _mm256_blendv_pd(ve, _mm256_add_pd(ve, dg), mask));

    const __m256d sf = _mm256_mul_pd(twog, coef);
    _mm256_storeu_pd(
        s11 + i,
        _mm256_blendv_pd(t11, _mm256_sub_pd(t11, _mm256_mul_pd(sf, d11)),
                         mask));
    _mm256_storeu_pd(
        s22 + i,
        _mm256_blendv_pd(t22, _mm256_sub_pd(t22, _mm256_mul_pd(sf, d22)),
                         mask));
    _mm256_storeu_pd(
        s33 + i,
        _mm256_blendv_pd(t33, _mm256_sub_pd(t33, _mm256_mul_pd(sf, d33)),
                         mask));
    _mm256_storeu_pd(
        s12 + i,
        _mm256_blendv_pd(t12, _mm256_sub_pd(t12, _mm256_mul_pd(sf, d12)),
                         mask));
  }
  for (; i < n; ++i)
    detail::radial_return_point(c, i, e11, e22, e12, p11, p22, p33, p12, ebar,
                                s11, s22, s33, s12);
}

constexpr KernelTable kAvx2Table{dot_avx2, nrm2sq_avx2, axpy_avx2, scal_avx2,
                                 radial_return_avx2};

}  // namespace

const KernelTable* avx2_table_or_null() { return &kAvx2Table; }

bool avx2_supported() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

}  // namespace mtpgd::kernels

#endif  // x86_64
