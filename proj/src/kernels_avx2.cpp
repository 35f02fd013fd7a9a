// AVX2 backend.  This is the only translation unit compiled with -mavx2; it is
// reached only after a runtime cpuid check, so the rest of the binary stays
// runnable on baseline x86-64.
#include "swq/kernels.hpp"

#include <immintrin.h>

#include <cstdint>

namespace swq::simd::detail {
namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

double sum_avx2(const double* a, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i];
    return r;
}

void axpy_avx2(double alpha, const double* x, double* y, size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

std::pair<double, double> minmax_avx2(const double* a, size_t n) {
    if (n < 8) {
        double lo = a[0], hi = a[0];
        for (size_t i = 1; i < n; ++i) {
            if (a[i] < lo) lo = a[i];
            if (a[i] > hi) hi = a[i];
        }
        return {lo, hi};
    }
    __m256d vlo = _mm256_loadu_pd(a);
    __m256d vhi = vlo;
    size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        vlo = _mm256_min_pd(vlo, v);
        vhi = _mm256_max_pd(vhi, v);
    }
    alignas(32) double tlo[4], thi[4];
    _mm256_store_pd(tlo, vlo);
    _mm256_store_pd(thi, vhi);
    double lo = tlo[0], hi = thi[0];
    for (int k = 1; k < 4; ++k) {
        if (tlo[k] < lo) lo = tlo[k];
        if (thi[k] > hi) hi = thi[k];
    }
    for (; i < n; ++i) {
        if (a[i] < lo) lo = a[i];
        if (a[i] > hi) hi = a[i];
    }
    return {lo, hi};
}

// Must agree with the scalar backend bit-for-bit, including tie resolution
// (largest index attaining the max), because the policy layer's schedule
// choice feeds back into trajectories.
size_t wargmax_avx2(const double* q, const double* s, size_t n) {
    size_t i = 0;
    size_t best = 0;
    double best_v = q[0] * s[0];
    if (n >= 8) {
        __m256d vbest = _mm256_mul_pd(_mm256_loadu_pd(q), _mm256_loadu_pd(s));
        __m256d vidx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
        __m256d cur = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
        const __m256d four = _mm256_set1_pd(4.0);
        for (i = 4; i + 4 <= n; i += 4) {
            cur = _mm256_add_pd(cur, four);
            __m256d v = _mm256_mul_pd(_mm256_loadu_pd(q + i), _mm256_loadu_pd(s + i));
            __m256d ge = _mm256_cmp_pd(v, vbest, _CMP_GE_OQ);
            vbest = _mm256_blendv_pd(vbest, v, ge);
            vidx = _mm256_blendv_pd(vidx, cur, ge);
        }
        alignas(32) double bv[4], bi[4];
        _mm256_store_pd(bv, vbest);
        _mm256_store_pd(bi, vidx);
        best_v = bv[0];
        best = static_cast<size_t>(bi[0]);
        for (int k = 1; k < 4; ++k) {
            if (bv[k] > best_v || (bv[k] == best_v && static_cast<size_t>(bi[k]) > best)) {
                best_v = bv[k];
                best = static_cast<size_t>(bi[k]);
            }
        }
    }
    for (; i < n; ++i) {
        double v = q[i] * s[i];
        if (v >= best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

const Backend avx2_impl = {dot_avx2, sum_avx2, axpy_avx2, minmax_avx2, wargmax_avx2};

}  // namespace

const Backend* avx2_backend() { return &avx2_impl; }

}  // namespace swq::simd::detail
