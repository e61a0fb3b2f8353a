#include "umbra/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace umbra::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void gemm_nn_avx2(const double* a, const double* b, double* c, int m, int k, int n,
                  bool accumulate) {
    if (!accumulate) std::memset(c, 0, sizeof(double) * (std::size_t)m * n);
    const int n4 = n & ~3;
    for (int i = 0; i < m; ++i) {
        const double* arow = a + (std::size_t)i * k;
        double* crow = c + (std::size_t)i * n;
        for (int p = 0; p < k; ++p) {
            const __m256d av = _mm256_set1_pd(arow[p]);
            const double* brow = b + (std::size_t)p * n;
            int j = 0;
            for (; j < n4; j += 4) {
                __m256d cv = _mm256_loadu_pd(crow + j);
                cv = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), cv);
                _mm256_storeu_pd(crow + j, cv);
            }
            const double s = arow[p];
            for (; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

void gemm_nt_avx2(const double* a, const double* b, double* c, int m, int k, int n,
                  bool accumulate) {
    const int k4 = k & ~3;
    for (int i = 0; i < m; ++i) {
        const double* arow = a + (std::size_t)i * k;
        double* crow = c + (std::size_t)i * n;
        for (int j = 0; j < n; ++j) {
            const double* brow = b + (std::size_t)j * k;
            __m256d acc = _mm256_setzero_pd();
            int p = 0;
            for (; p < k4; p += 4)
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(brow + p), acc);
            double sum = hsum(acc);
            for (; p < k; ++p) sum += arow[p] * brow[p];
            crow[j] = accumulate ? crow[j] + sum : sum;
        }
    }
}

void gemm_tn_avx2(const double* a, const double* b, double* c, int m, int k, int n,
                  bool accumulate) {
    if (!accumulate) std::memset(c, 0, sizeof(double) * (std::size_t)m * n);
    const int n4 = n & ~3;
    for (int p = 0; p < k; ++p) {
        const double* arow = a + (std::size_t)p * m;
        const double* brow = b + (std::size_t)p * n;
        for (int i = 0; i < m; ++i) {
            const __m256d av = _mm256_set1_pd(arow[i]);
            double* crow = c + (std::size_t)i * n;
            int j = 0;
            for (; j < n4; j += 4) {
                __m256d cv = _mm256_loadu_pd(crow + j);
                cv = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), cv);
                _mm256_storeu_pd(crow + j, cv);
            }
            const double s = arow[i];
            for (; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

void add_avx2(const double* a, const double* b, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] + b[i];
}

void mul_avx2(const double* a, const double* b, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void affine_avx2(double scale, double shift, const double* x, double* y, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(scale);
    const __m256d tv = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(sv, _mm256_loadu_pd(x + i), tv));
    for (; i < n; ++i) y[i] = scale * x[i] + shift;
}

double reduce_sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double sum = hsum(acc);
    for (; i < n; ++i) sum += x[i];
    return sum;
}

double reduce_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += std::fabs(a[i] - b[i]);
    return sum;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double sum = hsum(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

const KernelSet avx2_kernels{
    "avx2",          gemm_nn_avx2,  gemm_nt_avx2,
    gemm_tn_avx2,    add_avx2,      mul_avx2,
    axpy_avx2,       affine_avx2,   reduce_sum_avx2,
    reduce_abs_diff_avx2, dot_avx2,
};

}  // namespace

const KernelSet* avx2_set() {
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2_kernels;
    return nullptr;
}

}  // namespace umbra::kernels

#else

namespace umbra::kernels {
const KernelSet* avx2_set() { return nullptr; }
}  // namespace umbra::kernels

#endif
