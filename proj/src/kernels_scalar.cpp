#include "umbra/kernels.hpp"

#include <cmath>
#include <cstring>

// Reference kernels. The GEMMs use the i-k-j loop order so the per-element
// accumulation order matches the vectorized variants (equivalence tests then
// only see rounding differences from FMA, not reassociation).

namespace umbra::kernels {
namespace {

void gemm_nn_scalar(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate) {
    if (!accumulate) std::memset(c, 0, sizeof(double) * (std::size_t)m * n);
    for (int i = 0; i < m; ++i) {
        const double* arow = a + (std::size_t)i * k;
        double* crow = c + (std::size_t)i * n;
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + (std::size_t)p * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt_scalar(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate) {
    for (int i = 0; i < m; ++i) {
        const double* arow = a + (std::size_t)i * k;
        double* crow = c + (std::size_t)i * n;
        for (int j = 0; j < n; ++j) {
            const double* brow = b + (std::size_t)j * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = accumulate ? crow[j] + acc : acc;
        }
    }
}

void gemm_tn_scalar(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate) {
    if (!accumulate) std::memset(c, 0, sizeof(double) * (std::size_t)m * n);
    for (int p = 0; p < k; ++p) {
        const double* arow = a + (std::size_t)p * m;
        const double* brow = b + (std::size_t)p * n;
        for (int i = 0; i < m; ++i) {
            const double av = arow[i];
            double* crow = c + (std::size_t)i * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void add_scalar(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void mul_scalar(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void affine_scalar(double scale, double shift, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = scale * x[i] + shift;
}

double reduce_sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double reduce_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

const KernelSet& scalar_set() {
    static const KernelSet set{
        "scalar",         gemm_nn_scalar,  gemm_nt_scalar,
        gemm_tn_scalar,   add_scalar,      mul_scalar,
        axpy_scalar,      affine_scalar,   reduce_sum_scalar,
        reduce_abs_diff_scalar, dot_scalar,
    };
    return set;
}

}  // namespace umbra::kernels
