#pragma once
#include <cstddef>
#include <string_view>

// Data-parallel inner loops shared by the tensor ops and the metrics.
// Every kernel exists as a plain scalar reference and, on x86-64 with AVX2,
// a vectorized variant. Dispatch is resolved once at startup; the env var
// UMBRA_KERNELS=scalar|avx2 forces a specific set.
//
// All matrices are row-major, double precision.

namespace umbra::kernels {

struct KernelSet {
    const char* name;

    // C[m,n] = A[m,k] * B[k,n]            (accumulate: C += ...)
    void (*gemm_nn)(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate);
    // C[m,n] = A[m,k] * B[n,k]^T
    void (*gemm_nt)(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate);
    // C[m,n] = A[k,m]^T * B[k,n]
    void (*gemm_tn)(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate);

    void (*add)(const double* a, const double* b, double* y, std::size_t n);       // y = a + b
    void (*mul)(const double* a, const double* b, double* y, std::size_t n);       // y = a .* b
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);         // y += alpha*x
    void (*affine)(double scale, double shift, const double* x, double* y,
                   std::size_t n);                                                 // y = scale*x + shift
    double (*reduce_sum)(const double* x, std::size_t n);
    double (*reduce_abs_diff)(const double* a, const double* b, std::size_t n);    // sum |a-b|
    double (*dot)(const double* a, const double* b, std::size_t n);
};

// Scalar reference set; always available.
const KernelSet& scalar_set();

// AVX2 set, or nullptr when the CPU (or build target) lacks support.
const KernelSet* avx2_set();

// Set chosen at startup (honors UMBRA_KERNELS).
const KernelSet& active();

std::string_view active_name();

// Convenience forwarders through the active set.
inline void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate = false) {
    active().gemm_nn(a, b, c, m, k, n, accumulate);
}
inline void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate = false) {
    active().gemm_nt(a, b, c, m, k, n, accumulate);
}
inline void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n,
                    bool accumulate = false) {
    active().gemm_tn(a, b, c, m, k, n, accumulate);
}
inline void add(const double* a, const double* b, double* y, std::size_t n) {
    active().add(a, b, y, n);
}
inline void mul(const double* a, const double* b, double* y, std::size_t n) {
    active().mul(a, b, y, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}
inline void affine(double scale, double shift, const double* x, double* y, std::size_t n) {
    active().affine(scale, shift, x, y, n);
}
inline double reduce_sum(const double* x, std::size_t n) { return active().reduce_sum(x, n); }
inline double reduce_abs_diff(const double* a, const double* b, std::size_t n) {
    return active().reduce_abs_diff(a, b, n);
}
inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}

}  // namespace umbra::kernels
