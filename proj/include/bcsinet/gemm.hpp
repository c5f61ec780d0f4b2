#pragma once

#include <cstddef>

namespace bcsinet {

// GEMM entry points used by the dense and convolution layers. The float
// instantiations are specialized in gemm.cpp to single-threaded BLAS sgemm;
// the generic templates below serve other scalar types (the double-precision
// gradient oracles) and act as the reference semantics. Loop orders keep the
// innermost loop unit-stride; fixed iteration order keeps the templates
// bit-deterministic.

// C[M,N] (+)= A[M,K] * B[K,N]
template <typename T>
void gemm_nn(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
    if (!accumulate) {
        for (long long i = 0; i < static_cast<long long>(M) * N; ++i) C[i] = T(0);
    }
    for (int m = 0; m < M; ++m) {
        T* c_row = C + static_cast<size_t>(m) * N;
        const T* a_row = A + static_cast<size_t>(m) * K;
        for (int k = 0; k < K; ++k) {
            const T a = a_row[k];
            const T* b_row = B + static_cast<size_t>(k) * N;
            for (int n = 0; n < N; ++n) c_row[n] += a * b_row[n];
        }
    }
}

// C[M,N] (+)= A[M,K] * B[N,K]^T  (rows of A dotted with rows of B)
template <typename T>
void gemm_nt(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
    for (int m = 0; m < M; ++m) {
        const T* a_row = A + static_cast<size_t>(m) * K;
        T* c_row = C + static_cast<size_t>(m) * N;
        for (int n = 0; n < N; ++n) {
            const T* b_row = B + static_cast<size_t>(n) * K;
            T acc = T(0);
            for (int k = 0; k < K; ++k) acc += a_row[k] * b_row[k];
            c_row[n] = accumulate ? c_row[n] + acc : acc;
        }
    }
}

// C[M,N] (+)= A[K,M]^T * B[K,N]
template <typename T>
void gemm_tn(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
    if (!accumulate) {
        for (long long i = 0; i < static_cast<long long>(M) * N; ++i) C[i] = T(0);
    }
    for (int k = 0; k < K; ++k) {
        const T* a_row = A + static_cast<size_t>(k) * M;
        const T* b_row = B + static_cast<size_t>(k) * N;
        for (int m = 0; m < M; ++m) {
            const T a = a_row[m];
            T* c_row = C + static_cast<size_t>(m) * N;
            for (int n = 0; n < N; ++n) c_row[n] += a * b_row[n];
        }
    }
}

// BLAS-backed float paths (gemm.cpp).
template <>
void gemm_nn<float>(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate);
template <>
void gemm_nt<float>(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate);
template <>
void gemm_tn<float>(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate);

}  // namespace bcsinet
