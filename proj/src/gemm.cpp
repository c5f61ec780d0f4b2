#include "bcsinet/gemm.hpp"

#include <cblas.h>

extern "C" void openblas_set_num_threads(int);

namespace bcsinet {

namespace {

// Results must not depend on ambient thread settings; one BLAS thread also
// avoids oversubscription since training already owns the core.
const bool kBlasInit = [] {
    openblas_set_num_threads(1);
    return true;
}();

}  // namespace

template <>
void gemm_nn<float>(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate) {
    cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, M, N, K, 1.0f, A, K, B, N,
                accumulate ? 1.0f : 0.0f, C, N);
}

template <>
void gemm_nt<float>(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate) {
    cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasTrans, M, N, K, 1.0f, A, K, B, K,
                accumulate ? 1.0f : 0.0f, C, N);
}

template <>
void gemm_tn<float>(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate) {
    cblas_sgemm(CblasRowMajor, CblasTrans, CblasNoTrans, M, N, K, 1.0f, A, M, B, N,
                accumulate ? 1.0f : 0.0f, C, N);
}

}  // namespace bcsinet
