#pragma once

#include <cblas.h>

#include "t2v/core/tensor.hpp"

namespace t2v {

// Row-major C[m,n] = alpha * op(A) * op(B) + beta * C.
// op(A) is A[m,k] (or A[k,m] if trans_a), op(B) is B[k,n] (or B[n,k] if trans_b).
template <class T>
void gemm(bool trans_a, bool trans_b, i64 m, i64 n, i64 k,
          T alpha, const T* a, const T* b, T beta, T* c) {
    const auto ta = trans_a ? CblasTrans : CblasNoTrans;
    const auto tb = trans_b ? CblasTrans : CblasNoTrans;
    const int lda = static_cast<int>(trans_a ? m : k);
    const int ldb = static_cast<int>(trans_b ? k : n);
    const int ldc = static_cast<int>(n);
    if constexpr (std::is_same_v<T, float>) {
        cblas_sgemm(CblasRowMajor, ta, tb, static_cast<int>(m), static_cast<int>(n),
                    static_cast<int>(k), alpha, a, lda, b, ldb, beta, c, ldc);
    } else {
        static_assert(std::is_same_v<T, double>, "gemm supports float/double");
        cblas_dgemm(CblasRowMajor, ta, tb, static_cast<int>(m), static_cast<int>(n),
                    static_cast<int>(k), alpha, a, lda, b, ldb, beta, c, ldc);
    }
}

}  // namespace t2v
