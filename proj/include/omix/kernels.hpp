#pragma once

#include "omix/matrix.hpp"

namespace omix::kernels {

// Hot inner loops, OpenMP-parallel over output rows. Every output row is
// computed by a single thread with the same per-row worker the serial
// reference uses, so results are bit-identical for any thread count.
// omix::kernels::serial holds the plain-loop reference implementations that
// the tests compare against and bench_kernels times.

// out(m,n) = a(m,k) * b(n,k)^T        (dot products of contiguous rows)
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);

// out(m,n) = a(m,k) * b(k,n)
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);

// out(k,n) = a(m,k)^T * b(m,n)
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);

// out(i,j) = squared euclidean distance between rows i and j of e
void pairwise_sqdist(const Matrix& e, Matrix& out);

namespace serial {
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
void pairwise_sqdist(const Matrix& e, Matrix& out);
}  // namespace serial

}  // namespace omix::kernels
