#include "omix/kernels.hpp"

#include <omp.h>

#include "omix/error.hpp"

namespace omix::kernels {

namespace {

// Work below this many multiply-adds is not worth a parallel region.
constexpr std::size_t kParallelThreshold = 1u << 16;

inline void nt_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
    const double* ai = a.row_ptr(i);
    double* oi = out.row_ptr(i);
    const std::size_t k = a.cols;
    for (std::size_t j = 0; j < b.rows; ++j) {
        const double* bj = b.row_ptr(j);
        double acc = 0.0;
        for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
        oi[j] = acc;
    }
}

inline void nn_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
    const double* ai = a.row_ptr(i);
    double* oi = out.row_ptr(i);
    for (std::size_t j = 0; j < out.cols; ++j) oi[j] = 0.0;
    for (std::size_t t = 0; t < a.cols; ++t) {
        const double av = ai[t];
        if (av == 0.0) continue;
        const double* bt = b.row_ptr(t);
        for (std::size_t j = 0; j < out.cols; ++j) oi[j] += av * bt[j];
    }
}

// row i of out = column i of a dotted against all of b
inline void tn_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
    double* oi = out.row_ptr(i);
    for (std::size_t j = 0; j < out.cols; ++j) oi[j] = 0.0;
    for (std::size_t s = 0; s < a.rows; ++s) {
        const double av = a.at(s, i);
        if (av == 0.0) continue;
        const double* bs = b.row_ptr(s);
        for (std::size_t j = 0; j < out.cols; ++j) oi[j] += av * bs[j];
    }
}

inline void sqdist_row(const Matrix& e, Matrix& out, std::size_t i) {
    const double* ei = e.row_ptr(i);
    double* oi = out.row_ptr(i);
    for (std::size_t j = 0; j < e.rows; ++j) {
        const double* ej = e.row_ptr(j);
        double acc = 0.0;
        for (std::size_t t = 0; t < e.cols; ++t) {
            const double d = ei[t] - ej[t];
            acc += d * d;
        }
        oi[j] = acc;
    }
}

void check_nt(const Matrix& a, const Matrix& b) {
    require(a.cols == b.cols, "matmul_nt: inner dimensions differ, a=" + a.shape_str() +
                                  " b=" + b.shape_str());
}
void check_nn(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul_nn: inner dimensions differ, a=" + a.shape_str() +
                                  " b=" + b.shape_str());
}
void check_tn(const Matrix& a, const Matrix& b) {
    require(a.rows == b.rows, "matmul_tn: inner dimensions differ, a=" + a.shape_str() +
                                  " b=" + b.shape_str());
}

}  // namespace

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
    check_nt(a, b);
    out.resize(a.rows, b.rows);
    const std::size_t work = a.rows * b.rows * a.cols;
    if (work >= kParallelThreshold) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(a.rows); ++i)
            nt_row(a, b, out, static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < a.rows; ++i) nt_row(a, b, out, i);
    }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
    check_nn(a, b);
    out.resize(a.rows, b.cols);
    const std::size_t work = a.rows * a.cols * b.cols;
    if (work >= kParallelThreshold) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(a.rows); ++i)
            nn_row(a, b, out, static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < a.rows; ++i) nn_row(a, b, out, i);
    }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
    check_tn(a, b);
    out.resize(a.cols, b.cols);
    const std::size_t work = a.rows * a.cols * b.cols;
    if (work >= kParallelThreshold) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(a.cols); ++i)
            tn_row(a, b, out, static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < a.cols; ++i) tn_row(a, b, out, i);
    }
}

void pairwise_sqdist(const Matrix& e, Matrix& out) {
    out.resize(e.rows, e.rows);
    const std::size_t work = e.rows * e.rows * e.cols;
    if (work >= kParallelThreshold) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(e.rows); ++i)
            sqdist_row(e, out, static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < e.rows; ++i) sqdist_row(e, out, i);
    }
}

namespace serial {

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
    check_nt(a, b);
    out.resize(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) nt_row(a, b, out, i);
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
    check_nn(a, b);
    out.resize(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) nn_row(a, b, out, i);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
    check_tn(a, b);
    out.resize(a.cols, b.cols);
    for (std::size_t i = 0; i < a.cols; ++i) tn_row(a, b, out, i);
}

void pairwise_sqdist(const Matrix& e, Matrix& out) {
    out.resize(e.rows, e.rows);
    for (std::size_t i = 0; i < e.rows; ++i) sqdist_row(e, out, i);
}

}  // namespace serial

}  // namespace omix::kernels
