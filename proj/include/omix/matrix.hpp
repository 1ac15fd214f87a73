#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace omix {

// Dense row-major matrix of doubles. All numeric state in the project lives
// in these; invariant rows*cols == data.size().
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    std::span<double> row(std::size_t r) { return {row_ptr(r), cols}; }
    std::span<const double> row(std::size_t r) const { return {row_ptr(r), cols}; }

    void resize(std::size_t r, std::size_t c) {
        rows = r;
        cols = c;
        data.assign(r * c, 0.0);
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }
};

// out = rows of `m` selected by `idx`, in order
Matrix take_rows(const Matrix& m, std::span<const int> idx);

// horizontal concatenation; all parts share the row count
Matrix hcat(const std::vector<const Matrix*>& parts);

bool all_finite(const Matrix& m);

}  // namespace omix
