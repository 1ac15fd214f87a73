#include "omix/matrix.hpp"

#include <cmath>
#include <cstring>

#include "omix/error.hpp"

namespace omix {

Matrix take_rows(const Matrix& m, std::span<const int> idx) {
    Matrix out(idx.size(), m.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < m.rows,
                "take_rows: index " + std::to_string(idx[i]) + " out of range for " +
                    m.shape_str());
        std::memcpy(out.row_ptr(i), m.row_ptr(static_cast<std::size_t>(idx[i])),
                    m.cols * sizeof(double));
    }
    return out;
}

Matrix hcat(const std::vector<const Matrix*>& parts) {
    require(!parts.empty(), "hcat: no parts");
    const std::size_t rows = parts.front()->rows;
    std::size_t cols = 0;
    for (const Matrix* p : parts) {
        require(p->rows == rows, "hcat: row mismatch, " + parts.front()->shape_str() +
                                     " vs " + p->shape_str());
        cols += p->cols;
    }
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double* dst = out.row_ptr(r);
        for (const Matrix* p : parts) {
            std::memcpy(dst, p->row_ptr(r), p->cols * sizeof(double));
            dst += p->cols;
        }
    }
    return out;
}

bool all_finite(const Matrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace omix
