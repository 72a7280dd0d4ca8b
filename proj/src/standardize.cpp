#include <cmath>
#include <stdexcept>

#include "regime/learners.hpp"

namespace regime {

Standardizer Standardizer::fit(const Matrix& X) {
    if (X.rows == 0) throw std::invalid_argument("Standardizer: empty matrix");
    Standardizer s;
    s.mean.assign(X.cols, 0.0);
    s.std.assign(X.cols, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j) s.mean[j] += X(i, j);
    for (auto& m : s.mean) m /= static_cast<double>(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j) {
            double d = X(i, j) - s.mean[j];
            s.std[j] += d * d;
        }
    for (auto& v : s.std) v = std::max(std::sqrt(v / static_cast<double>(X.rows)), kStdFloor);
    return s;
}

Matrix Standardizer::transform(const Matrix& X) const {
    if (X.cols != mean.size())
        throw std::invalid_argument("Standardizer: width mismatch");
    Matrix out(X.rows, X.cols);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j)
            out(i, j) = (X(i, j) - mean[j]) / std[j];
    return out;
}

}  // namespace regime
