#pragma once
// Small dense row-major matrix. Desk-scale data only; no BLAS.

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace regime {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }

    Matrix gather_rows(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), cols);
        for (std::size_t k = 0; k < idx.size(); ++k)
            for (std::size_t j = 0; j < cols; ++j) out(k, j) = (*this)(idx[k], j);
        return out;
    }

    std::vector<double> col_means() const {
        std::vector<double> m(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) m[j] += (*this)(i, j);
        for (auto& v : m) v /= static_cast<double>(rows ? rows : 1);
        return m;
    }
};

// Feature block paired with optional column names (ingested, never derived here).
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> column_names;

    std::size_t n() const { return values.rows; }
    std::size_t dim() const { return values.cols; }

    FeatureMatrix gather_rows(const std::vector<std::size_t>& idx) const {
        return FeatureMatrix{values.gather_rows(idx), column_names};
    }
};

template <typename T>
std::vector<T> gather(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

}  // namespace regime
