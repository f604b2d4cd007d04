#pragma once

#include <cstddef>
#include <vector>

namespace sia {

/// Dense row-major matrix of doubles. Small and unclever on purpose: every
/// product in this library is deterministic sequential accumulation.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Row vector (length = m.rows()) times matrix; returns a length-m.cols() row.
std::vector<double> vec_mat(const std::vector<double>& v, const Matrix& m);

/// Matrix times column vector (length = m.cols()); returns a length-m.rows() column.
std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v);

Matrix mat_mul(const Matrix& a, const Matrix& b);

/// m += scale * a b^T with a indexing rows and b indexing columns.
void add_outer(Matrix& m, const std::vector<double>& a, const std::vector<double>& b,
               double scale);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
bool all_finite(const std::vector<double>& a);

/// Gauss-Jordan inverse with partial pivoting. Throws ValidationError when
/// the matrix is singular to working precision.
Matrix inverse(const Matrix& m);

/// Determinant via LU decomposition with partial pivoting.
double determinant(const Matrix& m);

} // namespace sia
