#include "sia/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "sia/error.hpp"

namespace sia {

std::vector<double> vec_mat(const std::vector<double>& v, const Matrix& m) {
    if (v.size() != m.rows()) throw ValidationError("vec_mat: size mismatch");
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double vr = v[r];
        for (std::size_t c = 0; c < m.cols(); ++c) out[c] += vr * m(r, c);
    }
    return out;
}

std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v) {
    if (v.size() != m.cols()) throw ValidationError("mat_vec: size mismatch");
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ValidationError("mat_mul: shape mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double ark = a(r, k);
            if (ark == 0.0) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
        }
    }
    return out;
}

void add_outer(Matrix& m, const std::vector<double>& a, const std::vector<double>& b,
               double scale) {
    if (a.size() != m.rows() || b.size() != m.cols())
        throw ValidationError("add_outer: shape mismatch");
    for (std::size_t r = 0; r < a.size(); ++r) {
        const double ar = scale * a[r];
        for (std::size_t c = 0; c < b.size(); ++c) m(r, c) += ar * b[c];
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("dot: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const std::vector<double>& a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return std::sqrt(acc);
}

bool all_finite(const std::vector<double>& a) {
    for (double x : a) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix inverse(const Matrix& m) {
    if (m.rows() != m.cols()) throw ValidationError("inverse: matrix not square");
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a(r, col)) > best) {
                best = std::fabs(a(r, col));
                pivot = r;
            }
        }
        if (best == 0.0) throw ValidationError("inverse: singular matrix");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(pivot, c), a(col, c));
                std::swap(inv(pivot, c), inv(col, c));
            }
        }
        const double d = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

double determinant(const Matrix& m) {
    if (m.rows() != m.cols()) throw ValidationError("determinant: matrix not square");
    const std::size_t n = m.rows();
    Matrix a = m;
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a(r, col)) > best) {
                best = std::fabs(a(r, col));
                pivot = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
            det = -det;
        }
        det *= a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
        }
    }
    return det;
}

} // namespace sia
