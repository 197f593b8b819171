#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "parreg/errors.hpp"

namespace parreg {

// Dense real matrix, row-major. Sized for desk-scale control work
// (everything in this library is well under 100x100). Zero-sized
// dimensions are legal and arise naturally (plants with no zero
// dynamics have an empty z-block).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        Matrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw DimensionMismatch("ragged row in matrix literal");
            std::size_t j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    static Matrix column(std::span<const double> v) {
        Matrix m(v.size(), 1);
        for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
        return m;
    }

    static Matrix row_vector(std::span<const double> v) {
        Matrix m(1, v.size());
        for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return d_.size(); }
    bool empty() const { return d_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

    double* data() { return d_.data(); }
    const double* data() const { return d_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o, "+=");
        for (std::size_t k = 0; k < d_.size(); ++k) d_[k] += o.d_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o, "-=");
        for (std::size_t k = 0; k < d_.size(); ++k) d_[k] -= o.d_[k];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (double& v : d_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    friend Matrix operator-(Matrix a) { return a *= -1.0; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shape mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix block(std::size_t i0, std::size_t j0, std::size_t r, std::size_t c) const {
        if (i0 + r > rows_ || j0 + c > cols_) throw DimensionMismatch("block out of range");
        Matrix b(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
        return b;
    }

    void set_block(std::size_t i0, std::size_t j0, const Matrix& b) {
        if (i0 + b.rows_ > rows_ || j0 + b.cols_ > cols_)
            throw DimensionMismatch("set_block out of range");
        for (std::size_t i = 0; i < b.rows_; ++i)
            for (std::size_t j = 0; j < b.cols_; ++j) (*this)(i0 + i, j0 + j) = b(i, j);
    }

    Matrix row(std::size_t i) const { return block(i, 0, 1, cols_); }
    Matrix col(std::size_t j) const { return block(0, j, rows_, 1); }

    double norm_fro() const {
        double s = 0.0;
        for (double v : d_) s += v * v;
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : d_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        for (double v : d_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string to_string(int precision = 6) const {
        std::ostringstream os;
        os.precision(precision);
        os << "[";
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) os << (j ? " " : "") << (*this)(i, j);
            if (i + 1 < rows_) os << "; ";
        }
        os << "]";
        return os.str();
    }

private:
    void require_same_shape(const Matrix& o, const char* op) const {
        if (!same_shape(o)) throw DimensionMismatch(std::string("shape mismatch in ") + op);
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> d_;
};

// y = A x, no allocation; the simulation hot path.
inline void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = a.rows(), m = a.cols();
    const double* p = a.data();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += p[i * m + j] * x[j];
        y[i] = s;
    }
}

inline std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
    if (a.cols() != x.size()) throw DimensionMismatch("matvec shape mismatch");
    std::vector<double> y(a.rows());
    matvec(a, x, y);
    return y;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

// Column-major vectorization, so that vec(AXB) = (B^T (x) A) vec(X).
inline Matrix vec_col(const Matrix& a) {
    Matrix v(a.rows() * a.cols(), 1);
    std::size_t k = 0;
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) v(k++, 0) = a(i, j);
    return v;
}

inline Matrix unvec_col(const Matrix& v, std::size_t rows, std::size_t cols) {
    if (v.rows() != rows * cols || v.cols() != 1)
        throw DimensionMismatch("unvec_col shape mismatch");
    Matrix a(rows, cols);
    std::size_t k = 0;
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) a(i, j) = v(k++, 0);
    return a;
}

// Solve A X = B by LU with partial pivoting. A must be square.
inline Matrix lu_solve(Matrix a, Matrix b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("lu_solve: A not square");
    if (b.rows() != n) throw DimensionMismatch("lu_solve: RHS row count");
    if (n == 0) return b;
    const double scale = std::max(a.max_abs(), 1e-300);
    const double tiny = scale * n * std::numeric_limits<double>::epsilon();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) <= tiny) throw SingularMatrix("lu_solve: singular to working precision");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
        }
        const double inv = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) * inv;
            if (f == 0.0) continue;
            a(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = b(k, j);
            for (std::size_t i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
            b(k, j) = s / a(k, k);
        }
    }
    return b;
}

inline Matrix inverse(const Matrix& a) { return lu_solve(a, Matrix::identity(a.rows())); }

// Least squares min ||A X - B|| via Householder QR; A must have rows >= cols.
inline Matrix lstsq(Matrix a, Matrix b) {
    const std::size_t m = a.rows(), n = a.cols();
    if (m < n) throw DimensionMismatch("lstsq: underdetermined system");
    if (b.rows() != m) throw DimensionMismatch("lstsq: RHS row count");
    std::vector<double> v(m);
    for (std::size_t j = 0; j < n; ++j) {
        double nrm = 0.0;
        for (std::size_t i = j; i < m; ++i) nrm += a(i, j) * a(i, j);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw SingularMatrix("lstsq: rank-deficient");
        const double alpha = a(j, j) >= 0 ? -nrm : nrm;
        double vnorm2 = 0.0;
        for (std::size_t i = j; i < m; ++i) {
            v[i] = a(i, j);
            if (i == j) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;
        auto reflect = [&](Matrix& mat, std::size_t col0) {
            for (std::size_t c = col0; c < mat.cols(); ++c) {
                double dot = 0.0;
                for (std::size_t i = j; i < m; ++i) dot += v[i] * mat(i, c);
                dot *= beta;
                for (std::size_t i = j; i < m; ++i) mat(i, c) -= dot * v[i];
            }
        };
        reflect(a, j);
        reflect(b, 0);
        a(j, j) = alpha;
    }
    Matrix x(n, b.cols());
    const double tiny = std::max(a.max_abs(), 1e-300) * m * std::numeric_limits<double>::epsilon();
    for (std::size_t k = n; k-- > 0;) {
        if (std::abs(a(k, k)) <= tiny) throw SingularMatrix("lstsq: rank-deficient");
        for (std::size_t c = 0; c < b.cols(); ++c) {
            double s = b(k, c);
            for (std::size_t i = k + 1; i < n; ++i) s -= a(k, i) * x(i, c);
            x(k, c) = s / a(k, k);
        }
    }
    return x;
}

// Singular values by one-sided Jacobi, descending. Accurate enough for the
// rank and conditioning tests here (tolerances >= 1e-9 relative).
inline std::vector<double> singular_values(Matrix a) {
    if (a.rows() < a.cols()) a = a.transpose();
    const std::size_t m = a.rows(), n = a.cols();
    if (n == 0) return {};
    const double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    app += a(i, p) * a(i, p);
                    aqq += a(i, q) * a(i, q);
                    apq += a(i, p) * a(i, q);
                }
                if (std::abs(apq) <= 1e2 * eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double vp = a(i, p), vq = a(i, q);
                    a(i, p) = c * vp - s * vq;
                    a(i, q) = s * vp + c * vq;
                }
            }
        if (!rotated) break;
    }
    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += a(i, j) * a(i, j);
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

inline double spectral_norm(const Matrix& a) {
    if (a.empty()) return 0.0;
    return singular_values(a).front();
}

// 2-norm condition number; +inf when numerically rank-deficient.
inline double cond2(const Matrix& a) {
    const auto sv = singular_values(a);
    if (sv.empty()) return 1.0;
    if (sv.back() == 0.0) return std::numeric_limits<double>::infinity();
    return sv.front() / sv.back();
}

} // namespace parreg
