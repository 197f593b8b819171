#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "parreg/eigen.hpp"
#include "parreg/matrix.hpp"

namespace parreg {

// Monic real polynomial; coeffs[k] multiplies lambda^k, the leading
// coefficient (lambda^degree) is implicitly 1.
struct PolyCoeffs {
    std::vector<double> coeffs;

    std::size_t degree() const { return coeffs.size(); }

    double eval(double x) const {
        double v = 1.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
        return v;
    }
    std::complex<double> eval(std::complex<double> x) const {
        std::complex<double> v = 1.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
        return v;
    }
    Matrix eval(const Matrix& m) const {
        Matrix v = Matrix::identity(m.rows());
        for (std::size_t k = coeffs.size(); k-- > 0;) v = v * m + coeffs[k] * Matrix::identity(m.rows());
        return v;
    }
};

struct CompanionPair {
    Matrix phi; // l x l companion matrix
    Matrix psi; // 1 x l selector of the first coordinate
};

/// Companion realization of a monic polynomial: superdiagonal of ones,
/// bottom row -a0 ... -a_{l-1}; psi = [1 0 ... 0].
inline CompanionPair companion_pair(const PolyCoeffs& p) {
    const std::size_t l = p.degree();
    if (l < 1) throw DimensionMismatch("companion_pair: degree must be >= 1");
    CompanionPair cp{Matrix(l, l), Matrix(1, l)};
    for (std::size_t i = 0; i + 1 < l; ++i) cp.phi(i, i + 1) = 1.0;
    for (std::size_t j = 0; j < l; ++j) cp.phi(l - 1, j) = -p.coeffs[j];
    cp.psi(0, 0) = 1.0;
    return cp;
}

/// Roots of a monic polynomial, as eigenvalues of its companion matrix.
inline std::vector<std::complex<double>> poly_roots(const PolyCoeffs& p) {
    return eigenvalues(companion_pair(p).phi);
}

/// True iff all roots of the monic polynomial lie strictly in the open left
/// half plane. Degree 0 (empty coefficient list) counts as stable.
inline bool is_stable_poly(const PolyCoeffs& p) {
    if (p.degree() == 0) return true;
    for (const auto& z : poly_roots(p))
        if (z.real() >= 0.0) return false;
    return true;
}

/// Solve X B - A X = C for X (n x m), with A n x n and B m x m, via the
/// Kronecker linear system (B^T (x) I - I (x) A) vec(X) = vec(C).
/// Requires the spectra of A and B to be disjoint.
inline Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c,
                              double spectra_gap_tol = 1e-8) {
    const std::size_t n = a.rows(), m = b.rows();
    if (a.cols() != n || b.cols() != m) throw DimensionMismatch("solve_sylvester: A, B must be square");
    if (c.rows() != n || c.cols() != m) throw DimensionMismatch("solve_sylvester: C shape mismatch");
    if (n == 0 || m == 0) return Matrix(n, m);

    const auto eig_a = eigenvalues(a);
    const auto eig_b = eigenvalues(b);
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& la : eig_a)
        for (const auto& lb : eig_b) gap = std::min(gap, std::abs(la - lb));
    if (gap < spectra_gap_tol)
        throw SpectraOverlap("solve_sylvester: spectra of A and B are not disjoint (gap " +
                             std::to_string(gap) + ")");

    const Matrix k = kron(b.transpose(), Matrix::identity(n)) - kron(Matrix::identity(m), a);
    Matrix x;
    try {
        x = unvec_col(lu_solve(k, vec_col(c)), n, m);
    } catch (const SingularMatrix&) {
        throw SingularMatrix("solve_sylvester: Kronecker system is rank-deficient");
    }
    return x;
}

inline double sylvester_residual(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& x) {
    return (x * b - a * x - c).norm_fro();
}

/// Solve M^T P + P M = -I for the symmetric positive definite P of a
/// Hurwitz M. Lyapunov as a Sylvester special case: P M - (-M^T) P = -I.
inline Matrix solve_lyapunov(const Matrix& m, double hurwitz_tol = 1e-9) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw DimensionMismatch("solve_lyapunov: M not square");
    if (n == 0) return Matrix(0, 0);
    for (const auto& z : eigenvalues(m))
        if (z.real() >= -hurwitz_tol)
            throw NotHurwitz("solve_lyapunov: M is not Hurwitz (max Re = " +
                             std::to_string(z.real()) + ")");
    Matrix p = solve_sylvester(-m.transpose(), m, -Matrix::identity(n));
    // exact solution is symmetric; fold in the roundoff asymmetry
    Matrix ps = 0.5 * (p + p.transpose());
    return ps;
}

inline double lyapunov_residual(const Matrix& m, const Matrix& p) {
    return (m.transpose() * p + p * m + Matrix::identity(m.rows())).norm_fro();
}

/// Minimal polynomial of S: the least-degree monic p with p(S) = 0, found by
/// rank testing on the vectorized Krylov sequence {I, S, S^2, ...} with a
/// relative singular-value tolerance, then a least-squares solve for the
/// dependence coefficients.
inline PolyCoeffs minimal_polynomial(const Matrix& s, double sv_tol = 1e-9) {
    const std::size_t q = s.rows();
    if (s.cols() != q) throw DimensionMismatch("minimal_polynomial: S not square");
    if (!s.all_finite()) throw Error("minimal_polynomial: S has non-finite entries");
    if (q == 0) throw DimensionMismatch("minimal_polynomial: empty matrix");

    std::vector<Matrix> powers; // S^0 .. S^k
    powers.push_back(Matrix::identity(q));
    for (std::size_t k = 1; k <= q; ++k) {
        powers.push_back(powers.back() * s);
        // columns vec(S^0) .. vec(S^k): dependent iff degree <= k
        Matrix krylov(q * q, k + 1);
        for (std::size_t j = 0; j <= k; ++j) krylov.set_block(0, j, vec_col(powers[j]));
        const auto sv = singular_values(krylov);
        if (sv.front() == 0.0 || sv.back() <= sv_tol * sv.front()) {
            Matrix lhs(q * q, k);
            for (std::size_t j = 0; j < k; ++j) lhs.set_block(0, j, vec_col(powers[j]));
            const Matrix rhs = -1.0 * vec_col(powers[k]);
            const Matrix alpha = lstsq(lhs, rhs);
            PolyCoeffs p;
            p.coeffs.resize(k);
            for (std::size_t j = 0; j < k; ++j) p.coeffs[j] = alpha(j, 0);
            return p;
        }
    }
    // Cayley-Hamilton guarantees dependence at k = q; reaching here means the
    // tolerance was too tight, so fall back to the degree-q least squares.
    Matrix lhs(q * q, q);
    for (std::size_t j = 0; j < q; ++j) lhs.set_block(0, j, vec_col(powers[j]));
    const Matrix alpha = lstsq(lhs, -1.0 * vec_col(powers[q]));
    PolyCoeffs p;
    p.coeffs.resize(q);
    for (std::size_t j = 0; j < q; ++j) p.coeffs[j] = alpha(j, 0);
    return p;
}

/// Controllability matrix [B, AB, ..., A^{n-1}B].
inline Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n) throw DimensionMismatch("controllability_matrix shapes");
    Matrix ctrb(n, n * b.cols());
    Matrix akb = b;
    for (std::size_t k = 0; k < n; ++k) {
        ctrb.set_block(0, k * b.cols(), akb);
        akb = a * akb;
    }
    return ctrb;
}

inline bool is_controllable(const Matrix& a, const Matrix& b, double sv_tol = 1e-9) {
    const Matrix ctrb = controllability_matrix(a, b);
    const auto sv = singular_values(ctrb);
    if (sv.empty() || sv.front() == 0.0) return a.rows() == 0;
    return sv.back() > sv_tol * sv.front();
}

} // namespace parreg
