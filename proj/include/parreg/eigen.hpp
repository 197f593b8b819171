#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "parreg/matrix.hpp"

namespace parreg {

namespace detail {

// Osborne balancing (diagonal similarity scaling by powers of 2).
// Conditioning aid only; eigenvalues are unchanged.
inline void balance(Matrix& a) {
    const std::size_t n = a.rows();
    constexpr double radix = 2.0, sq = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) {
                    c += std::abs(a(j, i));
                    r += std::abs(a(i, j));
                }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sq;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sq;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

// Reduction to upper Hessenberg form by stabilized elementary similarity
// transformations (pivoted Gaussian elimination variant).
inline void hessenberg(Matrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    for (std::size_t m = 1; m + 1 < n; ++m) {
        double x = 0.0;
        std::size_t piv = m;
        for (std::size_t j = m; j < n; ++j)
            if (std::abs(a(j, m - 1)) > std::abs(x)) {
                x = a(j, m - 1);
                piv = j;
            }
        if (piv != m) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(m, j));
            for (std::size_t j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
        }
        if (x != 0.0) {
            for (std::size_t i = m + 1; i < n; ++i) {
                double y = a(i, m - 1);
                if (y == 0.0) continue;
                y /= x;
                a(i, m - 1) = 0.0;
                for (std::size_t j = m; j < n; ++j) a(i, j) -= y * a(m, j);
                for (std::size_t j = 0; j < n; ++j) a(j, m) += y * a(j, i);
            }
        }
    }
    // clear anything below the first subdiagonal
    for (std::size_t i = 2; i < n; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j) a(i, j) = 0.0;
}

// Francis double-shift QR on a real upper Hessenberg matrix; eigenvalues only.
// Classic EISPACK hqr structure with exceptional shifts at iterations 10 and 20.
inline std::vector<std::complex<double>> hqr(Matrix& a, int max_its_per_eig) {
    const int n = static_cast<int>(a.rows());
    std::vector<std::complex<double>> eig(static_cast<std::size_t>(n));
    if (n == 0) return eig;
    const double eps = std::numeric_limits<double>::epsilon();

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
    if (anorm == 0.0) return eig; // zero matrix

    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        for (;;) {
            int l = 0;
            for (int k = nn; k >= 1; --k) {
                double s = std::abs(a(k - 1, k - 1)) + std::abs(a(k, k));
                if (s == 0.0) s = anorm;
                if (std::abs(a(k, k - 1)) <= eps * s) {
                    a(k, k - 1) = 0.0;
                    l = k;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {
                eig[static_cast<std::size_t>(nn--)] = {x + t, 0.0};
                break;
            }
            double y = a(nn - 1, nn - 1);
            double w = a(nn, nn - 1) * a(nn - 1, nn);
            if (l == nn - 1) {
                double p = 0.5 * (y - x);
                double q = p * p + w;
                double z = std::sqrt(std::abs(q));
                x += t;
                if (q >= 0.0) {
                    z = p + (p >= 0 ? std::abs(z) : -std::abs(z));
                    double e1 = x + z;
                    double e2 = (z != 0.0) ? x - w / z : e1;
                    eig[static_cast<std::size_t>(nn - 1)] = {e1, 0.0};
                    eig[static_cast<std::size_t>(nn)] = {e2, 0.0};
                } else {
                    eig[static_cast<std::size_t>(nn - 1)] = {x + p, z};
                    eig[static_cast<std::size_t>(nn)] = {x + p, -z};
                }
                nn -= 2;
                break;
            }
            if (its == max_its_per_eig)
                throw NoConvergence("QR eigenvalue iteration did not converge");
            if (its == 10 || its == 20) {
                t += x;
                for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                x = y = 0.75 * s;
                w = -0.4375 * s * s;
            }
            ++its;
            int m;
            double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
            for (m = nn - 2; m >= l; --m) {
                z = a(m, m);
                double rr = x - z;
                double ss = y - z;
                p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
                q = a(m + 1, m + 1) - z - rr - ss;
                r = a(m + 2, m + 1);
                double sc = std::abs(p) + std::abs(q) + std::abs(r);
                p /= sc;
                q /= sc;
                r /= sc;
                if (m == l) break;
                const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                const double v =
                    std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
                if (u <= eps * v) break;
            }
            for (int i = m + 2; i <= nn; ++i) {
                a(i, i - 2) = 0.0;
                if (i != m + 2) a(i, i - 3) = 0.0;
            }
            for (int k = m; k <= nn - 1; ++k) {
                if (k != m) {
                    p = a(k, k - 1);
                    q = a(k + 1, k - 1);
                    r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
                    x = std::abs(p) + std::abs(q) + std::abs(r);
                    if (x != 0.0) {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                double s = std::sqrt(p * p + q * q + r * r);
                if (p < 0) s = -s;
                if (s == 0.0) continue;
                if (k == m) {
                    if (l != m) a(k, k - 1) = -a(k, k - 1);
                } else {
                    a(k, k - 1) = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;
                for (int j = k; j <= nn; ++j) {
                    double pp = a(k, j) + q * a(k + 1, j);
                    if (k != nn - 1) {
                        pp += r * a(k + 2, j);
                        a(k + 2, j) -= pp * z;
                    }
                    a(k + 1, j) -= pp * y;
                    a(k, j) -= pp * x;
                }
                const int mmin = std::min(nn, k + 3);
                for (int i = l; i <= mmin; ++i) {
                    double pp = x * a(i, k) + y * a(i, k + 1);
                    if (k != nn - 1) {
                        pp += z * a(i, k + 2);
                        a(i, k + 2) -= pp * r;
                    }
                    a(i, k + 1) -= pp * q;
                    a(i, k) -= pp;
                }
            }
        }
    }
    return eig;
}

} // namespace detail

/// All eigenvalues (with multiplicity) of a real square matrix.
/// Balancing + Hessenberg reduction + Francis double-shift QR.
inline std::vector<std::complex<double>> eigenvalues(const Matrix& m, int max_its_per_eig = 60) {
    if (m.rows() != m.cols()) throw DimensionMismatch("eigenvalues: matrix not square");
    if (!m.all_finite()) throw Error("eigenvalues: input has non-finite entries");
    const std::size_t n = m.rows();
    if (n == 0) return {};
    if (n == 1) return {{m(0, 0), 0.0}};
    Matrix a = m;
    detail::balance(a);
    detail::hessenberg(a);
    return detail::hqr(a, max_its_per_eig);
}

/// max over eigenvalues of Re(lambda); negative iff Hurwitz.
inline double spectral_abscissa(const Matrix& m) {
    double s = -std::numeric_limits<double>::infinity();
    for (const auto& z : eigenvalues(m)) s = std::max(s, z.real());
    return s;
}

inline double spectral_radius(const Matrix& m) {
    double s = 0.0;
    for (const auto& z : eigenvalues(m)) s = std::max(s, std::abs(z));
    return s;
}

/// True iff every eigenvalue satisfies Re(lambda) < -margin.
inline bool is_hurwitz(const Matrix& m, double margin = 0.0) {
    if (m.rows() == 0) return true;
    return spectral_abscissa(m) < -margin;
}

} // namespace parreg
