#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "parreg/eigen.hpp"

using namespace parreg;
using Catch::Approx;
using cplx = std::complex<double>;

TEST_CASE("eigenvalues of the motor-example internal-model matrix are {-2,-2,-2}") {
    // companion of (x+2)^3 = x^3 + 6x^2 + 12x + 8. A defective triple
    // eigenvalue is conditioned like eps^(1/3) ~ 6e-6, so the tolerance here
    // is 1e-4 (LAPACK lands near 2e-5 on the same matrix).
    Matrix m = Matrix::from_rows({{0, 1, 0}, {0, 0, 1}, {-8, -12, -6}});
    auto eig = eigenvalues(m);
    REQUIRE(eig.size() == 3);
    REQUIRE(oracles::multiset_distance(eig, {cplx(-2), cplx(-2), cplx(-2)}) < 1e-4);
}

TEST_CASE("eigenvalues: identity and rotation generator") {
    auto eig_id = eigenvalues(Matrix::identity(3));
    REQUIRE(oracles::multiset_distance(eig_id, {cplx(1), cplx(1), cplx(1)}) < 1e-12);

    Matrix rot = Matrix::from_rows({{0, 1}, {-1, 0}});
    auto eig_rot = eigenvalues(rot);
    REQUIRE(oracles::multiset_distance(eig_rot, {cplx(0, 1), cplx(0, -1)}) < 1e-12);
}

TEST_CASE("eigenvalues agree with characteristic polynomial roots (frozen cases)") {
    // p(x) = x^3 + x  has roots {0, +i, -i}
    Matrix s = Matrix::from_rows({{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}});
    REQUIRE(oracles::multiset_distance(eigenvalues(s), {cplx(0), cplx(0, 1), cplx(0, -1)}) < 1e-10);

    // frozen 4x4 with known spectrum {1, 2, 3 +/- 2i}: companion of
    // (x-1)(x-2)(x^2-6x+13) = x^4 - 9x^3 + 33x^2 - 65x + 26... hand-expanded:
    // (x^2-3x+2)(x^2-6x+13) = x^4 -9x^3 +33x^2 -51x + 26
    Matrix c(4, 4);
    c(0, 1) = c(1, 2) = c(2, 3) = 1.0;
    c(3, 0) = -26.0;
    c(3, 1) = 51.0;
    c(3, 2) = -33.0;
    c(3, 3) = 9.0;
    REQUIRE(oracles::multiset_distance(eigenvalues(c),
                                       {cplx(1), cplx(2), cplx(3, 2), cplx(3, -2)}) < 1e-8);
}

TEST_CASE("eigenvalue sum and product match trace and determinant-style invariants") {
    oracles::Rng rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + rng.integer(8);
        Matrix a = oracles::random_matrix(rng, n, n, -2.0, 2.0);
        auto eig = eigenvalues(a);
        cplx sum = 0.0;
        for (auto z : eig) sum += z;
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += a(i, i);
        REQUIRE(sum.real() == Approx(tr).margin(1e-8 * (1 + std::abs(tr))));
        REQUIRE(std::abs(sum.imag()) < 1e-8);

        // every eigenvalue must be a root of the characteristic polynomial
        const auto cp = oracles::char_poly(a);
        for (auto z : eig) {
            cplx v = 0.0, xp = 1.0;
            for (double ck : cp) {
                v += ck * xp;
                xp *= z;
            }
            // |p(z)| small relative to polynomial scale at |z|
            double scale = 0.0;
            double az = std::abs(z), azp = 1.0;
            for (double ck : cp) {
                scale += std::abs(ck) * azp;
                azp *= az;
            }
            REQUIRE(std::abs(v) <= 1e-7 * (1.0 + scale));
        }
    }
}

TEST_CASE("eigenvalues are similarity-invariant") {
    oracles::Rng rng(77);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = 2 + rng.integer(6);
        Matrix a = oracles::random_matrix(rng, n, n, -2.0, 2.0);
        Matrix t = oracles::random_matrix(rng, n, n) + 3.0 * Matrix::identity(n);
        Matrix sim = lu_solve(t, a * t); // t^{-1} a t
        REQUIRE(oracles::multiset_distance(eigenvalues(a), eigenvalues(sim)) < 1e-6);
    }
}

TEST_CASE("is_hurwitz on the named cases") {
    Matrix m = Matrix::from_rows({{0, 1, 0}, {0, 0, 1}, {-8, -12, -6}});
    REQUIRE(is_hurwitz(m));
    REQUIRE_FALSE(is_hurwitz(Matrix::identity(2)));
    // purely imaginary spectrum is not Hurwitz
    REQUIRE_FALSE(is_hurwitz(Matrix::from_rows({{0, 1}, {-1, 0}})));
    // margin: abscissa -2 passes margin 1 but not margin 3
    REQUIRE(is_hurwitz(m, 1.0));
    REQUIRE_FALSE(is_hurwitz(m, 3.0));
    // empty matrix is vacuously Hurwitz (no unstable mode exists)
    REQUIRE(is_hurwitz(Matrix(0, 0)));
}

TEST_CASE("random Hurwitz construction is recognized as Hurwitz") {
    oracles::Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix h = oracles::random_hurwitz(rng, 2 + rng.integer(6));
        REQUIRE(is_hurwitz(h));
        REQUIRE(spectral_abscissa(h) < -0.4);
    }
}

TEST_CASE("upper triangular eigenvalues are the diagonal") {
    Matrix u = Matrix::from_rows({{3, 5, -1}, {0, -4, 2}, {0, 0, 7}});
    REQUIRE(oracles::multiset_distance(eigenvalues(u), {cplx(3), cplx(-4), cplx(7)}) < 1e-9);
}

TEST_CASE("spectral radius of scaled rotation") {
    Matrix rot = Matrix::from_rows({{0, 5}, {-5, 0}});
    REQUIRE(spectral_radius(rot) == Approx(5.0));
}
