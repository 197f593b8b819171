#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "parreg/linalg.hpp"

using namespace parreg;
using Catch::Approx;
using cplx = std::complex<double>;

namespace {
// Eq.-(45)/(46)-style fixtures reused across suites.
const Matrix kPhiMotor = Matrix::from_rows({{0, 1, 0}, {0, 0, 1}, {0, -1, 0}});
const Matrix kMMotor = Matrix::from_rows({{0, 1, 0}, {0, 0, 1}, {-8, -12, -6}});
const Matrix kNMotor = Matrix::from_rows({{0}, {0}, {1}});
const Matrix kPsiMotor = Matrix::from_rows({{1, 0, 0}});
} // namespace

TEST_CASE("sylvester: motor-example internal model matches the printed matrix") {
    // T Phi - M T = N Psi  ->  solve_sylvester(A=M, B=Phi, C=N Psi)
    Matrix t = solve_sylvester(kMMotor, kPhiMotor, kNMotor * kPsiMotor);
    REQUIRE(t(0, 0) == Approx(0.1250).margin(1e-3));
    REQUIRE(t(0, 1) == Approx(-0.0880).margin(1e-3));
    REQUIRE(t(0, 2) == Approx(0.1090).margin(1e-3));
    REQUIRE(t(1, 1) == Approx(0.0160).margin(1e-3));
    REQUIRE(sylvester_residual(kMMotor, kPhiMotor, kNMotor * kPsiMotor, t) < 1e-10);
}

TEST_CASE("sylvester: scalar identity case") {
    Matrix a(1, 1, 0.0), b(1, 1, 1.0), c(1, 1, 3.25);
    Matrix x = solve_sylvester(a, b, c);
    REQUIRE(x(0, 0) == Approx(3.25));
}

TEST_CASE("sylvester: random instances match brute-force kronecker oracle") {
    oracles::Rng rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a = oracles::random_hurwitz(rng, 3);          // eigs in left half plane
        Matrix b = -1.0 * oracles::random_hurwitz(rng, 2);   // eigs in right half plane
        Matrix c = oracles::random_matrix(rng, 3, 2);
        Matrix x = solve_sylvester(a, b, c);
        Matrix xo = oracles::sylvester_bruteforce(a, b, c);
        REQUIRE((x - xo).max_abs() < 1e-12 * (1.0 + xo.max_abs()));
        REQUIRE(sylvester_residual(a, b, c, x) <= 1e-10 * (1.0 + c.norm_fro()));
    }
}

TEST_CASE("sylvester: overlapping spectra are rejected") {
    Matrix a = Matrix::from_rows({{1, 0}, {0, -3}});
    Matrix b = Matrix::from_rows({{1}});
    REQUIRE_THROWS_AS(solve_sylvester(a, b, Matrix(2, 1, 1.0)), SpectraOverlap);
}

TEST_CASE("sylvester: empty dimensions yield empty solutions") {
    Matrix x = solve_sylvester(Matrix(0, 0), Matrix::identity(2), Matrix(0, 2));
    REQUIRE(x.rows() == 0);
    REQUIRE(x.cols() == 2);
}

TEST_CASE("lyapunov: scalar case") {
    Matrix p = solve_lyapunov(Matrix(1, 1, -1.0));
    REQUIRE(p(0, 0) == Approx(0.5));
}

TEST_CASE("lyapunov: motor-example matrix gives SPD solution with tight residual") {
    Matrix p = solve_lyapunov(kMMotor);
    REQUIRE(lyapunov_residual(kMMotor, p) < 1e-10);
    REQUIRE((p - p.transpose()).max_abs() < 1e-10);
    for (const auto& z : eigenvalues(p)) REQUIRE(z.real() > 0.0);
}

TEST_CASE("lyapunov: rejects non-Hurwitz input") {
    REQUIRE_THROWS_AS(solve_lyapunov(Matrix::from_rows({{0, 1}, {-1, 0}})), NotHurwitz);
    REQUIRE_THROWS_AS(solve_lyapunov(Matrix::identity(2)), NotHurwitz);
}

TEST_CASE("lyapunov property: symmetric and positive along random directions") {
    oracles::Rng rng(555);
    Matrix m = oracles::random_hurwitz(rng, 5);
    Matrix p = solve_lyapunov(m);
    REQUIRE((p - p.transpose()).max_abs() < 1e-10);
    for (int k = 0; k < 100; ++k) {
        Matrix x = oracles::random_matrix(rng, 5, 1);
        const double nrm = x.norm_fro();
        x *= 1.0 / nrm;
        const Matrix quad = x.transpose() * p * x;
        REQUIRE(quad(0, 0) > 0.0);
    }
    REQUIRE(lyapunov_residual(m, p) <= 1e-10);
}

TEST_CASE("minimal polynomial of the motor exosystem is s^3 + s") {
    Matrix s = Matrix::from_rows({{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}});
    PolyCoeffs p = minimal_polynomial(s);
    REQUIRE(p.degree() == 3);
    REQUIRE(p.coeffs[0] == Approx(0.0).margin(1e-10));
    REQUIRE(p.coeffs[1] == Approx(1.0).margin(1e-10));
    REQUIRE(p.coeffs[2] == Approx(0.0).margin(1e-10));
}

TEST_CASE("minimal polynomial trivial and degenerate cases") {
    // 1x1 zero matrix -> p = lambda
    PolyCoeffs p0 = minimal_polynomial(Matrix(1, 1, 0.0));
    REQUIRE(p0.degree() == 1);
    REQUIRE(p0.coeffs[0] == Approx(0.0).margin(1e-12));

    // diag(2,2) -> p = lambda - 2 (degree 1 < q)
    Matrix d = 2.0 * Matrix::identity(2);
    PolyCoeffs p1 = minimal_polynomial(d);
    REQUIRE(p1.degree() == 1);
    REQUIRE(p1.coeffs[0] == Approx(-2.0).margin(1e-10));
    REQUIRE(p1.eval(d).max_abs() < 1e-10);
}

TEST_CASE("minimal polynomial annihilates S and divides the characteristic polynomial") {
    oracles::Rng rng(909);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t q = 1 + rng.integer(5);
        Matrix s = oracles::random_matrix(rng, q, q, -1.5, 1.5);
        PolyCoeffs p = minimal_polynomial(s);
        const double snorm = s.norm_fro();
        double scale = 1.0;
        for (std::size_t k = 0; k < p.degree(); ++k) scale *= std::max(snorm, 1.0);
        REQUIRE(p.eval(s).norm_fro() <= 1e-8 * scale);

        // divisibility: remainder of char poly / minimal poly ~ 0
        auto cp = oracles::char_poly(s);
        auto mp = p.coeffs;
        mp.push_back(1.0); // explicit leading coefficient for the oracle routine
        auto rem = oracles::poly_mod(cp, mp);
        for (double r : rem) REQUIRE(std::abs(r) < 1e-6);
    }
}

TEST_CASE("companion pair layouts") {
    // p = x^3 + x
    PolyCoeffs p{{0.0, 1.0, 0.0}};
    auto cp = companion_pair(p);
    REQUIRE(cp.phi.rows() == 3);
    REQUIRE(cp.phi(0, 1) == 1.0);
    REQUIRE(cp.phi(1, 2) == 1.0);
    REQUIRE(cp.phi(2, 0) == Approx(0.0));
    REQUIRE(cp.phi(2, 1) == Approx(-1.0));
    REQUIRE(cp.phi(2, 2) == Approx(0.0));
    REQUIRE(cp.psi(0, 0) == 1.0);
    REQUIRE(cp.psi(0, 1) == 0.0);

    // p = x^2 + 1
    auto cp2 = companion_pair(PolyCoeffs{{1.0, 0.0}});
    REQUIRE(cp2.phi(0, 1) == 1.0);
    REQUIRE(cp2.phi(1, 0) == -1.0);
    REQUIRE(cp2.phi(1, 1) == 0.0);

    // p = x (l = 1)
    auto cp1 = companion_pair(PolyCoeffs{{0.0}});
    REQUIRE(cp1.phi.rows() == 1);
    REQUIRE(cp1.phi(0, 0) == 0.0);
    REQUIRE(cp1.psi(0, 0) == 1.0);
}

TEST_CASE("companion eigenvalues are the polynomial roots") {
    oracles::Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t l = 1 + rng.integer(5);
        PolyCoeffs p;
        for (std::size_t k = 0; k < l; ++k) p.coeffs.push_back(rng.uniform(-2, 2));
        auto cp = companion_pair(p);
        for (const auto& z : eigenvalues(cp.phi)) {
            // evaluate p at the eigenvalue; compare to local polynomial scale
            double scale = 1.0, azp = 1.0;
            for (std::size_t k = 0; k < l; ++k) {
                scale += std::abs(p.coeffs[k]) * azp;
                azp *= std::abs(z);
            }
            scale += azp;
            REQUIRE(std::abs(p.eval(z)) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("controllability of companion pairs and an uncontrollable example") {
    REQUIRE(is_controllable(kMMotor, kNMotor));
    // b aligned with an invariant subspace -> uncontrollable
    Matrix a = Matrix::from_rows({{1, 0}, {0, 2}});
    Matrix b = Matrix::from_rows({{1}, {0}});
    REQUIRE_FALSE(is_controllable(a, b));
}

TEST_CASE("stable polynomial test") {
    REQUIRE(is_stable_poly(PolyCoeffs{{1.0}}));           // x + 1
    REQUIRE(is_stable_poly(PolyCoeffs{{4.0, 4.0}}));      // (x+2)^2
    REQUIRE_FALSE(is_stable_poly(PolyCoeffs{{-1.0}}));    // x - 1
    REQUIRE_FALSE(is_stable_poly(PolyCoeffs{{1.0, 0.0}})); // x^2 + 1 marginal
    REQUIRE(is_stable_poly(PolyCoeffs{{}}));              // degree 0, vacuous
}
