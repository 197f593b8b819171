#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "parreg/eigen.hpp"
#include "parreg/models.hpp"
#include "parreg/regulator.hpp"

namespace parreg {

// ---------------------------------------------------------------------------
// Closed-loop matrix assembly.
//
// Multi-actuator regulation reduces to the single-actuator loop through the
// sum dynamics, with effective gains k1 = N kbar1, k2 = kbar2, h = hbar.
// The assemblies below therefore always work with those effective values;
// a single-actuator GainSet carries kbar = k so nothing changes for N = 1.
// ---------------------------------------------------------------------------

namespace detail {

struct CoefficientBlock {
    // transcription of the coefficient definitions that follow the second
    // coordinate change (zeta_1, zeta_2, eta~ variables)
    Matrix C;        // 1 x (r-1)
    double tilde_c;  // coefficient of zeta_1 in zeta_1'
    Matrix check_A3; // l x (n-r)
    Matrix check_C1; // l x (r-1)
    Matrix check_C2; // l x 1
    Matrix bar_A3;   // 1 x (n-r)
    Matrix bar_C1;   // 1 x (r-1)
    double bar_c1;
    Matrix bar_C2; // 1 x l
    double bar_c2;
    Matrix hat_A3; // l x (n-r)
    Matrix hat_C1; // l x (r-1)
    Matrix hat_C2; // l x 1
    Matrix hat_C3; // l x l
    Matrix hat_C4; // l x 1
    Matrix Lambda; // (r-1) x (r-1) companion of f
    Matrix G;      // (r-1) x 1
    Matrix D;      // 1 x (r-1)
};

inline double scalar(const Matrix& m) { return m(0, 0); }

inline CoefficientBlock coefficient_block(const PlantMatrices& pm, const ActuatorBank& act,
                                          const InternalModel& im, const GainSet& gains,
                                          double k1) {
    const std::size_t r = pm.c.size();
    const std::size_t l = im.l;
    const double b = pm.b, ba = act.b_a, a = act.a;
    const double cr = pm.c[r - 1];
    const double gtop = gains.gamma_top();
    const Matrix il = Matrix::identity(l);
    const double psi1n1 = scalar(im.psiT1inv * im.N1);
    const double psi2n2 = scalar(im.psiT2inv * im.N2);

    CoefficientBlock cb;
    cb.C = Matrix(1, r - 1);
    for (std::size_t s = 1; s + 1 <= r && s <= r - 1; ++s) {
        // 1-based coefficient index s over the first r-1 chain states
        double v = pm.c[s - 1] - (cr + gtop) * gains.gammas[s - 1];
        if (s >= 2) v += gains.gammas[s - 2];
        cb.C(0, s - 1) = v;
    }
    cb.tilde_c = cr + gtop - k1 * b + psi1n1;
    cb.check_A3 = (-1.0 / b) * (im.N1 * pm.A3);
    cb.check_C1 = (-1.0 / b) * (im.N1 * cb.C);
    cb.check_C2 = (1.0 / b) * (im.M1 * im.N1 - (cr + gtop) * im.N1);
    cb.bar_A3 = k1 * pm.A3;
    cb.bar_C1 = k1 * cb.C;
    cb.bar_c1 = k1 * (cb.tilde_c - a + psi1n1) +
                (1.0 / b) * scalar(im.psiT1inv * (a * il - im.M1 - im.N1 * im.psiT1inv) * im.N1);
    cb.bar_C2 = im.psiT1inv * ((a + k1 * b) * il - im.M1 - im.N1 * im.psiT1inv);
    cb.bar_c2 = a - psi1n1 + psi2n2 + k1 * b;
    cb.hat_A3 = (-1.0 / ba) * (im.N2 * cb.bar_A3);
    cb.hat_C1 = (-1.0 / ba) * (im.N2 * cb.bar_C1);
    cb.hat_C2 = (-cb.bar_c1 / ba) * im.N2;
    cb.hat_C3 = (-1.0 / ba) * (im.N2 * cb.bar_C2);
    cb.hat_C4 = (1.0 / ba) * ((im.M2 + im.N2 * im.psiT2inv) * im.N2 - cb.bar_c2 * im.N2);

    cb.Lambda = Matrix(r - 1, r - 1);
    for (std::size_t i = 0; i + 2 < r; ++i) cb.Lambda(i, i + 1) = 1.0;
    for (std::size_t j = 0; j + 1 < r; ++j) cb.Lambda(r - 2, j) = -gains.gammas[j];
    cb.G = Matrix(r - 1, 1);
    if (r >= 2) cb.G(r - 2, 0) = 1.0;
    cb.D = Matrix(1, r - 1);
    if (r >= 2) cb.D(0, 0) = 1.0;
    return cb;
}

} // namespace detail

/// State-feedback closed-loop matrix in the transformed coordinates
/// col(xi_bar, z_bar, eta1~, zeta_1, eta2~, zeta_2); square of dimension
/// (r-1) + (n-r) + l + 1 + l + 1.
inline Matrix assemble_abar(const UncertainPlant& plant, const ActuatorBank& act,
                            const InternalModel& im, const GainSet& gains,
                            std::span<const double> w) {
    const PlantMatrices pm = realize_plant(plant, w);
    const std::size_t r = plant.r, nz = plant.zero_dynamics_dim(), l = im.l;
    const double k1 = static_cast<double>(gains.N) * gains.kbar1;
    const double k2 = gains.kbar2;
    const auto cb = detail::coefficient_block(pm, act, im, gains, k1);

    const std::size_t o_xi = 0, o_z = r - 1, o_e1 = o_z + nz, o_z1 = o_e1 + l, o_e2 = o_z1 + 1,
                      o_z2 = o_e2 + l;
    Matrix a(o_z2 + 1, o_z2 + 1);

    a.set_block(o_xi, o_xi, cb.Lambda);
    a.set_block(o_xi, o_z1, cb.G);

    if (nz) {
        // xi_bar_1 is the first chain coordinate for r >= 2; with r = 1 the
        // chain is empty and xi_bar_1 coincides with zeta_1
        if (r >= 2)
            a.set_block(o_z, o_xi, pm.A2 * cb.D);
        else
            a.set_block(o_z, o_z1, pm.A2);
        a.set_block(o_z, o_z, pm.A1);
    }

    a.set_block(o_e1, o_xi, cb.check_C1);
    if (nz) a.set_block(o_e1, o_z, cb.check_A3);
    a.set_block(o_e1, o_e1, im.M1);
    a.set_block(o_e1, o_z1, cb.check_C2);

    a.set_block(o_z1, o_xi, cb.C);
    if (nz) a.set_block(o_z1, o_z, pm.A3);
    a.set_block(o_z1, o_e1, pm.b * im.psiT1inv);
    a(o_z1, o_z1) = cb.tilde_c;
    a(o_z1, o_z2) = pm.b;

    a.set_block(o_e2, o_xi, cb.hat_C1);
    if (nz) a.set_block(o_e2, o_z, cb.hat_A3);
    a.set_block(o_e2, o_e1, cb.hat_C3);
    a.set_block(o_e2, o_z1, cb.hat_C2);
    a.set_block(o_e2, o_e2, im.M2);
    a.set_block(o_e2, o_z2, cb.hat_C4);

    a.set_block(o_z2, o_xi, cb.bar_C1);
    if (nz) a.set_block(o_z2, o_z, cb.bar_A3);
    a.set_block(o_z2, o_e1, cb.bar_C2);
    a(o_z2, o_z1) = cb.bar_c1;
    a.set_block(o_z2, o_e2, act.b_a * im.psiT2inv);
    a(o_z2, o_z2) = cb.bar_c2 - k2 * act.b_a;

    return a;
}

/// Output-feedback closed-loop matrix in coordinates
/// col(z_bar, xi_bar(r), x_bar, eta1_bar, eta2_bar, psi) with the scaled
/// observer error psi_s = h^{r-s} (e^{(s-1)} - varsigma_s); the psi block
/// carries h A0(1). Square of dimension (n + 1 + 2 l) + r.
inline Matrix assemble_output_feedback(const UncertainPlant& plant, const ActuatorBank& act,
                                       const InternalModel& im, const ObserverSpec& obs,
                                       const GainSet& gains, std::span<const double> w) {
    const PlantMatrices pm = realize_plant(plant, w);
    const std::size_t r = plant.r, nz = plant.zero_dynamics_dim(), l = im.l;
    const double k1 = static_cast<double>(gains.N) * gains.kbar1;
    const double k2 = gains.kbar2;
    const double h = gains.hbar;
    const double a_act = act.a, ba = act.b_a;
    const Matrix il = Matrix::identity(l);

    const Matrix gamma1 = gains.gamma_row(); // 1 x r
    // Gamma_1 D_h^{-1}, D_h = diag(h^{r-1}, ..., 1)
    Matrix gamma_dh(1, r);
    for (std::size_t s = 0; s < r; ++s)
        gamma_dh(0, s) = gamma1(0, s) / std::pow(h, static_cast<double>(r - 1 - s));

    const std::size_t o_z = 0, o_xi = nz, o_x = o_xi + r, o_e1 = o_x + 1, o_e2 = o_e1 + l,
                      o_psi = o_e2 + l;
    Matrix m(o_psi + r, o_psi + r);

    // z_bar' = A1 z_bar + A2 xi_bar_1
    if (nz) {
        m.set_block(o_z, o_z, pm.A1);
        m.set_block(o_z, o_xi, pm.A2); // A2 is (n-r) x 1, lands on xi_bar_1
    }

    // xi_bar' chain, last row A3 z + c xi + b x_bar + b psi1 eta1_bar
    for (std::size_t s = 0; s + 1 < r; ++s) m(o_xi + s, o_xi + s + 1) = 1.0;
    if (nz) m.set_block(o_xi + r - 1, o_z, pm.A3);
    for (std::size_t s = 0; s < r; ++s) m(o_xi + r - 1, o_xi + s) = pm.c[s];
    m(o_xi + r - 1, o_x) = pm.b;
    m.set_block(o_xi + r - 1, o_e1, pm.b * im.psiT1inv);

    // x_bar' row
    const double c1s = a_act - ba * k2 - detail::scalar(im.psiT1inv * im.N1);
    const Matrix c2s = im.psiT1inv * (a_act * il - im.M1 - im.N1 * im.psiT1inv);
    m.set_block(o_x, o_xi, (-ba * k1 * k2) * gamma1);
    m(o_x, o_x) = c1s;
    m.set_block(o_x, o_e1, c2s);
    m.set_block(o_x, o_e2, ba * im.psiT2inv);
    m.set_block(o_x, o_psi, (ba * k1 * k2) * gamma_dh);

    // eta1_bar' = (M1 + N1 psi1) eta1_bar + N1 x_bar
    m.set_block(o_e1, o_x, im.N1);
    m.set_block(o_e1, o_e1, im.M1 + im.N1 * im.psiT1inv);

    // eta2_bar' = (M2 + N2 psi2) eta2_bar - k2 N2 x_bar - k1 k2 N2 Gamma1 xi_bar
    //             + k1 k2 N2 Gamma1 Dh^-1 psi
    m.set_block(o_e2, o_xi, (-k1 * k2) * (im.N2 * gamma1));
    m.set_block(o_e2, o_x, -k2 * im.N2);
    m.set_block(o_e2, o_e2, im.M2 + im.N2 * im.psiT2inv);
    m.set_block(o_e2, o_psi, (k1 * k2) * (im.N2 * gamma_dh));

    // psi' rows: zeros except the last, which carries xi_bar_r'; block h A0(1)
    if (nz) m.set_block(o_psi + r - 1, o_z, pm.A3);
    for (std::size_t s = 0; s < r; ++s) m(o_psi + r - 1, o_xi + s) = pm.c[s];
    m(o_psi + r - 1, o_x) = pm.b;
    m.set_block(o_psi + r - 1, o_e1, pm.b * im.psiT1inv);
    m.set_block(o_psi, o_psi, h * observer_a0(obs.deltas, 1.0));

    return m;
}

/// Input-sharing analysis matrix A - lambda_i J for one nonzero Laplacian
/// eigenvalue; (2l+1) x (2l+1) acting on col(x_i, eta1_i, eta2_i) deviations.
inline Matrix assemble_sharing_matrix(const ActuatorBank& act, const InternalModel& im,
                                      const GainSet& gains, double lambda_i) {
    if (lambda_i <= 0.0)
        throw NonPositiveEigenvalue("sharing matrix needs a positive Laplacian eigenvalue, got " +
                                    std::to_string(lambda_i));
    const std::size_t l = im.l;
    const double kb2 = gains.kbar2;
    Matrix a(2 * l + 1, 2 * l + 1);
    a(0, 0) = act.a - act.b_a * kb2;
    a.set_block(0, 1, act.b_a * kb2 * im.psiT1inv);
    a.set_block(0, 1 + l, act.b_a * im.psiT2inv);
    a.set_block(1, 0, im.N1);
    a.set_block(1, 1, im.M1);
    a.set_block(1 + l, 0, -kb2 * im.N2);
    a.set_block(1 + l, 1, kb2 * (im.N2 * im.psiT1inv));
    a.set_block(1 + l, 1 + l, im.M2 + im.N2 * im.psiT2inv);
    // subtract lambda_i J, J = blockdiag(0, sigma1 I, sigma2 I)
    for (std::size_t k = 0; k < l; ++k) {
        a(1 + k, 1 + k) -= lambda_i * gains.sigma1;
        a(1 + l + k, 1 + l + k) -= lambda_i * gains.sigma2;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Certification: numerical Hurwitz checks over the uncertainty box.
// ---------------------------------------------------------------------------

struct SamplingPolicy {
    enum class Mode { AllVertices, RandomVertices, Grid };
    Mode mode = Mode::AllVertices;
    std::size_t random_count = 8;   // RandomVertices: how many vertices to draw
    std::uint64_t seed = 1;         // RandomVertices: draw seed
    std::size_t grid_points = 3;    // Grid: points per coordinate
    bool include_center = true;

    std::string describe() const {
        std::ostringstream os;
        switch (mode) {
            case Mode::AllVertices: os << "all box vertices"; break;
            case Mode::RandomVertices:
                os << random_count << " random box vertices (seed " << seed << ")";
                break;
            case Mode::Grid: os << "uniform grid, " << grid_points << " points per coordinate"; break;
        }
        if (include_center) os << " plus center";
        return os.str();
    }

    std::vector<std::vector<double>> samples(const Box& box) const {
        std::vector<std::vector<double>> out;
        const std::size_t nw = box.dim();
        switch (mode) {
            case Mode::AllVertices:
                out = box.vertices();
                break;
            case Mode::RandomVertices: {
                std::mt19937_64 gen(seed);
                for (std::size_t k = 0; k < random_count; ++k)
                    out.push_back(box.vertex(gen() & (box.vertex_count() - 1)));
                break;
            }
            case Mode::Grid: {
                const std::size_t g = std::max<std::size_t>(grid_points, 2);
                std::size_t total = 1;
                for (std::size_t i = 0; i < nw; ++i) {
                    total *= g;
                    if (total > 100000) throw Error("certification grid too large");
                }
                for (std::size_t k = 0; k < total; ++k) {
                    std::vector<double> w(nw);
                    std::size_t idx = k;
                    for (std::size_t i = 0; i < nw; ++i) {
                        const std::size_t step = idx % g;
                        idx /= g;
                        w[i] = box.lo[i] +
                               (box.hi[i] - box.lo[i]) * static_cast<double>(step) /
                                   static_cast<double>(g - 1);
                    }
                    out.push_back(std::move(w));
                }
                break;
            }
        }
        if (include_center) out.push_back(box.center());
        return out;
    }
};

struct CertificationRecord {
    std::string matrix_name;
    std::string parameter; // w sample or Laplacian eigenvalue, printed
    double value = 0.0;    // spectral abscissa (or margin quantity)
    bool pass = false;
};

struct CertificationReport {
    std::vector<CertificationRecord> records;
    bool pass = true;
    double margin = 1e-6;
    std::string sampling;

    void add(CertificationRecord rec) {
        pass = pass && rec.pass;
        records.push_back(std::move(rec));
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "# certification report\n";
        os << "# sampling: " << sampling << "\n";
        os << "# hurwitz margin: " << margin << "\n";
        for (const auto& r : records)
            os << (r.pass ? "PASS" : "FAIL") << "  " << r.matrix_name << "  " << r.parameter
               << "  abscissa=" << r.value << "\n";
        os << (pass ? "VERDICT pass\n" : "VERDICT fail\n");
        return os.str();
    }
};

/// Spectral certification of a gain choice:
///  - kbar2 > a / b_a (sharing-design precondition),
///  - output-feedback closed loop Hurwitz at every w sample (through the
///    sum-dynamics reduction for N > 1),
///  - A - lambda_i J Hurwitz at every nonzero Laplacian eigenvalue.
inline CertificationReport certify(const UncertainPlant& plant, const Exosystem& exo,
                                   const ActuatorBank& act, const Graph& graph,
                                   const InternalModel& im, const ObserverSpec& obs,
                                   const GainSet& gains,
                                   const SamplingPolicy& sampling = {},
                                   double hurwitz_margin = 1e-6) {
    (void)exo;
    CertificationReport rep;
    rep.margin = hurwitz_margin;
    rep.sampling = sampling.describe();

    {
        const double lhs = gains.kbar2, rhs = act.a / act.b_a;
        rep.add({"kbar2 - a/b_a", "precondition", lhs - rhs, lhs > rhs});
    }

    for (const auto& w : sampling.samples(plant.W)) {
        double absc;
        bool ok;
        std::string note;
        try {
            const Matrix m = assemble_output_feedback(plant, act, im, obs, gains, w);
            absc = spectral_abscissa(m);
            ok = absc < -hurwitz_margin;
        } catch (const Error& err) {
            absc = std::numeric_limits<double>::quiet_NaN();
            ok = false;
            note = err.what();
        }
        rep.add({"output_feedback_closed_loop",
                 "w=" + Matrix::row_vector(w).to_string() + (note.empty() ? "" : " " + note), absc,
                 ok});
    }

    if (act.N > 1) {
        for (double lam : nonzero_laplacian_eigenvalues(graph)) {
            const Matrix m = assemble_sharing_matrix(act, im, gains, lam);
            const double absc = spectral_abscissa(m);
            rep.add({"sharing_matrix", "lambda=" + std::to_string(lam), absc,
                     absc < -hurwitz_margin});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Composite-system stabilization bound (small-gain style Lyapunov estimate).
// ---------------------------------------------------------------------------

/// For the block system [[M1(w,mu1), N1], [N2, N3 + mu2 M2]] with
/// ||N_i|| <= phi_i, returns
///   max_w { 2 phi3 ||Q|| + 4 (phi1^2 ||P(w)||^2 + phi2^2 ||Q||^2) }
/// with M1^T P + P M1 = -I and M2^T Q + Q M2 = -I. Any mu2 above the
/// returned value makes the composite Hurwitz at the sampled w.
inline double bound_phi(const std::function<Matrix(std::span<const double>, double)>& m1_of_w,
                        const Matrix& m2, double phi1, double phi2, double phi3, double mu1,
                        const std::vector<std::vector<double>>& w_samples) {
    const Matrix q = solve_lyapunov(m2);
    const double qn = spectral_norm(q);
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> samples = w_samples;
    if (samples.empty()) samples.push_back({});
    for (const auto& w : samples) {
        const Matrix m1 = m1_of_w(w, mu1);
        const Matrix p = solve_lyapunov(m1); // throws NotHurwitz if violated
        const double pn = spectral_norm(p);
        bound = std::max(bound, 2.0 * phi3 * qn + 4.0 * (phi1 * phi1 * pn * pn + phi2 * phi2 * qn * qn));
    }
    return bound;
}

} // namespace parreg
