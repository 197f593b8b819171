#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "parreg/linalg.hpp"
#include "parreg/matrix.hpp"
#include "parreg/models.hpp"

namespace parreg {

// ---------------------------------------------------------------------------
// Regulator equations: the steady state at which the regulated error is zero.
// ---------------------------------------------------------------------------

struct SteadyState {
    Matrix Z;  // (n-r) x q   zero-dynamics steady state
    Matrix Pi; // r x q       rows F S^{s-1}
    Matrix Xi; // 1 x q       actuator-sum steady state
    Matrix U;  // 1 x q       steady-state input
    std::vector<double> w;
};

/// Solve Z S = A1 Z + A2 F + E0 for Z, then form Pi, Xi, U.
inline SteadyState solve_regulator_equations(const UncertainPlant& plant, const Exosystem& exo,
                                             std::span<const double> w,
                                             const ActuatorBank& actuator) {
    const PlantMatrices pm = realize_plant(plant, w);
    const std::size_t nz = plant.zero_dynamics_dim(), r = plant.r, q = exo.q();

    SteadyState ss;
    ss.w.assign(w.begin(), w.end());
    // Z S - A1 Z = A2 F + E0  ->  solve_sylvester(A = A1, B = S, C = A2 F + E0)
    ss.Z = nz ? solve_sylvester(pm.A1, exo.S, pm.A2 * pm.F + pm.E0) : Matrix(0, q);

    ss.Pi = Matrix(r, q);
    Matrix fsk = pm.F; // F S^{s-1}
    for (std::size_t s = 0; s < r; ++s) {
        ss.Pi.set_block(s, 0, fsk);
        fsk = fsk * exo.S;
    }
    // after the loop fsk = F S^r
    Matrix num = fsk;
    if (nz) num -= pm.A3 * ss.Z;
    Matrix fsj = pm.F;
    for (std::size_t s = 0; s < r; ++s) {
        num -= pm.c[s] * fsj;
        fsj = fsj * exo.S;
    }
    num -= pm.Er;
    ss.Xi = (1.0 / pm.b) * num;
    ss.U = (1.0 / actuator.b_a) * (ss.Xi * exo.S - actuator.a * ss.Xi);
    return ss;
}

// ---------------------------------------------------------------------------
// Internal model: two observer-form copies of the exosystem modes.
// ---------------------------------------------------------------------------

struct InternalModel {
    Matrix M1, N1, M2, N2; // chosen controllable pairs, M_i Hurwitz, l x l and l x 1
    Matrix T1, T2;         // Sylvester solutions T_i Phi - M_i T_i = N_i Psi
    Matrix psiT1inv, psiT2inv; // 1 x l rows Psi T_i^{-1}
    Matrix Phi, Psi;       // companion realization of the minimal polynomial
    std::size_t l = 0;
};

inline InternalModel build_internal_model(const Exosystem& exo, Matrix m1, Matrix n1, Matrix m2,
                                          Matrix n2, double cond_limit = 1e8) {
    const std::size_t l = exo.l;
    const auto cp = companion_pair(exo.p);

    auto check_pair = [&](const Matrix& m, const Matrix& n, const char* which) {
        if (m.rows() != l || m.cols() != l || n.rows() != l || n.cols() != 1)
            throw DimensionMismatch(std::string("internal model pair ") + which +
                                    " has wrong dimensions for l = " + std::to_string(l));
        if (!is_hurwitz(m, 1e-9))
            throw NotHurwitz(std::string("internal model matrix ") + which + " is not Hurwitz");
        if (!is_controllable(m, n))
            throw NotControllable(std::string("internal model pair ") + which +
                                  " is not controllable");
    };
    check_pair(m1, n1, "(M1,N1)");
    check_pair(m2, n2, "(M2,N2)");

    InternalModel im;
    im.l = l;
    im.Phi = cp.phi;
    im.Psi = cp.psi;
    im.T1 = solve_sylvester(m1, cp.phi, n1 * cp.psi);
    im.T2 = solve_sylvester(m2, cp.phi, n2 * cp.psi);
    for (const auto* t : {&im.T1, &im.T2}) {
        if (cond2(*t) >= cond_limit)
            throw IllConditioned("internal model transformation T is ill conditioned");
    }
    // Psi T^{-1} as the solution row of T^T x = Psi^T
    im.psiT1inv = lu_solve(im.T1.transpose(), cp.psi.transpose()).transpose();
    im.psiT2inv = lu_solve(im.T2.transpose(), cp.psi.transpose()).transpose();
    im.M1 = std::move(m1);
    im.N1 = std::move(n1);
    im.M2 = std::move(m2);
    im.N2 = std::move(n2);
    return im;
}

/// Steady-state internal-model trajectories Theta_i(w, v) = T_i col(X, XS, ...) v,
/// used to seed exact-steady-state simulations.
inline Matrix steady_state_generator(const Matrix& t, const Matrix& row, const Matrix& s) {
    const std::size_t l = t.rows(), q = s.rows();
    Matrix stack(l, q);
    Matrix cur = row;
    for (std::size_t k = 0; k < l; ++k) {
        stack.set_block(k, 0, cur);
        cur = cur * s;
    }
    return t * stack; // l x q; Theta(w, v) = (this) * v
}

// ---------------------------------------------------------------------------
// High-gain observer
// ---------------------------------------------------------------------------

struct ObserverSpec {
    std::vector<double> deltas; // delta_0 .. delta_{r-1}
    double h = 1.0;
    std::size_t r = 0;
    Matrix A0; // r x r
    Matrix B0; // r x 1
};

inline Matrix observer_a0(std::span<const double> deltas, double h) {
    const std::size_t r = deltas.size();
    Matrix a0(r, r);
    double hp = 1.0;
    for (std::size_t s = 1; s <= r; ++s) {
        hp *= h;
        a0(s - 1, 0) = -hp * deltas[r - s];
        if (s < r) a0(s - 1, s) = 1.0;
    }
    return a0;
}

inline Matrix observer_b0(std::span<const double> deltas, double h) {
    const std::size_t r = deltas.size();
    Matrix b0(r, 1);
    double hp = 1.0;
    for (std::size_t s = 1; s <= r; ++s) {
        hp *= h;
        b0(s - 1, 0) = hp * deltas[r - s];
    }
    return b0;
}

/// Observer with poles at h times the roots of
/// g(lambda) = lambda^r + delta_{r-1} lambda^{r-1} + ... + delta_0.
inline ObserverSpec build_observer(std::vector<double> deltas, double h, std::size_t r) {
    if (deltas.size() != r) throw DimensionMismatch("observer needs r delta coefficients");
    if (h <= 0.0) throw Error("observer gain h must be positive");
    PolyCoeffs g{deltas};
    if (!is_stable_poly(g))
        throw UnstableObserverPolynomial("observer polynomial g(lambda) is not Hurwitz");
    ObserverSpec obs;
    obs.A0 = observer_a0(deltas, h);
    obs.B0 = observer_b0(deltas, h);
    obs.deltas = std::move(deltas);
    obs.h = h;
    obs.r = r;
    return obs;
}

// ---------------------------------------------------------------------------
// Gains
// ---------------------------------------------------------------------------

struct GainSet {
    std::vector<double> gammas; // gamma_0 .. gamma_{r-2}; empty when r = 1
    // single-actuator gains
    double k1 = 0.0, k2 = 0.0, h = 0.0;
    // distributed gains
    double kbar1 = 0.0, kbar2 = 0.0, hbar = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;
    std::size_t N = 1;

    // gamma_{r-2} when it exists; the r = 1 formulas use zero
    double gamma_top() const { return gammas.empty() ? 0.0 : gammas.back(); }

    // Gamma_1 = [gamma_0 ... gamma_{r-2} 1], 1 x r
    Matrix gamma_row() const {
        Matrix g(1, gammas.size() + 1);
        for (std::size_t i = 0; i < gammas.size(); ++i) g(0, i) = gammas[i];
        g(0, gammas.size()) = 1.0;
        return g;
    }

    void validate() const {
        for (double gv : gammas)
            if (gv <= 0.0) throw Error("gamma coefficients must be positive");
        if (!is_stable_poly(PolyCoeffs{gammas}))
            throw Error("gain polynomial f(lambda) is not Hurwitz");
        if (k1 < 0 || k2 < 0 || h < 0 || kbar1 < 0 || kbar2 < 0 || hbar < 0 || sigma1 < 0 ||
            sigma2 < 0)
            throw Error("gains must be nonnegative");
    }
};

/// Distributed gains from single-actuator ones: kbar1 = k1/N, kbar2 = k2,
/// hbar = h. A default, not a mandate; configs may override.
inline GainSet gains_from_single(double k1, double k2, double h, std::size_t N,
                                 std::vector<double> gammas = {}, double sigma1 = 1.0,
                                 double sigma2 = 1.0) {
    if (k1 <= 0 || k2 <= 0 || h <= 0) throw Error("single-actuator gains must be positive");
    if (N < 1) throw Error("actuator count must be at least 1");
    GainSet g;
    g.gammas = std::move(gammas);
    g.k1 = k1;
    g.k2 = k2;
    g.h = h;
    g.N = N;
    g.kbar1 = k1 / static_cast<double>(N);
    g.kbar2 = k2;
    g.hbar = h;
    g.sigma1 = sigma1;
    g.sigma2 = sigma2;
    return g;
}

// ---------------------------------------------------------------------------
// Runtime controller dynamics (the distributed law; N = 1 is the single law)
// ---------------------------------------------------------------------------

struct AgentState {
    std::vector<double> eta1, eta2, varsigma;
};

struct ControllerDerivatives {
    std::vector<double> u;        // one control per agent
    std::vector<AgentState> dstate;
};

/// Control outputs and compensator derivatives for all agents:
///   u_i      = Psi T2^-1 eta2_i - kbar2 (x_i - Psi T1^-1 eta1_i + kbar1 zhat1_i)
///   eta1_i'  = M1 eta1_i + N1 x_i + sigma1 sum_j a_ij (eta1_j - eta1_i)
///   eta2_i'  = M2 eta2_i + N2 u_i + sigma2 sum_j a_ij (eta2_j - eta2_i)
///   vs_i'    = A0(hbar) vs_i + B0(hbar) e
/// with zhat1_i = vs_{r,i} + sum_s gamma_s vs_{s+1,i}.
inline ControllerDerivatives controller_derivatives(const std::vector<AgentState>& agents,
                                                    std::span<const double> x, double e,
                                                    const InternalModel& im,
                                                    const ObserverSpec& obs, const GainSet& gains,
                                                    const Graph& graph) {
    const std::size_t N = agents.size();
    const std::size_t l = im.l, r = obs.r;
    if (x.size() != N || graph.N != N)
        throw DimensionMismatch("controller_derivatives: agent count mismatch");
    for (const auto& ag : agents)
        if (ag.eta1.size() != l || ag.eta2.size() != l || ag.varsigma.size() != r)
            throw DimensionMismatch("controller_derivatives: agent state dimensions");
    if (gains.gammas.size() + 1 != r)
        throw DimensionMismatch("controller_derivatives: gamma count must be r - 1");

    // The law always runs on the distributed gains; a single-actuator
    // configuration carries kbar1 = k1, kbar2 = k2 (identity mapping).
    const bool multi = N > 1;
    const double kb1 = gains.kbar1;
    const double kb2 = gains.kbar2;

    ControllerDerivatives out;
    out.u.resize(N);
    out.dstate.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const auto& ag = agents[i];
        double zhat1 = ag.varsigma[r - 1];
        for (std::size_t s = 0; s + 1 < r; ++s) zhat1 += gains.gammas[s] * ag.varsigma[s];

        double psi1eta1 = 0.0, psi2eta2 = 0.0;
        for (std::size_t k = 0; k < l; ++k) {
            psi1eta1 += im.psiT1inv(0, k) * ag.eta1[k];
            psi2eta2 += im.psiT2inv(0, k) * ag.eta2[k];
        }
        const double u_i = psi2eta2 - kb2 * (x[i] - psi1eta1 + kb1 * zhat1);
        out.u[i] = u_i;

        AgentState d;
        d.eta1.assign(l, 0.0);
        d.eta2.assign(l, 0.0);
        d.varsigma.assign(r, 0.0);
        for (std::size_t k = 0; k < l; ++k) {
            double s1 = im.N1(k, 0) * x[i];
            double s2 = im.N2(k, 0) * u_i;
            for (std::size_t j = 0; j < l; ++j) {
                s1 += im.M1(k, j) * ag.eta1[j];
                s2 += im.M2(k, j) * ag.eta2[j];
            }
            d.eta1[k] = s1;
            d.eta2[k] = s2;
        }
        if (multi) {
            for (std::size_t j = 0; j < N; ++j) {
                const double aij = graph.weights(i, j);
                if (aij == 0.0) continue;
                for (std::size_t k = 0; k < l; ++k) {
                    d.eta1[k] += gains.sigma1 * aij * (agents[j].eta1[k] - ag.eta1[k]);
                    d.eta2[k] += gains.sigma2 * aij * (agents[j].eta2[k] - ag.eta2[k]);
                }
            }
        }
        for (std::size_t k = 0; k < r; ++k) {
            double s = obs.B0(k, 0) * e;
            for (std::size_t j = 0; j < r; ++j) s += obs.A0(k, j) * ag.varsigma[j];
            d.varsigma[k] = s;
        }
        out.dstate[i] = std::move(d);
    }
    return out;
}

} // namespace parreg
