#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "parreg/analysis.hpp"
#include "parreg/models.hpp"
#include "parreg/regulator.hpp"
#include "parreg/rng.hpp"

namespace parreg {

// ---------------------------------------------------------------------------
// Full closed loop: plant + exosystem + N actuators + N controllers,
// flattened to x' = A x with layout
//   [ z | xi | v | x_1..x_N | eta1_1..eta1_N | eta2_1..eta2_N | vs_1..vs_N ]
// ---------------------------------------------------------------------------

struct StateLayout {
    std::size_t nz = 0, r = 0, q = 0, N = 1, l = 0;

    std::size_t z() const { return 0; }
    std::size_t xi() const { return nz; }
    std::size_t v() const { return nz + r; }
    std::size_t x(std::size_t i) const { return nz + r + q + i; }
    std::size_t eta1(std::size_t i) const { return nz + r + q + N + i * l; }
    std::size_t eta2(std::size_t i) const { return nz + r + q + N + N * l + i * l; }
    std::size_t vs(std::size_t i) const { return nz + r + q + N + 2 * N * l + i * r; }
    std::size_t total() const { return nz + r + q + N * (1 + 2 * l + r); }

    bool operator==(const StateLayout&) const = default;
};

class ClosedLoopSystem {
public:
    Matrix A;        // closed-loop state matrix
    Matrix e_row;    // regulated error as a linear functional of the state
    Matrix y0_row;   // reference output functional
    Matrix u_rows;   // N x dim control functionals
    StateLayout layout;
    GainSet gains;
    std::vector<double> w;
    std::string name;

    static ClosedLoopSystem build(const UncertainPlant& plant, const Exosystem& exo,
                                  const ActuatorBank& act, const Graph& graph,
                                  const InternalModel& im, const ObserverSpec& obs,
                                  const GainSet& gains, std::span<const double> w) {
        if (graph.N != act.N) throw DimensionMismatch("graph and actuator bank disagree on N");
        const PlantMatrices pm = realize_plant(plant, w);
        ClosedLoopSystem sys;
        sys.layout = StateLayout{plant.zero_dynamics_dim(), plant.r, exo.q(), act.N, im.l};
        sys.gains = gains;
        sys.w.assign(w.begin(), w.end());
        const StateLayout& lo = sys.layout;
        const std::size_t dim = lo.total();
        sys.A = Matrix(dim, dim);
        sys.e_row = Matrix(1, dim);
        sys.y0_row = Matrix(1, dim);
        sys.u_rows = Matrix(act.N, dim);

        // everything is linear, so evaluating the interconnection on basis
        // vectors reproduces the matrix column by column
        std::vector<double> state(dim, 0.0), deriv(dim, 0.0);
        std::vector<AgentState> agents(act.N);
        std::vector<double> xs(act.N);
        for (std::size_t jcol = 0; jcol < dim; ++jcol) {
            std::fill(state.begin(), state.end(), 0.0);
            state[jcol] = 1.0;
            std::fill(deriv.begin(), deriv.end(), 0.0);

            double e = state[lo.xi()];
            double y0 = 0.0;
            for (std::size_t j = 0; j < lo.q; ++j) y0 += pm.F(0, j) * state[lo.v() + j];
            e -= y0;

            double up = 0.0;
            for (std::size_t i = 0; i < lo.N; ++i) up += state[lo.x(i)];

            // plant
            for (std::size_t i = 0; i < lo.nz; ++i) {
                double s = pm.A2(i, 0) * state[lo.xi()];
                for (std::size_t j = 0; j < lo.nz; ++j) s += pm.A1(i, j) * state[lo.z() + j];
                for (std::size_t j = 0; j < lo.q; ++j) s += pm.E0(i, j) * state[lo.v() + j];
                deriv[lo.z() + i] = s;
            }
            for (std::size_t s = 0; s + 1 < lo.r; ++s) deriv[lo.xi() + s] = state[lo.xi() + s + 1];
            {
                double s = pm.b * up;
                for (std::size_t j = 0; j < lo.nz; ++j) s += pm.A3(0, j) * state[lo.z() + j];
                for (std::size_t k = 0; k < lo.r; ++k) s += pm.c[k] * state[lo.xi() + k];
                for (std::size_t j = 0; j < lo.q; ++j) s += pm.Er(0, j) * state[lo.v() + j];
                deriv[lo.xi() + lo.r - 1] = s;
            }
            // exosystem
            for (std::size_t i = 0; i < lo.q; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < lo.q; ++j) s += exo.S(i, j) * state[lo.v() + j];
                deriv[lo.v() + i] = s;
            }
            // controllers
            for (std::size_t i = 0; i < lo.N; ++i) {
                agents[i].eta1.assign(state.begin() + static_cast<std::ptrdiff_t>(lo.eta1(i)),
                                      state.begin() + static_cast<std::ptrdiff_t>(lo.eta1(i) + lo.l));
                agents[i].eta2.assign(state.begin() + static_cast<std::ptrdiff_t>(lo.eta2(i)),
                                      state.begin() + static_cast<std::ptrdiff_t>(lo.eta2(i) + lo.l));
                agents[i].varsigma.assign(
                    state.begin() + static_cast<std::ptrdiff_t>(lo.vs(i)),
                    state.begin() + static_cast<std::ptrdiff_t>(lo.vs(i) + lo.r));
                xs[i] = state[lo.x(i)];
            }
            const auto ctrl = controller_derivatives(agents, xs, e, im, obs, gains, graph);
            for (std::size_t i = 0; i < lo.N; ++i) {
                deriv[lo.x(i)] = act.a * state[lo.x(i)] + act.b_a * ctrl.u[i];
                for (std::size_t k = 0; k < lo.l; ++k) {
                    deriv[lo.eta1(i) + k] = ctrl.dstate[i].eta1[k];
                    deriv[lo.eta2(i) + k] = ctrl.dstate[i].eta2[k];
                }
                for (std::size_t k = 0; k < lo.r; ++k)
                    deriv[lo.vs(i) + k] = ctrl.dstate[i].varsigma[k];
                sys.u_rows(i, jcol) = ctrl.u[i];
            }
            for (std::size_t i = 0; i < dim; ++i) sys.A(i, jcol) = deriv[i];
            sys.e_row(0, jcol) = e;
            sys.y0_row(0, jcol) = y0;
        }
        return sys;
    }
};

// ---------------------------------------------------------------------------
// Trajectories and metrics
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<double> t;
    Matrix states; // (steps+1) x dim
    std::vector<double> e, y0, up;
    Matrix y; // (steps+1) x N actuator outputs
    Matrix u; // (steps+1) x N control inputs
    StateLayout layout;
    GainSet gains;
    double dt = 0.0;
    bool step_warning = false; // dt * spectral radius exceeded the RK4 heuristic

    std::size_t steps() const { return t.empty() ? 0 : t.size() - 1; }
    double horizon() const { return t.empty() ? 0.0 : t.back(); }
};

/// Classical fixed-step fourth-order Runge-Kutta on the assembled loop.
inline Trajectory simulate(const ClosedLoopSystem& sys, std::span<const double> x0, double dt,
                           double horizon) {
    const std::size_t dim = sys.layout.total();
    if (x0.size() != dim) throw DimensionMismatch("simulate: initial state has wrong dimension");
    if (dt <= 0.0) throw Error("simulate: dt must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));

    Trajectory traj;
    traj.layout = sys.layout;
    traj.gains = sys.gains;
    traj.dt = dt;
    traj.step_warning = dt * spectral_radius(sys.A) >= 2.5;
    traj.t.resize(steps + 1);
    traj.states = Matrix(steps + 1, dim);
    traj.e.resize(steps + 1);
    traj.y0.resize(steps + 1);
    traj.up.resize(steps + 1);
    traj.y = Matrix(steps + 1, sys.layout.N);
    traj.u = Matrix(steps + 1, sys.layout.N);

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const StateLayout& lo = sys.layout;

    auto record = [&](std::size_t k) {
        traj.t[k] = static_cast<double>(k) * dt;
        double e = 0.0, y0 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            traj.states(k, j) = x[j];
            e += sys.e_row(0, j) * x[j];
            y0 += sys.y0_row(0, j) * x[j];
        }
        traj.e[k] = e;
        traj.y0[k] = y0;
        double up = 0.0;
        for (std::size_t i = 0; i < lo.N; ++i) {
            const double yi = x[lo.x(i)];
            traj.y(k, i) = yi;
            up += yi;
            double ui = 0.0;
            for (std::size_t j = 0; j < dim; ++j) ui += sys.u_rows(i, j) * x[j];
            traj.u(k, i) = ui;
        }
        traj.up[k] = up;
    };

    record(0);
    for (std::size_t k = 0; k < steps; ++k) {
        matvec(sys.A, x, k1);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = x[j] + 0.5 * dt * k1[j];
        matvec(sys.A, tmp, k2);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = x[j] + 0.5 * dt * k2[j];
        matvec(sys.A, tmp, k3);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = x[j] + dt * k3[j];
        matvec(sys.A, tmp, k4);
        double norm2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            norm2 += x[j] * x[j];
        }
        if (!(norm2 < 1e24))
            throw Diverged("simulate: state norm exceeded 1e12 at t = " +
                           std::to_string((k + 1) * dt));
        record(k + 1);
    }
    return traj;
}

struct Metrics {
    double tail_max_error = 0.0;   // max |e| over the final 20% of the horizon
    double tail_max_sharing = 0.0; // max over pairs of |y_i - y_j| over the final 20%
    double settling_time = 0.0;    // first t after which |e| stays below threshold
    bool settled = false;
    double error_energy = 0.0; // integral of e^2
    double input_energy = 0.0; // integral of sum_i u_i^2
};

inline Metrics metrics(const Trajectory& traj, double threshold) {
    if (traj.t.empty()) throw Error("metrics: empty trajectory");
    Metrics m;
    const std::size_t n = traj.t.size();
    const std::size_t tail0 = static_cast<std::size_t>(0.8 * static_cast<double>(n - 1));
    for (std::size_t k = tail0; k < n; ++k) {
        m.tail_max_error = std::max(m.tail_max_error, std::abs(traj.e[k]));
        for (std::size_t i = 0; i < traj.layout.N; ++i)
            for (std::size_t j = i + 1; j < traj.layout.N; ++j)
                m.tail_max_sharing =
                    std::max(m.tail_max_sharing, std::abs(traj.y(k, i) - traj.y(k, j)));
    }
    std::size_t first_quiet = n; // first index after the last threshold crossing
    for (std::size_t k = n; k-- > 0;) {
        if (std::abs(traj.e[k]) >= threshold) {
            first_quiet = k + 1;
            break;
        }
        if (k == 0) first_quiet = 0;
    }
    m.settled = first_quiet < n;
    m.settling_time = m.settled ? traj.t[first_quiet] : traj.horizon();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double dt = traj.t[k + 1] - traj.t[k];
        m.error_energy += 0.5 * dt * (traj.e[k] * traj.e[k] + traj.e[k + 1] * traj.e[k + 1]);
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t i = 0; i < traj.layout.N; ++i) {
            s0 += traj.u(k, i) * traj.u(k, i);
            s1 += traj.u(k + 1, i) * traj.u(k + 1, i);
        }
        m.input_energy += 0.5 * dt * (s0 + s1);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Sum-dynamics equivalence between a multi-actuator run and the matched
// single-actuator run (k1 = N kbar1, k2 = kbar2, h = hbar, summed initial
// conditions, identical observer states).
// ---------------------------------------------------------------------------

struct SumDeviation {
    double x = 0.0, eta1 = 0.0, eta2 = 0.0;
    double max_relative = 0.0;
};

inline SumDeviation sum_equivalence(const Trajectory& multi, const Trajectory& single_run) {
    const StateLayout& lm = multi.layout;
    const StateLayout& ls = single_run.layout;
    if (ls.N != 1) throw ConfigMismatch("sum_equivalence: reference run must have one actuator");
    if (lm.l != ls.l || lm.r != ls.r || lm.q != ls.q || lm.nz != ls.nz)
        throw ConfigMismatch("sum_equivalence: system dimensions differ");
    const double nkb1 = static_cast<double>(lm.N) * multi.gains.kbar1;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); };
    if (!close(single_run.gains.kbar1, nkb1))
        throw ConfigMismatch("sum_equivalence: single k1 must equal N kbar1");
    if (!close(single_run.gains.kbar2, multi.gains.kbar2))
        throw ConfigMismatch("sum_equivalence: k2 mismatch");
    if (!close(single_run.gains.hbar, multi.gains.hbar))
        throw ConfigMismatch("sum_equivalence: h mismatch");
    if (multi.dt != single_run.dt || multi.t.size() != single_run.t.size())
        throw ConfigMismatch("sum_equivalence: time grids differ");

    // matched initial conditions: sums at t = 0, identical observer states
    auto check_initial = [&]() {
        double sx = 0.0;
        for (std::size_t i = 0; i < lm.N; ++i) sx += multi.states(0, lm.x(i));
        if (!close(sx, single_run.states(0, ls.x(0)))) return false;
        for (std::size_t k = 0; k < lm.l; ++k) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < lm.N; ++i) {
                s1 += multi.states(0, lm.eta1(i) + k);
                s2 += multi.states(0, lm.eta2(i) + k);
            }
            if (!close(s1, single_run.states(0, ls.eta1(0) + k))) return false;
            if (!close(s2, single_run.states(0, ls.eta2(0) + k))) return false;
        }
        for (std::size_t k = 0; k < lm.r; ++k) {
            const double ref = multi.states(0, lm.vs(0) + k);
            for (std::size_t i = 1; i < lm.N; ++i)
                if (!close(ref, multi.states(0, lm.vs(i) + k))) return false;
            if (!close(ref, single_run.states(0, ls.vs(0) + k))) return false;
        }
        return true;
    };
    if (!check_initial())
        throw ConfigMismatch("sum_equivalence: initial conditions are not sum-matched");

    SumDeviation dev;
    double scale_x = 0.0, scale_e1 = 0.0, scale_e2 = 0.0;
    for (std::size_t k = 0; k < multi.t.size(); ++k) {
        double sx = 0.0;
        for (std::size_t i = 0; i < lm.N; ++i) sx += multi.states(k, lm.x(i));
        dev.x = std::max(dev.x, std::abs(sx - single_run.states(k, ls.x(0))));
        scale_x = std::max(scale_x, std::abs(single_run.states(k, ls.x(0))));
        for (std::size_t j = 0; j < lm.l; ++j) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < lm.N; ++i) {
                s1 += multi.states(k, lm.eta1(i) + j);
                s2 += multi.states(k, lm.eta2(i) + j);
            }
            dev.eta1 = std::max(dev.eta1, std::abs(s1 - single_run.states(k, ls.eta1(0) + j)));
            dev.eta2 = std::max(dev.eta2, std::abs(s2 - single_run.states(k, ls.eta2(0) + j)));
            scale_e1 = std::max(scale_e1, std::abs(single_run.states(k, ls.eta1(0) + j)));
            scale_e2 = std::max(scale_e2, std::abs(single_run.states(k, ls.eta2(0) + j)));
        }
    }
    dev.max_relative = std::max({dev.x / (1.0 + scale_x), dev.eta1 / (1.0 + scale_e1),
                                 dev.eta2 / (1.0 + scale_e2)});
    return dev;
}

// ---------------------------------------------------------------------------
// Initial conditions
// ---------------------------------------------------------------------------

/// Plant, actuator, and compensator states drawn uniformly from
/// [-ic_range, ic_range]; the exogenous state is pinned to v0.
inline std::vector<double> random_initial_state(const StateLayout& lo, std::span<const double> v0,
                                                Rng& rng, double ic_range = 3.0) {
    if (v0.size() != lo.q) throw DimensionMismatch("v0 dimension mismatch");
    std::vector<double> x(lo.total());
    for (auto& v : x) v = rng.uniform(-ic_range, ic_range);
    for (std::size_t j = 0; j < lo.q; ++j) x[lo.v() + j] = v0[j];
    return x;
}

/// Exact steady state: z = Z v0, xi = Pi v0, x_i = Xi v0 / N,
/// eta_{1i} = Theta1 v0 / N, eta_{2i} = Theta2 v0 / N, varsigma_i = 0.
inline std::vector<double> steady_initial_state(const StateLayout& lo, const SteadyState& ss,
                                                const InternalModel& im, const Exosystem& exo,
                                                std::span<const double> v0) {
    std::vector<double> x(lo.total(), 0.0);
    const Matrix v = Matrix::column(v0);
    const Matrix zv = ss.Z * v, piv = ss.Pi * v, xiv = ss.Xi * v;
    const Matrix th1 = steady_state_generator(im.T1, ss.Xi, exo.S) * v;
    const Matrix th2 = steady_state_generator(im.T2, ss.U, exo.S) * v;
    const double invn = 1.0 / static_cast<double>(lo.N);
    for (std::size_t i = 0; i < lo.nz; ++i) x[lo.z() + i] = zv(i, 0);
    for (std::size_t s = 0; s < lo.r; ++s) x[lo.xi() + s] = piv(s, 0);
    for (std::size_t j = 0; j < lo.q; ++j) x[lo.v() + j] = v0[j];
    for (std::size_t i = 0; i < lo.N; ++i) {
        x[lo.x(i)] = xiv(0, 0) * invn;
        for (std::size_t k = 0; k < lo.l; ++k) {
            x[lo.eta1(i) + k] = th1(k, 0) * invn;
            x[lo.eta2(i) + k] = th2(k, 0) * invn;
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// CSV export: t,e,y0,y,u_p,y_1..y_N,u_1..u_N (+ optional full state)
// ---------------------------------------------------------------------------

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t decimate = 1,
                                 bool full_state = false) {
    if (decimate == 0) decimate = 1;
    const std::size_t n = traj.t.size(), nact = traj.layout.N;
    os << "t,e,y0,y,u_p";
    for (std::size_t i = 1; i <= nact; ++i) os << ",y_" << i;
    for (std::size_t i = 1; i <= nact; ++i) os << ",u_" << i;
    if (full_state)
        for (std::size_t j = 0; j < traj.layout.total(); ++j) os << ",s" << j;
    os << "\n";
    char buf[32];
    auto put = [&](double v, bool lead_comma = true) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (lead_comma) os << ',';
        os << buf;
    };
    for (std::size_t k = 0; k < n; k += decimate) {
        put(traj.t[k], false);
        put(traj.e[k]);
        put(traj.y0[k]);
        put(traj.states(k, traj.layout.xi()));
        put(traj.up[k]);
        for (std::size_t i = 0; i < nact; ++i) put(traj.y(k, i));
        for (std::size_t i = 0; i < nact; ++i) put(traj.u(k, i));
        if (full_state)
            for (std::size_t j = 0; j < traj.layout.total(); ++j) put(traj.states(k, j));
        os << "\n";
    }
}

} // namespace parreg
