#pragma once

#include <string>
#include <vector>

#include "parreg/models.hpp"
#include "parreg/regulator.hpp"

namespace parreg {

// A fully specified experiment: system description, compensator choices,
// gains, and the default exogenous initial condition.
struct ExampleSystem {
    std::string name;
    UncertainPlant plant;
    Exosystem exo;
    ActuatorBank actuator;
    Graph graph;
    Matrix M1, N1, M2, N2;
    std::vector<double> gammas; // gamma_0 .. gamma_{r-2}
    std::vector<double> deltas; // delta_0 .. delta_{r-1}
    GainSet gains;
    std::vector<double> v0;
};

namespace detail {
inline std::vector<double> unit_delta(std::size_t nw, std::size_t index) {
    std::vector<double> d(nw, 0.0);
    d[index] = 1.0;
    return d;
}
} // namespace detail

/// Motor-driven shaft: double integrator with damping, sinusoid + constant
/// load reference, strictly stable electric-motor actuators (a = -10, b_a = 50).
inline ExampleSystem motor_example(bool multi) {
    ExampleSystem ex;
    ex.name = multi ? "exp1-multi" : "exp1-single";

    const std::size_t nw = 3, q = 3;
    UncertainPlant& p = ex.plant;
    p.n = 2;
    p.r = 2;
    p.A1.base = Matrix(0, 0);
    p.A2.base = Matrix(0, 1);
    p.A3.base = Matrix(1, 0);
    p.E0.base = Matrix(0, q);
    p.Er.base = Matrix::from_rows({{0, 0, -2}});
    p.Er.deltas.resize(nw);
    p.Er.deltas[2] = Matrix::from_rows({{0, 0, 1}});
    p.F.base = Matrix::from_rows({{1, 0, 0}});
    p.c.resize(2);
    p.c[0] = UncertainScalar{0.0, {}};
    p.c[1] = UncertainScalar{-2.0, detail::unit_delta(nw, 0)};
    p.b = UncertainScalar{2.0, detail::unit_delta(nw, 1)};
    p.W = Box::symmetric(nw, 0.3);

    ex.exo = Exosystem::from_matrix(Matrix::from_rows({{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}));
    ex.actuator = ActuatorBank{-10.0, 50.0, multi ? 5u : 1u};
    ex.graph = multi ? Graph::ring(5) : Graph::single();

    ex.M1 = ex.M2 = Matrix::from_rows({{0, 1, 0}, {0, 0, 1}, {-8, -12, -6}});
    ex.N1 = ex.N2 = Matrix::from_rows({{0}, {0}, {1}});
    ex.gammas = {1.0};
    ex.deltas = {4.0, 4.0};
    ex.gains = gains_from_single(2.0, 6.0, 14.0, ex.actuator.N, ex.gammas, 1.0, 1.0);
    ex.v0 = {1.0, 0.0, 2.0};
    return ex;
}

/// Third-order minimum-phase plant with unstable first-order actuators
/// (a = 1, b_a = 10); the distributed gains are hand-tuned rather than the
/// k1/N rule.
inline ExampleSystem unstable_actuator_example(bool multi) {
    ExampleSystem ex;
    ex.name = multi ? "exp2-multi" : "exp2-single";

    const std::size_t nw = 8, q = 2;
    UncertainPlant& p = ex.plant;
    p.n = 3;
    p.r = 2;
    p.A1.base = Matrix(1, 1, -6.0);
    p.A1.deltas.resize(nw);
    p.A1.deltas[0] = Matrix(1, 1, 1.0);
    p.A2.base = Matrix(1, 1, 3.0);
    p.A2.deltas.resize(nw);
    p.A2.deltas[1] = Matrix(1, 1, 1.0);
    p.A3.base = Matrix(1, 1, 4.0);
    p.A3.deltas.resize(nw);
    p.A3.deltas[2] = Matrix(1, 1, 1.0);
    p.E0.base = Matrix::from_rows({{1, 0}});
    p.E0.deltas.resize(nw);
    p.E0.deltas[6] = Matrix::from_rows({{1, 0}});
    p.Er.base = Matrix::from_rows({{0, 1}});
    p.Er.deltas.resize(nw);
    p.Er.deltas[7] = Matrix::from_rows({{0, 1}});
    p.F.base = Matrix::from_rows({{1, 0}});
    p.c.resize(2);
    p.c[0] = UncertainScalar{-20.0, detail::unit_delta(nw, 3)};
    p.c[1] = UncertainScalar{-9.0, detail::unit_delta(nw, 4)};
    p.b = UncertainScalar{2.0, detail::unit_delta(nw, 5)};
    p.W = Box::symmetric(nw, 0.5);

    ex.exo = Exosystem::from_matrix(Matrix::from_rows({{0, 1}, {-1, 0}}));
    ex.actuator = ActuatorBank{1.0, 10.0, multi ? 5u : 1u};
    ex.graph = multi ? Graph::ring(5) : Graph::single();

    ex.M1 = ex.M2 = Matrix::from_rows({{0, 1}, {-1, -2}});
    ex.N1 = ex.N2 = Matrix::from_rows({{0}, {1}});
    ex.gammas = {1.0};
    ex.deltas = {4.0, 4.0};
    if (multi) {
        GainSet g;
        g.gammas = ex.gammas;
        g.k1 = 2.0;
        g.k2 = 3.0;
        g.h = 5.0;
        g.N = 5;
        g.kbar1 = 0.4;  // = k1/5
        g.kbar2 = 3.5;  // hand-tuned, not k2
        g.hbar = 5.5;   // hand-tuned, not h
        g.sigma1 = 2.0;
        g.sigma2 = 3.0;
        ex.gains = g;
    } else {
        ex.gains = gains_from_single(2.0, 3.0, 5.0, 1, ex.gammas, 1.0, 1.0);
    }
    ex.v0 = {1.0, 0.0};
    return ex;
}

inline ExampleSystem builtin_example(const std::string& name) {
    if (name == "exp1-single") return motor_example(false);
    if (name == "exp1-multi") return motor_example(true);
    if (name == "exp2-single") return unstable_actuator_example(false);
    if (name == "exp2-multi") return unstable_actuator_example(true);
    throw UnknownExample("unknown example '" + name +
                         "' (expected exp1-single, exp1-multi, exp2-single, exp2-multi)");
}

inline std::vector<std::string> builtin_example_names() {
    return {"exp1-single", "exp1-multi", "exp2-single", "exp2-multi"};
}

} // namespace parreg
