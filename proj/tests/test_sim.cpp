#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "parreg/pipeline.hpp"
#include "parreg/sim.hpp"

using namespace parreg;
using Catch::Approx;

namespace {
// one-dimensional probe system x' = a x (no actuators, no exosystem)
ClosedLoopSystem scalar_system(double a) {
    ClosedLoopSystem sys;
    sys.layout = StateLayout{0, 1, 0, 0, 0};
    sys.A = Matrix(1, 1, a);
    sys.e_row = Matrix(1, 1, 1.0);
    sys.y0_row = Matrix(1, 1);
    sys.u_rows = Matrix(0, 1);
    return sys;
}
} // namespace

TEST_CASE("zero initial state stays at the origin") {
    auto ex = builtin_example("exp1-single");
    auto sy = synthesize(ex);
    std::vector<double> w0(3, 0.0);
    auto cl = build_closed_loop(ex, sy, w0);
    std::vector<double> x0(cl.layout.total(), 0.0);
    auto traj = simulate(cl, x0, 1e-3, 1.0);
    REQUIRE(traj.states.max_abs() == 0.0);
    REQUIRE(metrics(traj, 0.02).tail_max_error == 0.0);
}

TEST_CASE("RK4 reproduces the scalar exponential") {
    auto sys = scalar_system(-1.0);
    std::vector<double> x0{1.0};
    auto traj = simulate(sys, x0, 1e-3, 5.0);
    REQUIRE(traj.states(traj.steps(), 0) == Approx(std::exp(-5.0)).margin(1e-8));
    REQUIRE_FALSE(traj.step_warning);
}

TEST_CASE("step size heuristic warns when dt times spectral radius is large") {
    auto sys = scalar_system(-1.0);
    std::vector<double> x0{1.0};
    auto traj = simulate(sys, x0, 3.0, 9.0);
    REQUIRE(traj.step_warning);
}

TEST_CASE("divergence is detected") {
    auto sys = scalar_system(10.0);
    std::vector<double> x0{1.0};
    REQUIRE_THROWS_AS(simulate(sys, x0, 1e-2, 10.0), Diverged);
}

TEST_CASE("motor example regulates from random initial conditions") {
    auto ex = builtin_example("exp1-single");
    auto sy = synthesize(ex);
    std::vector<double> w{0.3, 0.3, 0.3};
    auto cl = build_closed_loop(ex, sy, w);
    Rng rng(2026);
    auto x0 = random_initial_state(cl.layout, ex.v0, rng);
    auto traj = simulate(cl, x0, 1e-3, 30.0);
    auto m = metrics(traj, 0.02);
    REQUIRE(m.tail_max_error < 0.02);
    REQUIRE(m.settled);
    REQUIRE(m.settling_time < 30.0);
    REQUIRE(m.tail_max_sharing == 0.0); // single actuator: no pairs
}

TEST_CASE("derived series are consistent with the recorded states") {
    auto ex = builtin_example("exp1-multi");
    auto sy = synthesize(ex);
    std::vector<double> w0(3, 0.0);
    auto cl = build_closed_loop(ex, sy, w0);
    Rng rng(7);
    auto x0 = random_initial_state(cl.layout, ex.v0, rng);
    auto traj = simulate(cl, x0, 1e-3, 2.0);
    const auto& lo = traj.layout;
    const PlantMatrices pm = realize_plant(ex.plant, w0);
    for (std::size_t k = 0; k < traj.t.size(); k += 37) {
        double y0 = 0.0;
        for (std::size_t j = 0; j < lo.q; ++j) y0 += pm.F(0, j) * traj.states(k, lo.v() + j);
        REQUIRE(traj.y0[k] == Approx(y0).margin(1e-12));
        REQUIRE(traj.e[k] == Approx(traj.states(k, lo.xi()) - y0).margin(1e-12));
        double up = 0.0;
        for (std::size_t i = 0; i < lo.N; ++i) {
            REQUIRE(traj.y(k, i) == traj.states(k, lo.x(i)));
            up += traj.y(k, i);
        }
        REQUIRE(traj.up[k] == Approx(up).margin(1e-12));
    }
}

TEST_CASE("closed loop satisfies superposition") {
    auto ex = builtin_example("exp1-multi");
    auto sy = synthesize(ex);
    std::vector<double> w{-0.3, 0.3, -0.3};
    auto cl = build_closed_loop(ex, sy, w);
    Rng rng(11);
    std::vector<double> a(cl.layout.total()), b(cl.layout.total()), mix(cl.layout.total());
    for (std::size_t j = 0; j < a.size(); ++j) {
        a[j] = rng.uniform(-3, 3);
        b[j] = rng.uniform(-3, 3);
    }
    const double al = 0.6, be = -1.7;
    for (std::size_t j = 0; j < a.size(); ++j) mix[j] = al * a[j] + be * b[j];
    auto ta = simulate(cl, a, 1e-3, 3.0);
    auto tb = simulate(cl, b, 1e-3, 3.0);
    auto tm = simulate(cl, mix, 1e-3, 3.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < tm.t.size(); k += 11)
        for (std::size_t j = 0; j < a.size(); ++j)
            worst = std::max(worst, std::abs(tm.states(k, j) - al * ta.states(k, j) -
                                             be * tb.states(k, j)));
    REQUIRE(worst < 1e-9);
}

TEST_CASE("RK4 order: halving the step shrinks the difference at least 8x") {
    auto ex = builtin_example("exp1-single");
    auto sy = synthesize(ex);
    std::vector<double> w0(3, 0.0);
    auto cl = build_closed_loop(ex, sy, w0);
    Rng rng(3);
    auto x0 = random_initial_state(cl.layout, ex.v0, rng);
    const double T = 5.0, dt = 2e-3;
    auto t1 = simulate(cl, x0, dt, T);
    auto t2 = simulate(cl, x0, dt / 2, T);
    auto t4 = simulate(cl, x0, dt / 4, T);
    auto diff = [&](const Trajectory& coarse, const Trajectory& fine, std::size_t ratio) {
        double worst = 0.0;
        for (std::size_t k = 0; k < coarse.t.size(); ++k)
            for (std::size_t j = 0; j < coarse.layout.total(); ++j)
                worst = std::max(worst,
                                 std::abs(coarse.states(k, j) - fine.states(k * ratio, j)));
        return worst;
    };
    const double e1 = diff(t1, t2, 2);
    const double e2 = diff(t2, t4, 2);
    REQUIRE(e1 / e2 >= 8.0);
}

TEST_CASE("starting at the exact steady state keeps the error at zero") {
    for (const char* name : {"exp1-single", "exp1-multi", "exp2-multi"}) {
        auto ex = builtin_example(name);
        auto sy = synthesize(ex);
        std::vector<double> w(ex.plant.W.dim(), 0.0);
        if (std::string(name) != "exp2-multi") w.assign(ex.plant.W.hi.begin(), ex.plant.W.hi.end());
        auto cl = build_closed_loop(ex, sy, w);
        auto ss = solve_regulator_equations(ex.plant, ex.exo, w, ex.actuator);
        auto x0 = steady_initial_state(cl.layout, ss, sy.im, ex.exo, ex.v0);
        auto traj = simulate(cl, x0, 1e-3, 10.0);
        double worst = 0.0;
        for (double e : traj.e) worst = std::max(worst, std::abs(e));
        INFO(name);
        REQUIRE(worst < 1e-6);
    }
}

TEST_CASE("sum dynamics match the single-actuator loop") {
    auto multi_ex = builtin_example("exp1-multi");
    auto single_ex = builtin_example("exp1-single"); // k1 = 2 = N kbar1
    auto sy_m = synthesize(multi_ex);
    auto sy_s = synthesize(single_ex);
    std::vector<double> w{0.3, -0.3, 0.3};
    auto cl_m = build_closed_loop(multi_ex, sy_m, w);
    auto cl_s = build_closed_loop(single_ex, sy_s, w);

    Rng rng(99);
    auto x0m = random_initial_state(cl_m.layout, multi_ex.v0, rng);
    // identical observer states across agents
    const auto& lm = cl_m.layout;
    for (std::size_t i = 1; i < lm.N; ++i)
        for (std::size_t k = 0; k < lm.r; ++k)
            x0m[lm.vs(i) + k] = x0m[lm.vs(0) + k];
    // single run starts from the summed initial conditions
    const auto& ls = cl_s.layout;
    std::vector<double> x0s(ls.total(), 0.0);
    for (std::size_t i = 0; i < lm.nz; ++i) x0s[ls.z() + i] = x0m[lm.z() + i];
    for (std::size_t s = 0; s < lm.r; ++s) x0s[ls.xi() + s] = x0m[lm.xi() + s];
    for (std::size_t j = 0; j < lm.q; ++j) x0s[ls.v() + j] = x0m[lm.v() + j];
    for (std::size_t i = 0; i < lm.N; ++i) {
        x0s[ls.x(0)] += x0m[lm.x(i)];
        for (std::size_t k = 0; k < lm.l; ++k) {
            x0s[ls.eta1(0) + k] += x0m[lm.eta1(i) + k];
            x0s[ls.eta2(0) + k] += x0m[lm.eta2(i) + k];
        }
    }
    for (std::size_t k = 0; k < lm.r; ++k) x0s[ls.vs(0) + k] = x0m[lm.vs(0) + k];

    auto tm = simulate(cl_m, x0m, 1e-3, 10.0);
    auto ts = simulate(cl_s, x0s, 1e-3, 10.0);
    auto dev = sum_equivalence(tm, ts);
    REQUIRE(dev.max_relative < 1e-8);

    // all-zero start matches exactly
    std::vector<double> zm(lm.total(), 0.0), zs(ls.total(), 0.0);
    auto tzm = simulate(cl_m, zm, 1e-2, 1.0);
    auto tzs = simulate(cl_s, zs, 1e-2, 1.0);
    auto zdev = sum_equivalence(tzm, tzs);
    REQUIRE(zdev.x == 0.0);
    REQUIRE(zdev.eta1 == 0.0);
    REQUIRE(zdev.eta2 == 0.0);

    // deliberately mismatched gains are rejected
    auto bad = cl_s;
    bad.gains.kbar1 = 1.9;
    auto tbad = simulate(bad, x0s, 1e-3, 10.0);
    REQUIRE_THROWS_AS(sum_equivalence(tm, tbad), ConfigMismatch);
}

TEST_CASE("regulation is independent of the coupling strength for matched agents") {
    auto ex = builtin_example("exp1-multi");
    auto sy = synthesize(ex);
    std::vector<double> w0(3, 0.0);
    auto base = build_closed_loop(ex, sy, w0);

    auto strong_ex = ex;
    strong_ex.gains.sigma1 = 25.0;
    strong_ex.gains.sigma2 = 0.5;
    auto strong = build_closed_loop(strong_ex, sy, w0);

    // identical controller states across agents keep the coupling at zero
    Rng rng(4);
    std::vector<double> x0(base.layout.total(), 0.0);
    const auto& lo = base.layout;
    for (std::size_t i = 0; i < lo.nz + lo.r; ++i) x0[i] = rng.uniform(-3, 3);
    for (std::size_t j = 0; j < lo.q; ++j) x0[lo.v() + j] = ex.v0[j];
    const double xa = rng.uniform(-3, 3);
    std::vector<double> e1(lo.l), e2(lo.l), vs(lo.r);
    for (auto& v : e1) v = rng.uniform(-3, 3);
    for (auto& v : e2) v = rng.uniform(-3, 3);
    for (auto& v : vs) v = rng.uniform(-3, 3);
    for (std::size_t i = 0; i < lo.N; ++i) {
        x0[lo.x(i)] = xa;
        for (std::size_t k = 0; k < lo.l; ++k) {
            x0[lo.eta1(i) + k] = e1[k];
            x0[lo.eta2(i) + k] = e2[k];
        }
        for (std::size_t k = 0; k < lo.r; ++k) x0[lo.vs(i) + k] = vs[k];
    }
    auto ta = simulate(base, x0, 1e-3, 5.0);
    auto tb = simulate(strong, x0, 1e-3, 5.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < ta.t.size(); ++k)
        worst = std::max(worst, std::abs(ta.e[k] - tb.e[k]));
    REQUIRE(worst < 1e-8);
}

TEST_CASE("closed-loop spectrum equals the certified matrix spectrum plus exosystem modes") {
    // ties the raw interconnection to the transformed analysis matrices
    for (const char* name : {"exp1-single", "exp2-single"}) {
        auto ex = builtin_example(name);
        auto sy = synthesize(ex);
        std::vector<double> w(ex.plant.W.dim(), 0.1);
        auto cl = build_closed_loop(ex, sy, w);
        auto cert = assemble_output_feedback(ex.plant, ex.actuator, sy.im, sy.obs, ex.gains, w);
        auto expected = eigenvalues(cert);
        for (auto z : eigenvalues(ex.exo.S)) expected.push_back(z);
        INFO(name);
        REQUIRE(oracles::multiset_distance(eigenvalues(cl.A), expected) < 1e-5);
    }
}

TEST_CASE("csv export is decimated, headed, and deterministic") {
    auto ex = builtin_example("exp1-multi");
    auto sy = synthesize(ex);
    std::vector<double> w0(3, 0.0);
    auto cl = build_closed_loop(ex, sy, w0);
    Rng rng(1);
    auto x0 = random_initial_state(cl.layout, ex.v0, rng);
    auto traj = simulate(cl, x0, 1e-3, 0.5);

    std::ostringstream a, b;
    write_trajectory_csv(a, traj, 5);
    write_trajectory_csv(b, traj, 5);
    REQUIRE(a.str() == b.str());

    std::istringstream lines(a.str());
    std::string header;
    std::getline(lines, header);
    REQUIRE(header == "t,e,y0,y,u_p,y_1,y_2,y_3,y_4,y_5,u_1,u_2,u_3,u_4,u_5");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(lines, line)) ++rows;
    REQUIRE(rows == 101); // 501 samples, every fifth
}
