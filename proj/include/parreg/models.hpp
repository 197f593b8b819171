#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "parreg/eigen.hpp"
#include "parreg/linalg.hpp"
#include "parreg/matrix.hpp"

namespace parreg {

// ---------------------------------------------------------------------------
// Affine uncertainty: value(w) = base + sum_i w_i * delta_i over a box W.
// ---------------------------------------------------------------------------

struct UncertainScalar {
    double base = 0.0;
    std::vector<double> deltas; // one per uncertainty coordinate; may be shorter (rest zero)

    double at(std::span<const double> w) const {
        double v = base;
        for (std::size_t i = 0; i < deltas.size() && i < w.size(); ++i) v += w[i] * deltas[i];
        return v;
    }
};

struct UncertainMatrixAffine {
    Matrix base;
    std::vector<Matrix> deltas;

    Matrix at(std::span<const double> w) const {
        Matrix v = base;
        for (std::size_t i = 0; i < deltas.size() && i < w.size(); ++i) {
            if (deltas[i].empty()) continue;
            if (!deltas[i].same_shape(base))
                throw DimensionMismatch("uncertain matrix delta shape differs from base");
            v += w[i] * deltas[i];
        }
        return v;
    }
};

// Closed box of admissible uncertainty vectors.
struct Box {
    std::vector<double> lo, hi;

    std::size_t dim() const { return lo.size(); }

    std::vector<double> center() const {
        std::vector<double> c(dim());
        for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }

    bool contains(std::span<const double> w, double tol = 1e-12) const {
        if (w.size() != dim()) return false;
        for (std::size_t i = 0; i < dim(); ++i)
            if (w[i] < lo[i] - tol || w[i] > hi[i] + tol) return false;
        return true;
    }

    // vertex k in {0 .. 2^dim - 1}; bit i selects hi[i] over lo[i]
    std::vector<double> vertex(std::size_t k) const {
        std::vector<double> v(dim());
        for (std::size_t i = 0; i < dim(); ++i) v[i] = (k >> i) & 1u ? hi[i] : lo[i];
        return v;
    }

    std::size_t vertex_count() const { return std::size_t{1} << dim(); }

    std::vector<std::vector<double>> vertices() const {
        std::vector<std::vector<double>> vs;
        vs.reserve(vertex_count());
        for (std::size_t k = 0; k < vertex_count(); ++k) vs.push_back(vertex(k));
        return vs;
    }

    static Box symmetric(std::size_t dim, double half_width) {
        Box b;
        b.lo.assign(dim, -half_width);
        b.hi.assign(dim, half_width);
        return b;
    }
};

// ---------------------------------------------------------------------------
// Plant, exosystem, actuators, graph
// ---------------------------------------------------------------------------

// Strict-feedback uncertain plant:
//   z'    = A1(w) z + A2(w) xi_1 + E0(w) v          (z in R^{n-r})
//   xi_s' = xi_{s+1},  s = 1..r-1
//   xi_r' = A3(w) z + sum_s c_s(w) xi_s + Er(w) v + b(w) u_p
//   y     = xi_1,   reference y0 = F(w) v
struct UncertainPlant {
    std::size_t n = 0; // total state dimension
    std::size_t r = 0; // relative degree (>= 1)
    UncertainMatrixAffine A1, A2, A3, E0, Er, F;
    std::vector<UncertainScalar> c; // c_1 .. c_r
    UncertainScalar b;
    Box W;

    std::size_t zero_dynamics_dim() const { return n - r; }
    std::size_t exo_dim() const { return F.base.cols(); }
};

// Plant matrices evaluated at a concrete uncertainty value.
struct PlantMatrices {
    Matrix A1, A2, A3, E0, Er, F;
    std::vector<double> c;
    double b = 0.0;
};

inline PlantMatrices realize_plant(const UncertainPlant& plant, std::span<const double> w,
                                   bool* outside_box = nullptr) {
    if (outside_box) *outside_box = !plant.W.contains(w);
    PlantMatrices m;
    m.A1 = plant.A1.at(w);
    m.A2 = plant.A2.at(w);
    m.A3 = plant.A3.at(w);
    m.E0 = plant.E0.at(w);
    m.Er = plant.Er.at(w);
    m.F = plant.F.at(w);
    m.c.reserve(plant.c.size());
    for (const auto& cs : plant.c) m.c.push_back(cs.at(w));
    m.b = plant.b.at(w);
    if (m.b <= 0.0)
        throw NonPositiveControlDirection("realize_plant: b(w) = " + std::to_string(m.b) +
                                          " is not positive");
    return m;
}

// Autonomous exogenous generator v' = S v with its minimal polynomial.
struct Exosystem {
    Matrix S;
    PolyCoeffs p; // minimal polynomial of S
    std::size_t l = 0;

    static Exosystem from_matrix(Matrix s) {
        Exosystem e;
        e.p = minimal_polynomial(s);
        e.l = e.p.degree();
        e.S = std::move(s);
        return e;
    }

    std::size_t q() const { return S.rows(); }
};

// N identical first-order actuators x_i' = a x_i + b_a u_i, y_i = x_i,
// feeding the plant through u_p = sum_i y_i.
struct ActuatorBank {
    double a = 0.0;
    double b_a = 1.0;
    std::size_t N = 1;
};

// Undirected weighted communication graph.
struct Graph {
    std::size_t N = 0;
    Matrix weights; // symmetric, nonnegative, zero diagonal

    static Graph single() {
        Graph g;
        g.N = 1;
        g.weights = Matrix(1, 1);
        return g;
    }

    static Graph ring(std::size_t n, double weight = 1.0) {
        Graph g;
        g.N = n;
        g.weights = Matrix(n, n);
        if (n == 1) return g;
        if (n == 2) {
            g.weights(0, 1) = g.weights(1, 0) = weight;
            return g;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            g.weights(i, j) = weight;
            g.weights(j, i) = weight;
        }
        return g;
    }

    static Graph complete(std::size_t n, double weight = 1.0) {
        Graph g;
        g.N = n;
        g.weights = Matrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) g.weights(i, j) = weight;
        return g;
    }

    static Graph custom(Matrix adjacency) {
        Graph g;
        g.N = adjacency.rows();
        if (adjacency.cols() != g.N) throw DimensionMismatch("graph adjacency must be square");
        for (std::size_t i = 0; i < g.N; ++i) {
            if (adjacency(i, i) != 0.0) throw Error("graph adjacency must have zero diagonal");
            for (std::size_t j = 0; j < g.N; ++j) {
                if (adjacency(i, j) < 0.0) throw Error("graph weights must be nonnegative");
                if (adjacency(i, j) != adjacency(j, i))
                    throw Error("graph adjacency must be symmetric");
            }
        }
        g.weights = std::move(adjacency);
        return g;
    }
};

/// Graph Laplacian L = D - A; symmetric with zero row sums.
inline Matrix laplacian(const Graph& g) {
    Matrix lap(g.N, g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < g.N; ++j) {
            deg += g.weights(i, j);
            lap(i, j) = -g.weights(i, j);
        }
        lap(i, i) = deg;
    }
    return lap;
}

/// Second-smallest Laplacian eigenvalue; > 0 iff the graph is connected.
inline double algebraic_connectivity(const Graph& g) {
    if (g.N <= 1) return 0.0;
    auto eig = eigenvalues(laplacian(g));
    std::vector<double> re(eig.size());
    for (std::size_t i = 0; i < eig.size(); ++i) re[i] = eig[i].real();
    std::sort(re.begin(), re.end());
    return re[1];
}

/// Nonzero Laplacian eigenvalues (those above `zero_tol`), ascending.
inline std::vector<double> nonzero_laplacian_eigenvalues(const Graph& g, double zero_tol = 1e-9) {
    std::vector<double> out;
    for (const auto& z : eigenvalues(laplacian(g)))
        if (z.real() > zero_tol) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Standing-assumption checks
// ---------------------------------------------------------------------------

struct AssumptionCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    std::string to_string() const {
        std::string s;
        for (const auto& c : checks)
            s += std::string(c.pass ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
        return s;
    }
};

/// Checks the standing assumptions at the box vertices plus the center
/// (a sampling certificate, not a proof over the continuum):
///  - spectrum of S has nonnegative real parts,
///  - the communication graph is connected,
///  - A1(w) Hurwitz and b(w) > 0 at each sample.
inline AssumptionReport validate_assumptions(const UncertainPlant& plant, const Exosystem& exo,
                                             const Graph& graph,
                                             const std::vector<std::vector<double>>& extra_samples = {}) {
    AssumptionReport rep;

    double min_re = std::numeric_limits<double>::infinity();
    for (const auto& z : eigenvalues(exo.S)) min_re = std::min(min_re, z.real());
    rep.checks.push_back({"exosystem spectrum nonnegative", min_re >= -1e-9,
                          "min Re(eig S) = " + std::to_string(min_re)});

    const double lambda2 = algebraic_connectivity(graph);
    rep.checks.push_back({"graph connected",
                          graph.N == 1 || lambda2 > 1e-9,
                          "lambda2 = " + std::to_string(lambda2)});

    std::vector<std::vector<double>> samples = plant.W.vertices();
    samples.push_back(plant.W.center());
    samples.insert(samples.end(), extra_samples.begin(), extra_samples.end());

    bool minimum_phase = true, control_dir = true;
    std::string mp_detail = "A1(w) Hurwitz at all " + std::to_string(samples.size()) + " samples";
    std::string cd_detail = "b(w) > 0 at all " + std::to_string(samples.size()) + " samples";
    for (const auto& w : samples) {
        const Matrix a1 = plant.A1.at(w);
        if (!a1.empty() && !is_hurwitz(a1)) {
            minimum_phase = false;
            mp_detail = "A1(w) not Hurwitz at w = " + Matrix::row_vector(w).to_string();
        }
        if (plant.b.at(w) <= 0.0) {
            control_dir = false;
            cd_detail = "b(w) <= 0 at w = " + Matrix::row_vector(w).to_string();
        }
    }
    rep.checks.push_back({"minimum phase over W", minimum_phase, mp_detail});
    rep.checks.push_back({"positive control direction over W", control_dir, cd_detail});
    return rep;
}

} // namespace parreg
