#pragma once

#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "parreg/presets.hpp"

namespace parreg {

// ---------------------------------------------------------------------------
// Experiment configuration: system description + run settings, loadable from
// a flat key = value text file with matrix literals ("[0 1; -1 0]") so the
// numbers can be transcribed and checked by eye.
// ---------------------------------------------------------------------------

struct SimulationSettings {
    double dt = 1e-3;
    double horizon = 30.0;
    std::uint64_t seed = 1;
    enum class WPolicy { Vertex, Center, Explicit } w_policy = WPolicy::Vertex;
    std::vector<double> w_explicit;
    std::vector<double> v0;
    double ic_range = 3.0;
    std::size_t decimate = 10;
};

struct OutputSettings {
    std::string dir = "out";
    bool full_state = false;
};

struct ExperimentConfig {
    ExampleSystem system;
    SimulationSettings sim;
    OutputSettings output;
};

namespace cfg_detail {

struct RawValue {
    std::string text;
    int line = 0;
};

using RawMap = std::map<std::string, RawValue>; // "section.key" -> value

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline RawMap tokenize(std::istream& in) {
    RawMap raw;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigParse("unterminated section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigParse("empty section name", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigParse("expected key = value", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigParse("empty key", line_no);
        if (section.empty()) throw ConfigParse("key outside any [section]", line_no);
        const std::string full = section + "." + key;
        if (raw.count(full)) throw ConfigParse("duplicate key '" + full + "'", line_no);
        raw[full] = {val, line_no};
    }
    return raw;
}

inline double parse_number(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigParse("expected a number, got '" + s + "'", line);
    }
}

inline std::vector<double> parse_vector(const std::string& s, int line) {
    std::string body = trim(s);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
        throw ConfigParse("expected a [bracketed] vector, got '" + s + "'", line);
    body = body.substr(1, body.size() - 2);
    for (auto& ch : body)
        if (ch == ',') ch = ' ';
    std::istringstream is(body);
    std::vector<double> v;
    std::string tok;
    while (is >> tok) v.push_back(parse_number(tok, line));
    return v;
}

inline Matrix parse_matrix(const std::string& s, int line) {
    std::string body = trim(s);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
        throw ConfigParse("expected a [bracketed] matrix, got '" + s + "'", line);
    body = body.substr(1, body.size() - 2);
    std::vector<std::vector<double>> rows;
    std::string row_text;
    std::istringstream rows_in(body);
    while (std::getline(rows_in, row_text, ';')) {
        for (auto& ch : row_text)
            if (ch == ',') ch = ' ';
        std::istringstream is(row_text);
        std::vector<double> row;
        std::string tok;
        while (is >> tok) row.push_back(parse_number(tok, line));
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) return Matrix(0, 0);
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols())
            throw ConfigParse("ragged matrix literal", line);
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

class Reader {
public:
    explicit Reader(RawMap raw) : raw_(std::move(raw)) {}

    bool has(const std::string& key) const { return raw_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        auto it = raw_.find(key);
        if (it == raw_.end()) return fallback;
        consumed_.insert({key, true});
        return it->second.text;
    }

    double num(const std::string& key) {
        auto it = require(key);
        return parse_number(it->second.text, it->second.line);
    }
    double num(const std::string& key, double fallback) {
        return has(key) ? num(key) : fallback;
    }

    std::vector<double> vec(const std::string& key) {
        auto it = require(key);
        return parse_vector(it->second.text, it->second.line);
    }
    std::vector<double> vec(const std::string& key, std::vector<double> fallback) {
        return has(key) ? vec(key) : fallback;
    }

    Matrix mat(const std::string& key) {
        auto it = require(key);
        return parse_matrix(it->second.text, it->second.line);
    }
    Matrix mat(const std::string& key, Matrix fallback) {
        return has(key) ? mat(key) : fallback;
    }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        auto it = require(key);
        const std::string& t = it->second.text;
        if (t == "true" || t == "1" || t == "yes") return true;
        if (t == "false" || t == "0" || t == "no") return false;
        throw ConfigParse("expected a boolean, got '" + t + "'", it->second.line);
    }

    int line_of(const std::string& key) const {
        auto it = raw_.find(key);
        return it == raw_.end() ? 0 : it->second.line;
    }

    // affine deltas: collect "<key>.dwK" entries into a delta list
    std::vector<Matrix> matrix_deltas(const std::string& key, std::size_t nw, std::size_t rows,
                                      std::size_t cols) {
        std::vector<Matrix> deltas(nw);
        for (std::size_t k = 1; k <= nw; ++k) {
            const std::string dk = key + ".dw" + std::to_string(k);
            if (!has(dk)) continue;
            Matrix d = mat(dk);
            if (d.rows() != rows || d.cols() != cols)
                throw ConfigParse("delta '" + dk + "' has the wrong shape", line_of(dk));
            deltas[k - 1] = std::move(d);
        }
        return deltas;
    }

    std::vector<double> scalar_deltas(const std::string& key, std::size_t nw) {
        std::vector<double> deltas(nw, 0.0);
        bool any = false;
        for (std::size_t k = 1; k <= nw; ++k) {
            const std::string dk = key + ".dw" + std::to_string(k);
            if (!has(dk)) continue;
            deltas[k - 1] = num(dk);
            any = true;
        }
        if (!any) deltas.clear();
        return deltas;
    }

    void check_all_consumed() const {
        for (const auto& [key, rv] : raw_)
            if (!consumed_.count(key)) throw ConfigParse("unknown key '" + key + "'", rv.line);
    }

private:
    RawMap::const_iterator require(const std::string& key) {
        auto it = raw_.find(key);
        if (it == raw_.end()) throw ConfigParse("missing required key '" + key + "'", 0);
        consumed_.insert({key, true});
        return it;
    }

    RawMap raw_;
    std::map<std::string, bool> consumed_;
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
    return s + "]";
}

inline std::string fmt(const Matrix& m) {
    std::string s = "[";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (i) s += "; ";
        for (std::size_t j = 0; j < m.cols(); ++j) s += (j ? " " : "") + fmt(m(i, j));
    }
    return s + "]";
}

} // namespace cfg_detail

inline ExperimentConfig parse_config(std::istream& in) {
    using namespace cfg_detail;
    Reader rd(tokenize(in));
    ExperimentConfig cfg;
    ExampleSystem& sys = cfg.system;

    sys.name = rd.str("experiment.name", "custom");

    // plant
    const auto n = static_cast<std::size_t>(rd.num("plant.n"));
    const auto r = static_cast<std::size_t>(rd.num("plant.r"));
    const auto nw = static_cast<std::size_t>(rd.num("plant.nw"));
    if (r < 1 || r > n) throw ConfigParse("plant.r must satisfy 1 <= r <= n", rd.line_of("plant.r"));
    UncertainPlant& p = sys.plant;
    p.n = n;
    p.r = r;
    const std::size_t nz = n - r;
    p.W.lo = rd.vec("plant.w_lo", std::vector<double>(nw, 0.0));
    p.W.hi = rd.vec("plant.w_hi", std::vector<double>(nw, 0.0));
    if (p.W.lo.size() != nw || p.W.hi.size() != nw)
        throw ConfigParse("w_lo/w_hi must have plant.nw entries", rd.line_of("plant.w_lo"));

    // exosystem first: fixes q for the plant input matrices
    sys.exo = Exosystem::from_matrix(rd.mat("exosystem.S"));
    const std::size_t q = sys.exo.q();

    auto load_affine = [&](const char* key, std::size_t rows, std::size_t cols) {
        UncertainMatrixAffine m;
        m.base = rd.mat(std::string("plant.") + key, Matrix(rows, cols));
        if (m.base.rows() != rows || m.base.cols() != cols) {
            if (m.base.empty() && (rows == 0 || cols == 0)) {
                m.base = Matrix(rows, cols);
            } else {
                throw ConfigParse(std::string("plant.") + key + " has the wrong shape",
                                  rd.line_of(std::string("plant.") + key));
            }
        }
        m.deltas = rd.matrix_deltas(std::string("plant.") + key, nw, rows, cols);
        return m;
    };
    p.A1 = load_affine("A1", nz, nz);
    p.A2 = load_affine("A2", nz, 1);
    p.A3 = load_affine("A3", 1, nz);
    p.E0 = load_affine("E0", nz, q);
    p.Er = load_affine("Er", 1, q);
    p.F = load_affine("F", 1, q);
    p.c.resize(r);
    for (std::size_t s = 1; s <= r; ++s) {
        const std::string key = "plant.c" + std::to_string(s);
        p.c[s - 1].base = rd.num(key);
        p.c[s - 1].deltas = rd.scalar_deltas(key, nw);
    }
    p.b.base = rd.num("plant.b");
    p.b.deltas = rd.scalar_deltas("plant.b", nw);

    // actuators and graph
    sys.actuator.a = rd.num("actuators.a");
    sys.actuator.b_a = rd.num("actuators.b_a");
    sys.actuator.N = static_cast<std::size_t>(rd.num("actuators.count", 1));
    if (sys.actuator.b_a <= 0)
        throw ConfigParse("actuators.b_a must be positive", rd.line_of("actuators.b_a"));

    const std::string topology = rd.str("graph.topology", sys.actuator.N == 1 ? "single" : "ring");
    const double weight = rd.num("graph.weight", 1.0);
    if (topology == "single") {
        if (sys.actuator.N != 1)
            throw ConfigParse("graph.topology = single requires one actuator",
                              rd.line_of("graph.topology"));
        sys.graph = Graph::single();
    } else if (topology == "ring") {
        sys.graph = Graph::ring(sys.actuator.N, weight);
    } else if (topology == "complete") {
        sys.graph = Graph::complete(sys.actuator.N, weight);
    } else if (topology == "custom") {
        sys.graph = Graph::custom(rd.mat("graph.adjacency"));
        if (sys.graph.N != sys.actuator.N)
            throw ConfigParse("graph.adjacency size must match actuators.count",
                              rd.line_of("graph.adjacency"));
    } else {
        throw ConfigParse("unknown graph.topology '" + topology + "'", rd.line_of("graph.topology"));
    }

    // internal model
    sys.M1 = rd.mat("internal_model.M1");
    sys.N1 = rd.mat("internal_model.N1");
    sys.M2 = rd.mat("internal_model.M2", sys.M1);
    sys.N2 = rd.mat("internal_model.N2", sys.N1);

    // controller
    sys.gammas = rd.vec("controller.gammas", {});
    if (sys.gammas.size() + 1 != r)
        throw ConfigParse("controller.gammas must have r - 1 entries",
                          rd.line_of("controller.gammas"));
    sys.deltas = rd.vec("controller.deltas");
    if (sys.deltas.size() != r)
        throw ConfigParse("controller.deltas must have r entries", rd.line_of("controller.deltas"));
    {
        const double k1 = rd.num("controller.k1");
        const double k2 = rd.num("controller.k2");
        const double h = rd.num("controller.h");
        GainSet g = gains_from_single(k1, k2, h, sys.actuator.N, sys.gammas,
                                      rd.num("controller.sigma1", 1.0),
                                      rd.num("controller.sigma2", 1.0));
        // explicit distributed overrides win over the k1/N rule
        g.kbar1 = rd.num("controller.kbar1", g.kbar1);
        g.kbar2 = rd.num("controller.kbar2", g.kbar2);
        g.hbar = rd.num("controller.hbar", g.hbar);
        g.validate();
        sys.gains = g;
    }

    // simulation + output
    cfg.sim.dt = rd.num("simulation.dt", 1e-3);
    cfg.sim.horizon = rd.num("simulation.horizon", 30.0);
    cfg.sim.seed = static_cast<std::uint64_t>(rd.num("simulation.seed", 1));
    const std::string wp = rd.str("simulation.w_policy", "vertex");
    if (wp == "vertex") cfg.sim.w_policy = SimulationSettings::WPolicy::Vertex;
    else if (wp == "center") cfg.sim.w_policy = SimulationSettings::WPolicy::Center;
    else if (wp == "explicit") cfg.sim.w_policy = SimulationSettings::WPolicy::Explicit;
    else throw ConfigParse("unknown simulation.w_policy '" + wp + "'", rd.line_of("simulation.w_policy"));
    cfg.sim.w_explicit = rd.vec("simulation.w", {});
    if (cfg.sim.w_policy == SimulationSettings::WPolicy::Explicit &&
        cfg.sim.w_explicit.size() != nw)
        throw ConfigParse("simulation.w must have plant.nw entries", rd.line_of("simulation.w"));
    cfg.sim.v0 = rd.vec("simulation.v0", std::vector<double>(q, 0.0));
    if (cfg.sim.v0.size() != q)
        throw ConfigParse("simulation.v0 must match the exosystem dimension",
                          rd.line_of("simulation.v0"));
    cfg.sim.ic_range = rd.num("simulation.ic_range", 3.0);
    cfg.sim.decimate = static_cast<std::size_t>(rd.num("simulation.decimate", 10));
    cfg.output.dir = rd.str("output.dir", "out");
    cfg.output.full_state = rd.flag("output.full_state", false);
    sys.v0 = cfg.sim.v0;

    rd.check_all_consumed();

    if (cfg.sim.dt <= 0) throw ConfigParse("simulation.dt must be positive", rd.line_of("simulation.dt"));
    if (cfg.sim.horizon <= 0)
        throw ConfigParse("simulation.horizon must be positive", rd.line_of("simulation.horizon"));
    return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline void dump_config(std::ostream& os, const ExperimentConfig& cfg) {
    using cfg_detail::fmt;
    const ExampleSystem& sys = cfg.system;
    const UncertainPlant& p = sys.plant;
    const std::size_t nw = p.W.dim();

    os << "[experiment]\n";
    os << "name = " << sys.name << "\n\n";

    os << "[plant]\n";
    os << "n = " << p.n << "\n";
    os << "r = " << p.r << "\n";
    os << "nw = " << nw << "\n";
    os << "w_lo = " << fmt(p.W.lo) << "\n";
    os << "w_hi = " << fmt(p.W.hi) << "\n";
    auto dump_affine = [&](const char* key, const UncertainMatrixAffine& m) {
        os << key << " = " << fmt(m.base) << "\n";
        for (std::size_t k = 0; k < m.deltas.size(); ++k)
            if (!m.deltas[k].empty() && m.deltas[k].max_abs() != 0.0)
                os << key << ".dw" << (k + 1) << " = " << fmt(m.deltas[k]) << "\n";
    };
    dump_affine("A1", p.A1);
    dump_affine("A2", p.A2);
    dump_affine("A3", p.A3);
    dump_affine("E0", p.E0);
    dump_affine("Er", p.Er);
    dump_affine("F", p.F);
    for (std::size_t s = 0; s < p.c.size(); ++s) {
        os << "c" << (s + 1) << " = " << fmt(p.c[s].base) << "\n";
        for (std::size_t k = 0; k < p.c[s].deltas.size(); ++k)
            if (p.c[s].deltas[k] != 0.0)
                os << "c" << (s + 1) << ".dw" << (k + 1) << " = " << fmt(p.c[s].deltas[k]) << "\n";
    }
    os << "b = " << fmt(p.b.base) << "\n";
    for (std::size_t k = 0; k < p.b.deltas.size(); ++k)
        if (p.b.deltas[k] != 0.0) os << "b.dw" << (k + 1) << " = " << fmt(p.b.deltas[k]) << "\n";

    os << "\n[exosystem]\n";
    os << "S = " << fmt(sys.exo.S) << "\n";

    os << "\n[actuators]\n";
    os << "a = " << fmt(sys.actuator.a) << "\n";
    os << "b_a = " << fmt(sys.actuator.b_a) << "\n";
    os << "count = " << sys.actuator.N << "\n";

    os << "\n[graph]\n";
    if (sys.actuator.N == 1) {
        os << "topology = single\n";
    } else {
        os << "topology = custom\n";
        os << "adjacency = " << fmt(sys.graph.weights) << "\n";
    }

    os << "\n[internal_model]\n";
    os << "M1 = " << fmt(sys.M1) << "\n";
    os << "N1 = " << fmt(sys.N1) << "\n";
    os << "M2 = " << fmt(sys.M2) << "\n";
    os << "N2 = " << fmt(sys.N2) << "\n";

    os << "\n[controller]\n";
    os << "gammas = " << fmt(sys.gammas) << "\n";
    os << "deltas = " << fmt(sys.deltas) << "\n";
    os << "k1 = " << fmt(sys.gains.k1) << "\n";
    os << "k2 = " << fmt(sys.gains.k2) << "\n";
    os << "h = " << fmt(sys.gains.h) << "\n";
    os << "kbar1 = " << fmt(sys.gains.kbar1) << "\n";
    os << "kbar2 = " << fmt(sys.gains.kbar2) << "\n";
    os << "hbar = " << fmt(sys.gains.hbar) << "\n";
    os << "sigma1 = " << fmt(sys.gains.sigma1) << "\n";
    os << "sigma2 = " << fmt(sys.gains.sigma2) << "\n";

    os << "\n[simulation]\n";
    os << "dt = " << fmt(cfg.sim.dt) << "\n";
    os << "horizon = " << fmt(cfg.sim.horizon) << "\n";
    os << "seed = " << cfg.sim.seed << "\n";
    const char* wp = cfg.sim.w_policy == SimulationSettings::WPolicy::Vertex     ? "vertex"
                     : cfg.sim.w_policy == SimulationSettings::WPolicy::Center   ? "center"
                                                                                 : "explicit";
    os << "w_policy = " << wp << "\n";
    if (!cfg.sim.w_explicit.empty()) os << "w = " << fmt(cfg.sim.w_explicit) << "\n";
    os << "v0 = " << fmt(cfg.sim.v0) << "\n";
    os << "ic_range = " << fmt(cfg.sim.ic_range) << "\n";
    os << "decimate = " << cfg.sim.decimate << "\n";

    os << "\n[output]\n";
    os << "dir = " << cfg.output.dir << "\n";
    os << "full_state = " << (cfg.output.full_state ? "true" : "false") << "\n";
}

/// Built-in experiment configurations for the shipped examples.
inline ExperimentConfig builtin_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.system = builtin_example(name);
    cfg.sim.v0 = cfg.system.v0;
    return cfg;
}

} // namespace parreg
