#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "parreg/analysis.hpp"
#include "parreg/config.hpp"
#include "parreg/sim.hpp"

namespace parreg {

// ---------------------------------------------------------------------------
// Orchestration: validate -> synthesize -> certify -> simulate -> metrics.
// ---------------------------------------------------------------------------

struct Synthesis {
    InternalModel im;
    ObserverSpec obs;
};

inline Synthesis synthesize(const ExampleSystem& sys) {
    Synthesis sy;
    sy.im = build_internal_model(sys.exo, sys.M1, sys.N1, sys.M2, sys.N2);
    sy.obs = build_observer(sys.deltas, sys.gains.hbar, sys.plant.r);
    return sy;
}

inline ClosedLoopSystem build_closed_loop(const ExampleSystem& sys, const Synthesis& sy,
                                          std::span<const double> w) {
    ClosedLoopSystem cl = ClosedLoopSystem::build(sys.plant, sys.exo, sys.actuator, sys.graph,
                                                  sy.im, sy.obs, sys.gains, w);
    cl.name = sys.name;
    return cl;
}

/// Uncertainty draw for a simulation run, per the configured policy. The
/// vertex policy picks a seeded random box vertex (worst-case flavored).
inline std::vector<double> pick_uncertainty(const ExperimentConfig& cfg) {
    const Box& box = cfg.system.plant.W;
    switch (cfg.sim.w_policy) {
        case SimulationSettings::WPolicy::Center: return box.center();
        case SimulationSettings::WPolicy::Explicit: return cfg.sim.w_explicit;
        case SimulationSettings::WPolicy::Vertex: {
            Rng rng(cfg.sim.seed ^ 0x9e3779b97f4a7c15ull);
            if (box.dim() == 0) return {};
            return box.vertex(rng.integer(box.vertex_count()));
        }
    }
    return box.center();
}

inline SamplingPolicy default_sampling(const Box& box) {
    SamplingPolicy sp;
    if (box.dim() <= 8) {
        sp.mode = SamplingPolicy::Mode::AllVertices;
    } else {
        sp.mode = SamplingPolicy::Mode::RandomVertices;
        sp.random_count = 64;
    }
    return sp;
}

struct PipelineOptions {
    bool force = false;          // simulate even when certification fails
    bool write_files = true;
    bool keep_trajectory = false;
    double error_threshold = 0.02;
    double sharing_threshold = 0.02;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt, horizon;
    std::optional<std::string> w_override; // "vertex" | "center" | "v1,v2,..."
    std::optional<std::size_t> decimate;
};

struct PipelineResult {
    AssumptionReport assumptions;
    CertificationReport certification;
    Metrics run_metrics;
    std::vector<double> w_used;
    std::uint64_t seed = 0;
    bool thresholds_ok = false;
    bool simulated = false;
    std::string trajectory_path, certification_path, metrics_path;
    std::optional<Trajectory> trajectory;
};

namespace pipeline_detail {

inline void apply_overrides(ExperimentConfig& cfg, const PipelineOptions& opt) {
    if (opt.seed) cfg.sim.seed = *opt.seed;
    if (opt.dt) cfg.sim.dt = *opt.dt;
    if (opt.horizon) cfg.sim.horizon = *opt.horizon;
    if (opt.decimate) cfg.sim.decimate = *opt.decimate;
    if (opt.out_dir) cfg.output.dir = *opt.out_dir;
    if (opt.w_override) {
        const std::string& w = *opt.w_override;
        if (w == "vertex") {
            cfg.sim.w_policy = SimulationSettings::WPolicy::Vertex;
        } else if (w == "center") {
            cfg.sim.w_policy = SimulationSettings::WPolicy::Center;
        } else {
            cfg.sim.w_policy = SimulationSettings::WPolicy::Explicit;
            cfg.sim.w_explicit.clear();
            std::string tok;
            std::istringstream is(w);
            while (std::getline(is, tok, ','))
                if (!cfg_detail::trim(tok).empty())
                    cfg.sim.w_explicit.push_back(std::stod(tok));
            if (cfg.sim.w_explicit.size() != cfg.system.plant.W.dim())
                throw ConfigMismatch("explicit w override has wrong dimension");
        }
    }
}

inline std::string metrics_summary(const ExperimentConfig& cfg, const PipelineResult& res) {
    std::ostringstream os;
    os << "experiment = " << cfg.system.name << "\n";
    os << "seed = " << res.seed << "\n";
    os << "w = " << cfg_detail::fmt(res.w_used) << "\n";
    os << "dt = " << cfg_detail::fmt(cfg.sim.dt) << "\n";
    os << "horizon = " << cfg_detail::fmt(cfg.sim.horizon) << "\n";
    os << "v0 = " << cfg_detail::fmt(cfg.sim.v0) << "\n";
    os << "certified = " << (res.certification.pass ? "true" : "false") << "\n";
    if (res.simulated) {
        os << "tail_max_error = " << cfg_detail::fmt(res.run_metrics.tail_max_error) << "\n";
        os << "tail_max_sharing = " << cfg_detail::fmt(res.run_metrics.tail_max_sharing) << "\n";
        os << "settled = " << (res.run_metrics.settled ? "true" : "false") << "\n";
        os << "settling_time = " << cfg_detail::fmt(res.run_metrics.settling_time) << "\n";
        os << "error_energy = " << cfg_detail::fmt(res.run_metrics.error_energy) << "\n";
        os << "input_energy = " << cfg_detail::fmt(res.run_metrics.input_energy) << "\n";
        os << "thresholds_ok = " << (res.thresholds_ok ? "true" : "false") << "\n";
    }
    return os.str();
}

} // namespace pipeline_detail

/// Full experiment pipeline. Refuses to simulate when certification fails,
/// unless `force` is set; assumption failures always stop the run.
inline PipelineResult run_pipeline(ExperimentConfig cfg, const PipelineOptions& opt = {}) {
    pipeline_detail::apply_overrides(cfg, opt);
    const ExampleSystem& sys = cfg.system;

    PipelineResult res;
    res.seed = cfg.sim.seed;

    res.assumptions = validate_assumptions(sys.plant, sys.exo, sys.graph);
    if (!res.assumptions.all_pass())
        throw CertificationFailed("standing assumptions failed:\n" + res.assumptions.to_string());

    const Synthesis sy = synthesize(sys);
    res.certification = certify(sys.plant, sys.exo, sys.actuator, sys.graph, sy.im, sy.obs,
                                sys.gains, default_sampling(sys.plant.W));

    namespace fs = std::filesystem;
    if (opt.write_files) {
        fs::create_directories(cfg.output.dir);
        res.certification_path =
            (fs::path(cfg.output.dir) / (sys.name + "_certification.txt")).string();
        std::ofstream cf(res.certification_path);
        cf << res.certification.to_text();
    }
    if (!res.certification.pass && !opt.force) return res;

    res.w_used = pick_uncertainty(cfg);
    const ClosedLoopSystem cl = build_closed_loop(sys, sy, res.w_used);
    Rng rng(cfg.sim.seed);
    const auto x0 = random_initial_state(cl.layout, cfg.sim.v0, rng, cfg.sim.ic_range);
    Trajectory traj = simulate(cl, x0, cfg.sim.dt, cfg.sim.horizon);
    res.run_metrics = metrics(traj, opt.error_threshold);
    res.simulated = true;
    res.thresholds_ok = res.run_metrics.tail_max_error < opt.error_threshold &&
                        (sys.actuator.N == 1 ||
                         res.run_metrics.tail_max_sharing < opt.sharing_threshold);

    if (opt.write_files) {
        res.trajectory_path = (fs::path(cfg.output.dir) / (sys.name + "_trajectory.csv")).string();
        std::ofstream tf(res.trajectory_path);
        write_trajectory_csv(tf, traj, cfg.sim.decimate, cfg.output.full_state);
        res.metrics_path = (fs::path(cfg.output.dir) / (sys.name + "_metrics.txt")).string();
        std::ofstream mf(res.metrics_path);
        mf << pipeline_detail::metrics_summary(cfg, res);
    }
    if (opt.keep_trajectory) res.trajectory = std::move(traj);
    return res;
}

inline PipelineResult run_example(const std::string& name, const PipelineOptions& opt = {}) {
    return run_pipeline(builtin_config(name), opt);
}

} // namespace parreg
