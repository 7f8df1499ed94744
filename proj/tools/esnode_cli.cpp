#include "esnode/experiments.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace esnode;

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "experiment config (YAML) or a run manifest")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "overrides every seed in the config");
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--threads", args.threads, "worker threads for per-IC work and BO batches");
}

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    if (args.seed) override_seed(cfg, *args.seed);
    if (!args.out.empty()) override_out(cfg, args.out);
    if (args.threads) override_threads(cfg, *args.threads);
    return cfg;
}

void expect_class(const ExperimentConfig& cfg, ProblemClass want, const char* cmd) {
    if (cfg.problem != want)
        raise(ErrorKind::Config, std::string(cmd) + " needs problem class '" + problem_class_name(want) +
                                     "', config has '" + problem_class_name(cfg.problem) + "'");
}

double ms(double seconds) { return std::round(seconds * 1e6) / 1e3; }

YAML::Node solve_summary(const ExperimentConfig& cfg, const RcRun& run) {
    YAML::Node s;
    s["ics"] = static_cast<long>(run.result.solutions.size());
    s["grid_points"] = static_cast<long>(run.result.times.size());
    s["realized_seed"] = run.result.hyper.random_seed;
    double worst = 0.0;
    for (Index j = 0; j < run.result.solutions.front().residual.cols(); ++j) {
        const Vector r = rmsr(residual_table(run.result.solutions, j));
        worst = std::max(worst, r.maxCoeff());
    }
    s["max_rmsr"] = worst;
    if (!run.traces.empty()) {
        YAML::Node best(YAML::NodeType::Sequence);
        for (const auto& t : run.traces)
            if (!t.loss_per_epoch.empty()) best.push_back(t.best_loss);
        if (best.size() > 0) s["best_loss"] = best;
    }
    if (cfg.problem == ProblemClass::System && !run.energy_violation.empty()) {
        YAML::Node ev(YAML::NodeType::Sequence);
        for (std::size_t i = 0; i < run.energy_violation.size(); ++i)
            if (run.energy_violation[i].size() > 0)
                ev.push_back(run.energy_violation[i].maxCoeff() / std::max(std::abs(run.energy[i]), 1e-300));
        s["max_relative_energy_violation"] = ev;
    }
    if (!run.result.warnings.empty()) {
        YAML::Node w(YAML::NodeType::Sequence);
        for (const auto& msg : run.result.warnings) w.push_back(msg);
        s["warnings"] = w;
    }
    return s;
}

void finish(const ExperimentConfig& cfg, const std::string& command, const ResolvedHyper& hp,
            const YAML::Node& summary, std::vector<std::string> files) {
    if (hp.tuning) {
        const auto h = write_history(cfg, *hp.tuning, cfg.out_dir);
        files.insert(files.end(), h.begin(), h.end());
    }
    if (cfg.plots) {
        const auto f = emit_figures(cfg.out_dir);
        files.insert(files.end(), f.begin(), f.end());
    }
    write_manifest(cfg.out_dir, command, cfg, hp, summary, files);
}

int run_solve(const CommonArgs& args, ProblemClass cls, const std::string& command) {
    ExperimentConfig cfg = load(args);
    expect_class(cfg, cls, command.c_str());
    const ResolvedHyper hp = resolve_hyperparameters(cfg);
    const RcRun run = run_rc(cfg, hp);
    const auto files = write_rc_outputs(cfg, run, cfg.out_dir);
    const YAML::Node summary = solve_summary(cfg, run);
    finish(cfg, command, hp, summary, files);
    for (const auto& w : run.result.warnings) std::cerr << "warning: " << w << '\n';
    std::printf("%s: %zu ICs, %ld grid points, max RMSR %.3e, declare %.3f ms, fit %.3f ms -> %s\n",
                command.c_str(), run.result.solutions.size(), static_cast<long>(run.result.times.size()),
                summary["max_rmsr"].as<double>(), ms(run.timing.declare_seconds),
                ms(run.timing.first_fit_seconds + run.timing.extra_fit_seconds), cfg.out_dir.c_str());
    return 0;
}

int run_hyperopt(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    if (cfg.bo.max_evals <= 0) raise(ErrorKind::Config, "bo.max_evals must be positive");
    if (cfg.space.dims.empty()) raise(ErrorKind::Config, "hyperopt needs a search_space");
    cfg.optimize_hyper = true;
    const ResolvedHyper hp = resolve_hyperparameters(cfg);
    YAML::Node summary;
    summary["evaluations"] = static_cast<long>(hp.tuning->bo.history.size());
    summary["best_objective"] = hp.tuning->bo.best_objective;
    summary["best_index"] = static_cast<long>(hp.tuning->bo.best_index);
    summary["terminated_by_side"] = hp.tuning->bo.terminated_by_side;
    YAML::Node best;
    for (std::size_t i = 0; i < cfg.space.dims.size(); ++i)
        best[cfg.space.dims[i].name] = hp.tuning->bo.best_values[i];
    summary["best"] = best;
    finish(cfg, "hyperopt", hp, summary, {});
    std::printf("hyperopt: %zu evaluations, best objective %.6g in %.1f s -> %s\n",
                hp.tuning->bo.history.size(), hp.tuning->bo.best_objective, hp.tuning_seconds,
                cfg.out_dir.c_str());
    return 0;
}

int run_compare(const CommonArgs& args) {
    const ExperimentConfig cfg = load(args);
    const ResolvedHyper hp = resolve_hyperparameters(cfg);
    const ComparisonReport rep = compare(cfg, hp);
    auto files = write_rc_outputs(cfg, rep.rc, cfg.out_dir);
    const auto cf = write_comparison(rep, cfg.out_dir);
    files.insert(files.end(), cf.begin(), cf.end());
    YAML::Node summary = solve_summary(cfg, rep.rc);
    summary["reference"] = rep.reference;
    for (const auto& m : rep.methods) summary["rms_error"][m.method] = m.rms_error_overall;
    finish(cfg, "compare", hp, summary, files);
    std::printf("%-8s %12s %12s %14s %14s\n", "method", "declare_ms", "fit_ms", "per_ic_ms", "rms_error");
    for (const auto& m : rep.methods)
        std::printf("%-8s %12.3f %12.3f %14.3f %14.3e\n", m.method.c_str(), ms(m.declare_seconds),
                    ms(m.fit_seconds), ms(m.per_ic_seconds), m.rms_error_overall);
    return 0;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Io: return 3;
        case ErrorKind::SingularCoefficient: return 4;
        case ErrorKind::NonFiniteState:
        case ErrorKind::NonFinite:
        case ErrorKind::NonFiniteLoss: return 5;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Echo-state reservoir ODE solver"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonArgs linear_args, bern_args, sys_args, hpo_args, cmp_args;
    std::string fig_dir;
    auto* linear = app.add_subcommand("solve-linear", "closed-form readout for a linear first-order ODE");
    add_common(linear, linear_args);
    auto* bern = app.add_subcommand("solve-bernoulli", "linearized start plus gradient descent for a Bernoulli ODE");
    add_common(bern, bern_args);
    auto* sys = app.add_subcommand("solve-system", "gradient-descent readout for a nonlinear system");
    add_common(sys, sys_args);
    auto* hpo = app.add_subcommand("hyperopt", "trust-region Bayesian optimization of the hyperparameters");
    add_common(hpo, hpo_args);
    auto* cmp = app.add_subcommand("compare", "RC solve against a classical integrator");
    add_common(cmp, cmp_args);
    auto* figs = app.add_subcommand("emit-figures", "write gnuplot scripts for the CSVs in a directory");
    figs->add_option("--dir", fig_dir, "output directory of an earlier run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*linear) return run_solve(linear_args, ProblemClass::Linear, "solve-linear");
        if (*bern) return run_solve(bern_args, ProblemClass::Bernoulli, "solve-bernoulli");
        if (*sys) return run_solve(sys_args, ProblemClass::System, "solve-system");
        if (*hpo) return run_hyperopt(hpo_args);
        if (*cmp) return run_compare(cmp_args);
        if (*figs) {
            for (const auto& f : emit_figures(fig_dir)) std::printf("%s\n", f.c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "esnode: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "esnode: %s\n", e.what());
        return 1;
    }
    return 0;
}
