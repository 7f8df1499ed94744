#include "esnode/experiments.hpp"
#include "esnode/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace esnode {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string ic_tag(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    return buf;
}

Index output_dim(const ExperimentConfig& cfg) {
    return cfg.problem == ProblemClass::System ? cfg.system.system->dim() : 1;
}

std::vector<std::string> output_names(const ExperimentConfig& cfg) {
    const Index r = output_dim(cfg);
    if (r == 1) return {"y"};
    if (r == 2) return {"x", "p"};
    std::vector<std::string> out;
    for (Index j = 0; j < r; ++j) out.push_back("y" + std::to_string(j));
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_trace(const std::string& dir, const std::string& name, const TrainTrace& trace,
                 std::vector<std::string>& files) {
    if (trace.loss_per_epoch.empty()) return;
    const auto n = static_cast<Index>(trace.loss_per_epoch.size());
    Vector epoch(n), loss(n), lr(n);
    for (Index e = 0; e < n; ++e) {
        epoch(e) = static_cast<double>(e);
        loss(e) = trace.loss_per_epoch[static_cast<std::size_t>(e)];
        lr(e) = trace.lr_per_epoch[static_cast<std::size_t>(e)];
    }
    write_csv(join(dir, name), make_table({"epoch", "loss", "lr"}, {epoch, loss, lr}));
    files.push_back(name);
}

// Root mean square over rows of an L x K block.
double rms(const Matrix& m) {
    return m.size() == 0 ? 0.0 : std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
}

}  // namespace

YAML::Node hyper_to_yaml(const HyperParams& hp) {
    YAML::Node n;
    n["dt"] = hp.dt;
    n["n_nodes"] = hp.n_nodes;
    n["connectivity"] = hp.connectivity;
    n["spectral_radius"] = hp.spectral_radius;
    n["regularization"] = hp.regularization;
    n["leaking_rate"] = hp.leaking_rate;
    n["bias"] = hp.bias;
    n["activation"] = activation_name(hp.activation);
    n["n_transient"] = hp.n_transient;
    n["random_state"] = hp.random_seed;
    return n;
}

YAML::Node gd_to_yaml(const GDConfig& gd) {
    YAML::Node n;
    n["epochs"] = gd.epochs;
    n["learning_rate"] = gd.learning_rate;
    n["spikethreshold"] = gd.spike_threshold;
    n["gamma"] = gd.gamma;
    if (gd.gamma_cyclic) n["gamma_cyclic"] = *gd.gamma_cyclic;
    else n["gamma_cyclic"] = "none";
    n["cyclic_cap_epochs"] = gd.cyclic_cap_epochs;
    n["cyclic_period"] = gd.cyclic_period;
    n["cyclic_floor"] = gd.cyclic_floor;
    n["enet_alpha"] = gd.enet_alpha;
    n["enet_strength"] = gd.enet_strength;
    n["momentum"] = gd.momentum;
    n["preconditioner"] = gd.preconditioner == Preconditioner::Gram ? "gram" : "none";
    n["precondition_ridge"] = gd.precondition_ridge;
    return n;
}

std::unique_ptr<TuningTarget> make_target(const ExperimentConfig& cfg) {
    switch (cfg.problem) {
        case ProblemClass::Linear: return std::make_unique<LinearTarget>(cfg.linear);
        case ProblemClass::Bernoulli: return std::make_unique<BernoulliTarget>(cfg.bernoulli, cfg.init);
        case ProblemClass::System: return std::make_unique<SystemTarget>(cfg.system);
    }
    raise(ErrorKind::Config, "unknown problem class");
}

ResolvedHyper resolve_hyperparameters(const ExperimentConfig& cfg) {
    ResolvedHyper out;
    out.hyper = cfg.hyper;
    out.gd = cfg.gd;
    if (cfg.optimize_hyper) {
        const auto target = make_target(cfg);
        const auto t0 = Clock::now();
        TuningResult tr = optimize_hyperparameters(cfg.space, *target, cfg.hyper, cfg.gd, cfg.bo);
        out.tuning_seconds = seconds_since(t0);
        out.hyper = tr.hyper;
        out.gd = tr.gd;
        out.tuning = std::move(tr);
    }
    out.hyper.validate();
    return out;
}

RcRun run_rc(const ExperimentConfig& cfg, const ResolvedHyper& hp) {
    RcRun run;
    const std::size_t n_ic = cfg.ics.size();
    require(n_ic > 0, ErrorKind::InvalidArgument, "no initial conditions given");
    run.result.solutions.resize(n_ic);
    run.timing.extra_ics = static_cast<Index>(n_ic) - 1;

    auto t0 = Clock::now();
    const Reservoir res = build_reservoir_resampling(hp.hyper);
    run.result.hyper = res.hyper();

    switch (cfg.problem) {
        case ProblemClass::Linear: {
            const LinearSolver solver(cfg.linear, res);
            run.timing.declare_seconds = seconds_since(t0);
            run.result.times = solver.basis().times;
            if (solver.diagnostics().ill_conditioned)
                run.result.warnings.push_back("ridge system is ill-conditioned (condition estimate " +
                                              format_double(solver.diagnostics().condition_estimate) + ")");
            t0 = Clock::now();
            run.result.solutions[0] = solver.solve(cfg.ics[0](0));
            run.timing.first_fit_seconds = seconds_since(t0);
            t0 = Clock::now();
            parallel_for(n_ic - 1, cfg.threads,
                         [&](std::size_t i) { run.result.solutions[i + 1] = solver.solve(cfg.ics[i + 1](0)); });
            run.timing.extra_fit_seconds = seconds_since(t0);
            break;
        }
        case ProblemClass::Bernoulli: {
            const BernoulliSolver solver(cfg.bernoulli, res);
            run.timing.declare_seconds = seconds_since(t0);
            run.result.times = solver.basis().times;
            run.traces.resize(n_ic);
            std::vector<char> ill(n_ic, 0);
            auto one = [&](std::size_t i) {
                BernoulliICResult r = solver.solve(cfg.ics[i](0), hp.gd, cfg.init, i);
                run.result.solutions[i] = std::move(r.solution);
                run.traces[i] = std::move(r.trace);
                ill[i] = r.ill_conditioned;
            };
            t0 = Clock::now();
            one(0);
            run.timing.first_fit_seconds = seconds_since(t0);
            t0 = Clock::now();
            parallel_for(n_ic - 1, cfg.threads, [&](std::size_t i) { one(i + 1); });
            run.timing.extra_fit_seconds = seconds_since(t0);
            for (std::size_t i = 0; i < n_ic; ++i)
                if (ill[i])
                    run.result.warnings.push_back("linearized ridge system is ill-conditioned for IC " +
                                                  std::to_string(i));
            break;
        }
        case ProblemClass::System: {
            const TrialBasis basis = build_basis(res.propagate(cfg.t_start, cfg.t_end));
            run.timing.declare_seconds = seconds_since(t0);
            run.result.times = basis.times;
            run.traces.resize(n_ic);
            run.energy_violation.resize(n_ic);
            run.energy.resize(n_ic);
            auto one = [&](std::size_t i) {
                SystemSpec spec = cfg.system;
                spec.ic = cfg.ics[i];
                GDConfig gd = hp.gd;
                gd.seed += i;
                SystemResult r = solve_system_on_basis(spec, basis, res.hyper(), gd);
                run.result.solutions[i] = std::move(r.solution);
                run.traces[i] = std::move(r.trace);
                run.energy_violation[i] = std::move(r.energy_violation);
                run.energy[i] = r.energy;
            };
            t0 = Clock::now();
            one(0);
            run.timing.first_fit_seconds = seconds_since(t0);
            t0 = Clock::now();
            parallel_for(n_ic - 1, cfg.threads, [&](std::size_t i) { one(i + 1); });
            run.timing.extra_fit_seconds = seconds_since(t0);
            break;
        }
    }
    return run;
}

Matrix reference_solution(const ExperimentConfig& cfg, const Vector& ic, double dt, std::string* kind) {
    const Index k = grid_size(cfg.t_start, cfg.t_end, dt);
    if (cfg.exact && cfg.problem != ProblemClass::System) {
        if (kind) *kind = "exact";
        Matrix y(k, 1);
        for (Index n = 0; n < k; ++n) y(n, 0) = (*cfg.exact)(cfg.t_start + static_cast<double>(n) * dt, ic(0));
        return y;
    }
    if (kind) *kind = "rk4";
    const int sub = std::max(1, cfg.reference_substeps);
    switch (cfg.problem) {
        case ProblemClass::Linear:
            return rk4_integrate(explicit_rhs(cfg.linear), ic(0), dt, cfg.t_start, cfg.t_end, sub).y;
        case ProblemClass::Bernoulli:
            return rk4_integrate(explicit_rhs(cfg.bernoulli), ic(0), dt, cfg.t_start, cfg.t_end, sub).y;
        case ProblemClass::System:
            return rk4_integrate(explicit_rhs(*cfg.system.system), ic, dt, cfg.t_start, cfg.t_end, sub).y;
    }
    raise(ErrorKind::Config, "unknown problem class");
}

namespace {

Matrix integrate_baseline(const ExperimentConfig& cfg, Baseline b, const Vector& ic, double dt) {
    switch (cfg.problem) {
        case ProblemClass::Linear:
        case ProblemClass::Bernoulli: {
            const ScalarRhs f =
                cfg.problem == ProblemClass::Linear ? explicit_rhs(cfg.linear) : explicit_rhs(cfg.bernoulli);
            return b == Baseline::Euler ? euler_integrate(f, ic(0), dt, cfg.t_start, cfg.t_end).y
                                        : rk4_integrate(f, ic(0), dt, cfg.t_start, cfg.t_end).y;
        }
        case ProblemClass::System: {
            const VectorRhs f = explicit_rhs(*cfg.system.system);
            return b == Baseline::Euler ? euler_integrate(f, ic, dt, cfg.t_start, cfg.t_end).y
                                        : rk4_integrate(f, ic, dt, cfg.t_start, cfg.t_end).y;
        }
    }
    raise(ErrorKind::Config, "unknown problem class");
}

void fill_errors(MethodReport& m, const Matrix& y, const Matrix& ref, Index r) {
    const Index n_ic = y.cols() / r;
    const Index k = std::min(y.rows(), ref.rows());
    double total = 0.0;
    for (Index i = 0; i < n_ic; ++i) {
        const Matrix diff = y.block(0, i * r, k, r) - ref.block(0, i * r, k, r);
        m.rms_error.push_back(rms(diff));
        m.max_abs_error.push_back(diff.cwiseAbs().maxCoeff());
        total += diff.squaredNorm();
    }
    m.rms_error_overall = std::sqrt(total / static_cast<double>(k * r * std::max<Index>(n_ic, 1)));
}

}  // namespace

ComparisonReport compare(const ExperimentConfig& cfg, const ResolvedHyper& hp) {
    ComparisonReport rep;
    rep.rc = run_rc(cfg, hp);
    rep.times = rep.rc.result.times;
    const double dt = rep.rc.result.hyper.dt;
    const Index k = rep.times.size();
    const Index r = output_dim(cfg);
    const auto n_ic = static_cast<Index>(cfg.ics.size());

    rep.reference_y.resize(k, n_ic * r);
    for (Index i = 0; i < n_ic; ++i)
        rep.reference_y.block(0, i * r, k, r) =
            reference_solution(cfg, cfg.ics[static_cast<std::size_t>(i)], dt, &rep.reference).topRows(k);

    Matrix rc_y(k, n_ic * r);
    rep.rc_residual.resize(k, n_ic);
    for (Index i = 0; i < n_ic; ++i) {
        const ICSolution& s = rep.rc.result.solutions[static_cast<std::size_t>(i)];
        rc_y.block(0, i * r, k, r) = s.y;
        rep.rc_residual.col(i) = s.residual.col(0);
    }
    MethodReport rc;
    rc.method = "rc";
    rc.declare_seconds = rep.rc.timing.declare_seconds;
    rc.fit_seconds = rep.rc.timing.first_fit_seconds + rep.rc.timing.extra_fit_seconds;
    rc.per_ic_seconds = rep.rc.timing.extra_ics > 0
                            ? rep.rc.timing.extra_fit_seconds / static_cast<double>(rep.rc.timing.extra_ics)
                            : rep.rc.timing.first_fit_seconds;
    fill_errors(rc, rc_y, rep.reference_y, r);
    rep.methods.push_back(std::move(rc));
    rep.y.push_back(std::move(rc_y));

    if (cfg.baseline != Baseline::None) {
        Matrix by(k, n_ic * r);
        const auto t0 = Clock::now();
        for (Index i = 0; i < n_ic; ++i)
            by.block(0, i * r, k, r) =
                integrate_baseline(cfg, cfg.baseline, cfg.ics[static_cast<std::size_t>(i)], dt).topRows(k);
        const double total = seconds_since(t0);
        MethodReport m;
        m.method = baseline_name(cfg.baseline);
        m.fit_seconds = total;
        m.per_ic_seconds = total / static_cast<double>(n_ic);
        fill_errors(m, by, rep.reference_y, r);
        rep.methods.push_back(std::move(m));
        rep.y.push_back(std::move(by));
    }
    return rep;
}

std::vector<std::string> write_rc_outputs(const ExperimentConfig& cfg, const RcRun& run, const std::string& dir) {
    ensure_dir(dir);
    std::vector<std::string> files;
    const auto names = output_names(cfg);
    const Index r = output_dim(cfg);
    const Vector& t = run.result.times;
    const std::size_t n_ic = run.result.solutions.size();

    for (std::size_t i = 0; i < n_ic; ++i) {
        const ICSolution& s = run.result.solutions[i];
        if (r == 1) {
            const std::string name = "ic_" + ic_tag(i) + ".csv";
            write_csv(join(dir, name), make_table({"t", "y", "y_dot", "residual"},
                                                  {t, s.y.col(0), s.y_dot.col(0), s.residual.col(0)}));
            files.push_back(name);
        } else {
            const bool has_energy = i < run.energy_violation.size() && run.energy_violation[i].size() == t.size();
            for (Index j = 0; j < r; ++j) {
                const std::string name = "ic_" + ic_tag(i) + "_" + names[static_cast<std::size_t>(j)] + ".csv";
                std::vector<std::string> header{"t", "y", "y_dot", "residual"};
                std::vector<Vector> cols{t, s.y.col(j), s.y_dot.col(j), s.residual.col(j)};
                if (has_energy) {
                    header.push_back("energy_violation");
                    cols.push_back(run.energy_violation[i]);
                }
                write_csv(join(dir, name), make_table(header, cols));
                files.push_back(name);
            }
            if (r == 2) {
                const std::string name = "ic_" + ic_tag(i) + "_phase.csv";
                write_csv(join(dir, name), make_table({names[0], names[1]}, {s.y.col(0), s.y.col(1)}));
                files.push_back(name);
            }
        }
        if (i < run.traces.size()) write_trace(dir, "trace_" + ic_tag(i) + ".csv", run.traces[i], files);
    }

    std::vector<std::string> header{"t"};
    std::vector<Vector> cols{t};
    for (Index j = 0; j < r; ++j) {
        header.push_back(r == 1 ? "rmsr" : "rmsr_" + names[static_cast<std::size_t>(j)]);
        cols.push_back(rmsr(residual_table(run.result.solutions, j)));
    }
    write_csv(join(dir, "rmsr.csv"), make_table(header, cols));
    files.push_back("rmsr.csv");

    if (!run.result.warnings.empty()) {
        std::ofstream w(join(dir, "warnings.txt"));
        for (const auto& msg : run.result.warnings) w << msg << '\n';
        files.push_back("warnings.txt");
    }
    return files;
}

std::vector<std::string> write_comparison(const ComparisonReport& rep, const std::string& dir) {
    ensure_dir(dir);
    std::vector<std::string> files;
    const Index n_cols = rep.reference_y.cols();
    const Index n_ic = rep.rc_residual.cols();
    const Index r = n_ic > 0 ? n_cols / n_ic : 1;

    std::vector<std::string> header{"t"};
    std::vector<Vector> cols{rep.times};
    auto add = [&](const std::string& label, const Matrix& y) {
        for (Index i = 0; i < n_ic; ++i)
            for (Index j = 0; j < r; ++j) {
                std::string h = label + "_ic" + ic_tag(static_cast<std::size_t>(i));
                if (r > 1) h += "_" + std::to_string(j);
                header.push_back(h);
                cols.push_back(y.col(i * r + j).head(rep.times.size()));
            }
    };
    add(rep.reference, rep.reference_y);
    for (std::size_t m = 0; m < rep.methods.size(); ++m) add(rep.methods[m].method, rep.y[m]);
    write_csv(join(dir, "compare.csv"), make_table(header, cols));
    files.push_back("compare.csv");

    nlohmann::json j;
    j["reference"] = rep.reference;
    j["ics"] = n_ic;
    for (const auto& m : rep.methods) {
        j["methods"].push_back({{"method", m.method},
                                {"declare_seconds", m.declare_seconds},
                                {"fit_seconds", m.fit_seconds},
                                {"per_ic_seconds", m.per_ic_seconds},
                                {"rms_error", m.rms_error},
                                {"max_abs_error", m.max_abs_error},
                                {"rms_error_overall", m.rms_error_overall}});
    }
    std::ofstream out(join(dir, "report.json"));
    if (!out) raise(ErrorKind::Io, "cannot write report.json in '" + dir + "'");
    out << j.dump(2) << '\n';
    files.push_back("report.json");
    return files;
}

std::vector<std::string> write_history(const ExperimentConfig& cfg, const TuningResult& tuning,
                                       const std::string& dir) {
    ensure_dir(dir);
    std::vector<std::string> header{"eval"};
    for (const auto& d : cfg.space.dims) header.push_back(d.name);
    for (const char* h : {"objective", "best_so_far", "side_length"}) header.push_back(h);
    const auto& hist = tuning.bo.history;
    const auto n = static_cast<Index>(hist.size());
    CsvTable table;
    table.header = header;
    table.data.resize(n, static_cast<Index>(header.size()));
    for (Index e = 0; e < n; ++e) {
        const Evaluation& ev = hist[static_cast<std::size_t>(e)];
        Index c = 0;
        table.data(e, c++) = static_cast<double>(ev.index);
        for (double v : ev.values) table.data(e, c++) = v;
        table.data(e, c++) = ev.objective;
        table.data(e, c++) = ev.best_so_far;
        table.data(e, c++) = ev.side_length;
    }
    write_csv(join(dir, "history.csv"), table);
    return {"history.csv"};
}

void write_manifest(const std::string& dir, const std::string& command, const ExperimentConfig& cfg,
                    const ResolvedHyper& hp, const YAML::Node& summary, const std::vector<std::string>& files) {
    ensure_dir(dir);
    YAML::Node m;
    m["tool"] = "esnode";
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = cfg.source;
    YAML::Node resolved;
    resolved["problem"] = problem_class_name(cfg.problem);
    resolved["hyperparameters"] = hyper_to_yaml(hp.hyper);
    resolved["training"] = gd_to_yaml(hp.gd);
    if (cfg.problem == ProblemClass::Bernoulli) resolved["training"]["init"] = bernoulli_init_name(cfg.init);
    resolved["tuned"] = hp.tuning.has_value();
    m["resolved"] = resolved;
    if (summary) m["summary"] = summary;
    YAML::Node versions;
    versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
#ifdef __VERSION__
    versions["compiler"] = __VERSION__;
#endif
    versions["cxx_standard"] = static_cast<long>(__cplusplus);
    m["versions"] = versions;
    YAML::Node fl(YAML::NodeType::Sequence);
    for (const auto& f : files) fl.push_back(f);
    m["files"] = fl;

    YAML::Emitter em;
    em.SetDoublePrecision(17);
    em << m;
    std::ofstream out(join(dir, "manifest.yaml"));
    if (!out) raise(ErrorKind::Io, "cannot write manifest.yaml in '" + dir + "'");
    out << em.c_str() << '\n';
}

namespace {

void write_script(const std::string& dir, const std::string& name, const std::string& body,
                  std::vector<std::string>& files) {
    std::ofstream out(join(dir, name));
    if (!out) raise(ErrorKind::Io, "cannot write '" + name + "'");
    const std::string png = name.substr(0, name.size() - 3) + ".png";
    out << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set terminal pngcairo size 900,600\n"
        << "set output '" << png << "'\n"
        << body;
    files.push_back(name);
}

std::string plot_list(const std::vector<std::string>& data, const std::string& using_clause,
                      const std::string& style) {
    std::string s = "plot ";
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i) s += ", \\\n     ";
        s += "'" + data[i] + "' using " + using_clause + " with " + style + " title '" + data[i] + "'";
    }
    return s + "\n";
}

bool matches(const std::string& name, const std::string& prefix, const std::string& suffix) {
    return name.size() >= prefix.size() + suffix.size() && name.starts_with(prefix) && name.ends_with(suffix);
}

}  // namespace

std::vector<std::string> emit_figures(const std::string& dir) {
    require(fs::is_directory(dir), ErrorKind::Io, "output directory '" + dir + "' does not exist");
    std::vector<std::string> scalar_ics, system_outputs, phases, traces;
    bool has_rmsr = false, has_compare = false, has_history = false;
    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) names.insert(entry.path().filename().string());
    for (const auto& n : names) {
        if (matches(n, "ic_", "_phase.csv")) phases.push_back(n);
        else if (matches(n, "ic_", ".csv") && n.size() == std::string("ic_000.csv").size()) scalar_ics.push_back(n);
        else if (matches(n, "ic_", ".csv")) system_outputs.push_back(n);
        else if (matches(n, "trace_", ".csv")) traces.push_back(n);
        else if (n == "rmsr.csv") has_rmsr = true;
        else if (n == "compare.csv") has_compare = true;
        else if (n == "history.csv") has_history = true;
    }

    std::vector<std::string> files;
    if (!scalar_ics.empty()) {
        write_script(dir, "fig_solutions.gp", "set xlabel 't'\nset ylabel 'y'\n" + plot_list(scalar_ics, "1:2", "lines"),
                     files);
        write_script(dir, "fig_residuals.gp",
                     "set xlabel 't'\nset ylabel '|residual|'\nset logscale y\n" +
                         plot_list(scalar_ics, "1:(abs($4))", "lines"),
                     files);
    }
    if (!system_outputs.empty()) {
        write_script(dir, "fig_outputs.gp", "set xlabel 't'\n" + plot_list(system_outputs, "1:2", "lines"), files);
        std::vector<std::string> with_energy;
        for (const auto& n : system_outputs) {
            std::ifstream in(join(dir, n));
            std::string head;
            std::getline(in, head);
            if (head.find("energy_violation") != std::string::npos) with_energy.push_back(n);
        }
        if (!with_energy.empty())
            write_script(dir, "fig_energy.gp",
                         "set xlabel 't'\nset ylabel '|E - H|'\nset logscale y\n" +
                             plot_list(with_energy, "1:5", "lines"),
                         files);
    }
    if (!phases.empty())
        write_script(dir, "fig_phase.gp", "set size ratio -1\n" + plot_list(phases, "1:2", "lines"), files);
    if (!traces.empty())
        write_script(dir, "fig_loss.gp",
                     "set xlabel 'epoch'\nset ylabel 'loss'\nset logscale y\n" + plot_list(traces, "1:2", "lines"),
                     files);
    if (has_rmsr)
        write_script(dir, "fig_rmsr.gp", "set xlabel 't'\nset ylabel 'RMSR'\nset logscale y\nplot for [c=2:*] "
                                         "'rmsr.csv' using 1:c with lines\n",
                     files);
    if (has_compare)
        write_script(dir, "fig_compare.gp", "set xlabel 't'\nplot for [c=2:*] 'compare.csv' using 1:c with lines\n",
                     files);
    if (has_history)
        write_script(dir, "fig_history.gp",
                     "set xlabel 'evaluation'\nset ylabel 'objective'\n"
                     "plot 'history.csv' using 1:'objective' with points, \\\n"
                     "     '' using 1:'best_so_far' with lines\n",
                     files);
    return files;
}

}  // namespace esnode
