#pragma once

#include "esnode/config.hpp"
#include "esnode/csv.hpp"
#include "esnode/integrators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace esnode {

inline constexpr const char* kVersion = "0.1.0";

// Hyperparameters in force for a run, after optional tuning and after
// resampling the seed of a degenerate recurrent draw.
struct ResolvedHyper {
    HyperParams hyper;
    GDConfig gd;
    std::optional<TuningResult> tuning;
    double tuning_seconds = 0.0;
};

ResolvedHyper resolve_hyperparameters(const ExperimentConfig& cfg);
std::unique_ptr<TuningTarget> make_target(const ExperimentConfig& cfg);

struct RcTiming {
    double declare_seconds = 0.0;    // reservoir build, propagation, basis, shared factorization
    double first_fit_seconds = 0.0;  // readout for the first IC
    double extra_fit_seconds = 0.0;  // readouts for the remaining ICs
    Index extra_ics = 0;
};

struct RcRun {
    SolveResult result;
    std::vector<TrainTrace> traces;  // Bernoulli and system runs
    std::vector<Vector> energy_violation;
    std::vector<double> energy;
    RcTiming timing;
};

// Runs the RC solver of the configured problem class on all ICs.
RcRun run_rc(const ExperimentConfig& cfg, const ResolvedHyper& hp);

struct MethodReport {
    std::string method;
    double declare_seconds = 0.0;
    double fit_seconds = 0.0;
    double per_ic_seconds = 0.0;        // baseline: loop time / ICs; RC: extra fit / extra ICs
    std::vector<double> rms_error;      // per IC, against the reference
    std::vector<double> max_abs_error;  // per IC
    double rms_error_overall = 0.0;
};

struct ComparisonReport {
    std::string reference;  // "exact" or "rk4"
    Vector times;
    std::vector<MethodReport> methods;  // RC first
    std::vector<Matrix> y;               // per method, K x (ICs * R)
    Matrix reference_y;                  // K x (ICs * R)
    Matrix rc_residual;                  // K x ICs (first residual column)
    RcRun rc;
};

ComparisonReport compare(const ExperimentConfig& cfg, const ResolvedHyper& hp);

// Reference trajectory for IC i: exact solution when configured, else RK4
// with cfg.reference_substeps substeps per grid step.
Matrix reference_solution(const ExperimentConfig& cfg, const Vector& ic, double dt, std::string* kind = nullptr);

// Output writers. Each returns the file names written, relative to dir.
std::vector<std::string> write_rc_outputs(const ExperimentConfig& cfg, const RcRun& run, const std::string& dir);
std::vector<std::string> write_comparison(const ComparisonReport& rep, const std::string& dir);
std::vector<std::string> write_history(const ExperimentConfig& cfg, const TuningResult& tuning,
                                       const std::string& dir);
void write_manifest(const std::string& dir, const std::string& command, const ExperimentConfig& cfg,
                    const ResolvedHyper& hp, const YAML::Node& summary,
                    const std::vector<std::string>& files);

// gnuplot scripts for whatever CSVs are present in dir.
std::vector<std::string> emit_figures(const std::string& dir);

YAML::Node hyper_to_yaml(const HyperParams& hp);
YAML::Node gd_to_yaml(const GDConfig& gd);

}  // namespace esnode
