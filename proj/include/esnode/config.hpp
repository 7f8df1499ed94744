#pragma once

#include "esnode/bernoulli_solver.hpp"
#include "esnode/gd_trainer.hpp"
#include "esnode/hyperopt.hpp"
#include "esnode/linear_solver.hpp"
#include "esnode/registry.hpp"
#include "esnode/reservoir.hpp"
#include "esnode/system_solver.hpp"

#include <yaml-cpp/yaml.h>

#include <optional>
#include <string>
#include <vector>

namespace esnode {

enum class ProblemClass { Linear, Bernoulli, System };
enum class Baseline { None, Euler, Rk4 };

const char* problem_class_name(ProblemClass c);
const char* baseline_name(Baseline b);

// Parsed experiment description. `source` keeps the YAML tree the values came
// from so a manifest can echo it verbatim.
struct ExperimentConfig {
    std::string name = "experiment";
    ProblemClass problem = ProblemClass::Linear;

    LinearODE linear;        // Linear
    BernoulliODE bernoulli;  // Bernoulli
    SystemSpec system;       // System (ic holds the first IC)
    std::vector<Vector> ics;
    double t_start = 0.0;
    double t_end = 1.0;

    HyperParams hyper;
    GDConfig gd;
    BernoulliInit init = BernoulliInit::LinearizedThenGD;

    bool optimize_hyper = false;
    SearchSpace space;
    BOConfig bo;

    std::optional<ExactSolution> exact;
    Baseline baseline = Baseline::None;
    int reference_substeps = 10;

    std::string out_dir = "out";
    int threads = 1;
    bool plots = true;

    YAML::Node source;
};

// Accepts a plain config or a run manifest (uses its `config` block).
ExperimentConfig parse_config(const YAML::Node& root);
ExperimentConfig load_config(const std::string& path);

// Command-line overrides are written into `source` too, so the manifest stays
// a complete description of the run.
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);
void override_out(ExperimentConfig& cfg, const std::string& dir);
void override_threads(ExperimentConfig& cfg, int threads);

// Reads the reservoir block; keys follow the published listings
// (dt, n_nodes, connectivity, spectral_radius, regularization, leaking_rate,
// bias, plus GD keys such as enet_alpha or gamma_cyclic when present).
void read_hyperparameters(const YAML::Node& node, HyperParams& hp, GDConfig& gd);

// Emits doubles with 17 significant digits.
std::string format_double(double x);

}  // namespace esnode
