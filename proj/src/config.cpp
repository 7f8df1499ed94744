#include "esnode/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace esnode {

const char* problem_class_name(ProblemClass c) {
    switch (c) {
        case ProblemClass::Linear: return "linear";
        case ProblemClass::Bernoulli: return "bernoulli";
        case ProblemClass::System: return "system";
    }
    return "linear";
}

const char* baseline_name(Baseline b) {
    switch (b) {
        case Baseline::None: return "none";
        case Baseline::Euler: return "euler";
        case Baseline::Rk4: return "rk4";
    }
    return "none";
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

// Numbers, or multiples of pi written as "4pi", "4*pi", "pi".
double time_value(const YAML::Node& node, const char* what) {
    if (!node || !node.IsScalar()) raise(ErrorKind::Config, std::string("missing ") + what);
    std::string s = node.Scalar();
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        std::string k = s.substr(0, s.size() - 2);
        if (!k.empty() && k.back() == '*') k.pop_back();
        const double mult = k.empty() ? 1.0 : std::stod(k);
        return mult * std::numbers::pi;
    }
    return node.as<double>();
}

std::vector<double> number_list(const YAML::Node& node, const char* what) {
    if (node.IsSequence()) return node.as<std::vector<double>>();
    if (node.IsMap() && node["range"]) {
        const auto r = node["range"].as<std::vector<double>>();
        const int count = node["count"].as<int>();
        if (r.size() != 2 || count < 1) raise(ErrorKind::Config, std::string(what) + " range needs [lo, hi] and count >= 1");
        std::vector<double> out(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i)
            out[static_cast<std::size_t>(i)] =
                count == 1 ? r[0] : r[0] + (r[1] - r[0]) * static_cast<double>(i) / static_cast<double>(count - 1);
        return out;
    }
    raise(ErrorKind::Config, std::string(what) + " must be a list or {range: [lo, hi], count: n}");
}

std::vector<Vector> read_ics(const YAML::Node& node, Index dim) {
    if (!node) raise(ErrorKind::Config, "missing 'ics'");
    std::vector<Vector> out;
    if (dim == 1) {
        for (double v : number_list(node, "ics")) out.push_back(Vector::Constant(1, v));
        return out;
    }
    if (!node.IsSequence()) raise(ErrorKind::Config, "system 'ics' must be a list of vectors");
    // A flat list of numbers is a single initial condition.
    if (node.size() > 0 && node[0].IsScalar()) {
        const auto v = node.as<std::vector<double>>();
        out.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    } else {
        for (const auto& item : node) {
            const auto v = item.as<std::vector<double>>();
            out.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
        }
    }
    for (const auto& v : out)
        if (v.size() != dim) raise(ErrorKind::Config, "initial condition has the wrong dimension");
    return out;
}

bool read_gd_key(const std::string& key, const YAML::Node& v, GDConfig& gd) {
    if (key == "epochs") gd.epochs = v.as<Index>();
    else if (key == "learning_rate") gd.learning_rate = v.as<double>();
    else if (key == "spikethreshold" || key == "spike_threshold") gd.spike_threshold = v.as<double>();
    else if (key == "gamma") gd.gamma = v.as<double>();
    else if (key == "gamma_cyclic") {
        if (v.IsNull() || (v.IsScalar() && v.Scalar() == "none")) gd.gamma_cyclic.reset();
        else gd.gamma_cyclic = v.as<double>();
    }
    else if (key == "cyclic_cap_epochs") gd.cyclic_cap_epochs = v.as<Index>();
    else if (key == "cyclic_period") gd.cyclic_period = v.as<Index>();
    else if (key == "cyclic_floor") gd.cyclic_floor = v.as<double>();
    else if (key == "enet_alpha") gd.enet_alpha = v.as<double>();
    else if (key == "enet_strength") gd.enet_strength = v.as<double>();
    else if (key == "momentum") gd.momentum = v.as<double>();
    else if (key == "precondition_ridge") gd.precondition_ridge = v.as<double>();
    else if (key == "preconditioner") {
        const std::string s = v.as<std::string>();
        if (s == "none") gd.preconditioner = Preconditioner::None;
        else if (s == "gram") gd.preconditioner = Preconditioner::Gram;
        else raise(ErrorKind::Config, "unknown preconditioner '" + s + "'");
    } else return false;
    return true;
}

Dimension read_dimension(const YAML::Node& node) {
    Dimension d;
    d.name = node["name"].as<std::string>();
    d.lower = node["lower"].as<double>();
    d.upper = node["upper"].as<double>();
    const std::string scale = node["scale"] ? node["scale"].as<std::string>() : "linear";
    if (scale == "log10" || scale == "log") d.scale = Scale::Log10;
    else if (scale == "linear") d.scale = Scale::Linear;
    else raise(ErrorKind::Config, "unknown scale '" + scale + "'");
    d.integer = node["integer"] ? node["integer"].as<bool>() : (d.name == "n_nodes");
    return d;
}

void read_bo(const YAML::Node& node, BOConfig& bo, Index scalar_dim) {
    if (!node) return;
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        if (key == "n_init") bo.n_init = v.as<Index>();
        else if (key == "batch_size") bo.batch_size = v.as<Index>();
        else if (key == "max_evals") bo.max_evals = v.as<Index>();
        else if (key == "subsequence_length") bo.subsequence_length = v.as<Index>();
        else if (key == "val_split") bo.val_split = v.as<double>();
        else if (key == "beta") bo.beta = v.as<double>();
        else if (key == "cv_samples") bo.cv_samples = v.as<Index>();
        else if (key == "seed") bo.seed = v.as<std::uint64_t>();
        else if (key == "success_tol") bo.success_tol = v.as<int>();
        else if (key == "failure_tol") bo.failure_tol = v.as<int>();
        else if (key == "min_side") bo.min_side = v.as<double>();
        else if (key == "max_side") bo.max_side = v.as<double>();
        else if (key == "init_side") bo.init_side = v.as<double>();
        else if (key == "n_candidates") bo.n_candidates = v.as<Index>();
        else if (key == "gp_restarts") bo.gp_restarts = v.as<int>();
        else if (key == "gp_iterations") bo.gp_iterations = v.as<int>();
        else if (key == "ic_bundle") bo.ic_bundle = read_ics(v, scalar_dim);
        else raise(ErrorKind::Config, "unknown bo key '" + key + "'");
    }
}

}  // namespace

void read_hyperparameters(const YAML::Node& node, HyperParams& hp, GDConfig& gd) {
    if (!node.IsMap()) raise(ErrorKind::Config, "hyperparameters must be a mapping or 'optimize'");
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        if (key == "dt") hp.dt = v.as<double>();
        else if (key == "n_nodes") hp.n_nodes = v.as<Index>();
        else if (key == "connectivity") hp.connectivity = v.as<double>();
        else if (key == "spectral_radius") hp.spectral_radius = v.as<double>();
        else if (key == "regularization") hp.regularization = v.as<double>();
        else if (key == "leaking_rate") hp.leaking_rate = v.as<double>();
        else if (key == "bias") hp.bias = v.as<double>();
        else if (key == "activation") hp.activation = parse_activation(v.as<std::string>());
        else if (key == "n_transient") hp.n_transient = v.as<Index>();
        else if (key == "random_state" || key == "random_seed") hp.random_seed = v.as<std::uint64_t>();
        else if (!read_gd_key(key, v, gd)) raise(ErrorKind::Config, "unknown hyperparameter '" + key + "'");
    }
}

ExperimentConfig parse_config(const YAML::Node& input) {
    try {
        const YAML::Node root = input["config"] ? input["config"] : input;
        ExperimentConfig cfg;
        cfg.source = YAML::Clone(root);
        if (root["name"]) cfg.name = root["name"].as<std::string>();

        const YAML::Node prob = root["problem"];
        if (!prob || !prob.IsMap()) raise(ErrorKind::Config, "missing 'problem' block");
        const std::string cls = prob["class"] ? prob["class"].as<std::string>() : "linear";
        if (cls == "linear") cfg.problem = ProblemClass::Linear;
        else if (cls == "bernoulli") cfg.problem = ProblemClass::Bernoulli;
        else if (cls == "system") cfg.problem = ProblemClass::System;
        else raise(ErrorKind::Config, "unknown problem class '" + cls + "'");

        const YAML::Node time = root["time"];
        if (!time) raise(ErrorKind::Config, "missing 'time' block");
        cfg.t_start = time["start"] ? time_value(time["start"], "time.start") : 0.0;
        cfg.t_end = time_value(time["end"], "time.end");
        if (!(cfg.t_end > cfg.t_start)) raise(ErrorKind::Config, "time.end must exceed time.start");

        const bool scalar = cfg.problem != ProblemClass::System;
        if (scalar) {
            cfg.ics = read_ics(root["ics"], 1);
            std::vector<double> psi0;
            for (const auto& v : cfg.ics) psi0.push_back(v(0));
            TimeFunction a1 = parse_time_function(prob["a1"] ? prob["a1"] : YAML::Node(1.0));
            TimeFunction a0 = parse_time_function(prob["a0"]);
            TimeFunction f = parse_time_function(prob["force"] ? prob["force"] : YAML::Node(0.0));
            cfg.linear = LinearODE{a1, a0, f, psi0, cfg.t_start, cfg.t_end};
            if (cfg.problem == ProblemClass::Bernoulli) {
                TimeFunction q = parse_time_function(prob["q"]);
                cfg.bernoulli = BernoulliODE{a1, a0, q, f, psi0, cfg.t_start, cfg.t_end};
            }
        } else {
            cfg.system.system = make_system(prob["system"].as<std::string>());
            cfg.ics = read_ics(root["ics"], cfg.system.system->dim());
            if (cfg.ics.empty()) raise(ErrorKind::Config, "no initial conditions");
            cfg.system.ic = cfg.ics.front();
            cfg.system.t_start = cfg.t_start;
            cfg.system.t_end = cfg.t_end;
            if (prob["hamiltonian"]) cfg.system.use_hamiltonian = prob["hamiltonian"].as<bool>();
            if (prob["hamiltonian_weight"]) cfg.system.hamiltonian_weight = prob["hamiltonian_weight"].as<double>();
        }
        if (cfg.ics.empty()) raise(ErrorKind::Config, "no initial conditions");

        cfg.hyper.activation = scalar ? Activation::Tanh : Activation::Sin;
        if (root["activation"]) cfg.hyper.activation = parse_activation(root["activation"].as<std::string>());

        const YAML::Node hpn = root["hyperparameters"];
        if (!hpn) raise(ErrorKind::Config, "missing 'hyperparameters' (a mapping or 'optimize')");
        if (hpn.IsScalar() && hpn.Scalar() == "optimize") {
            cfg.optimize_hyper = true;
        } else {
            read_hyperparameters(hpn, cfg.hyper, cfg.gd);
        }
        if (root["base_hyperparameters"]) read_hyperparameters(root["base_hyperparameters"], cfg.hyper, cfg.gd);

        for (const char* key : {"epochs", "learning_rate", "spikethreshold"})
            if (root[key]) read_gd_key(key, root[key], cfg.gd);
        if (const YAML::Node tr = root["training"]) {
            for (const auto& kv : tr) {
                const std::string key = kv.first.as<std::string>();
                if (key == "init") cfg.init = parse_bernoulli_init(kv.second.as<std::string>());
                else if (!read_gd_key(key, kv.second, cfg.gd))
                    raise(ErrorKind::Config, "unknown training key '" + key + "'");
            }
        }

        if (root["seed"]) {
            const auto seed = root["seed"].as<std::uint64_t>();
            cfg.hyper.random_seed = seed;
            cfg.gd.seed = seed;
            cfg.bo.seed = seed;
        }

        if (const YAML::Node ss = root["search_space"]) {
            if (!ss.IsSequence()) raise(ErrorKind::Config, "search_space must be a list");
            for (const auto& item : ss) cfg.space.dims.push_back(read_dimension(item));
        }
        read_bo(root["bo"], cfg.bo, scalar ? 1 : cfg.system.system->dim());
        if (cfg.optimize_hyper && cfg.space.dims.empty())
            raise(ErrorKind::Config, "hyperparameters: optimize needs a search_space");

        cfg.exact = parse_exact_solution(root["exact"]);
        if (root["baseline"]) {
            const std::string b = root["baseline"].as<std::string>();
            if (b == "none") cfg.baseline = Baseline::None;
            else if (b == "euler") cfg.baseline = Baseline::Euler;
            else if (b == "rk4") cfg.baseline = Baseline::Rk4;
            else raise(ErrorKind::Config, "unknown baseline '" + b + "'");
        }
        if (root["reference_substeps"]) cfg.reference_substeps = root["reference_substeps"].as<int>();

        if (const YAML::Node out = root["output"]) {
            if (out.IsScalar()) cfg.out_dir = out.as<std::string>();
            else {
                if (out["dir"]) cfg.out_dir = out["dir"].as<std::string>();
                if (out["plots"]) cfg.plots = out["plots"].as<bool>();
            }
        }
        if (root["threads"]) cfg.threads = root["threads"].as<int>();
        cfg.bo.threads = cfg.threads;

        if (!cfg.optimize_hyper) cfg.hyper.validate();
        return cfg;
    } catch (const YAML::Exception& e) {
        raise(ErrorKind::Config, std::string("config parse error: ") + e.what());
    } catch (const std::invalid_argument& e) {
        raise(ErrorKind::Config, std::string("config parse error: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Config, "cannot open config '" + path + "'");
    YAML::Node root;
    try {
        root = YAML::Load(in);
    } catch (const YAML::Exception& e) {
        raise(ErrorKind::Config, std::string("config parse error: ") + e.what());
    }
    return parse_config(root);
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.hyper.random_seed = seed;
    cfg.gd.seed = seed;
    cfg.bo.seed = seed;
    cfg.source["seed"] = seed;
}

void override_out(ExperimentConfig& cfg, const std::string& dir) {
    cfg.out_dir = dir;
    if (cfg.source["output"] && cfg.source["output"].IsMap()) cfg.source["output"]["dir"] = dir;
    else cfg.source["output"] = dir;
}

void override_threads(ExperimentConfig& cfg, int threads) {
    cfg.threads = std::max(1, threads);
    cfg.bo.threads = cfg.threads;
    cfg.source["threads"] = cfg.threads;
}

}  // namespace esnode
