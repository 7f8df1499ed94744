#pragma once

#include "esnode/bernoulli_solver.hpp"
#include "esnode/gd_trainer.hpp"
#include "esnode/linear_solver.hpp"
#include "esnode/reservoir.hpp"
#include "esnode/system_solver.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace esnode {

enum class Scale { Linear, Log10 };

struct Dimension {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    Scale scale = Scale::Linear;
    bool integer = false;
};

struct SearchSpace {
    std::vector<Dimension> dims;

    void validate() const;
    Index size() const { return static_cast<Index>(dims.size()); }
    // Unit cube -> parameter values; integer dimensions are rounded.
    std::vector<double> to_values(const Vector& unit) const;
    Vector to_unit(const std::vector<double>& values) const;
};

struct BOConfig {
    Index n_init = 10;
    Index batch_size = 1;
    Index max_evals = 50;
    Index subsequence_length = 0;  // grid points; 0 means 2/3 of the grid
    double val_split = 0.3;
    double beta = 0.5;
    std::vector<Vector> ic_bundle;  // empty means the target's own ICs
    Index cv_samples = 1;
    std::uint64_t seed = 0;
    int success_tol = 3;
    int failure_tol = 0;  // 0 means ceil(d / batch_size)
    double min_side = 0.0078125;
    double max_side = 1.6;
    double init_side = 0.8;
    Index n_candidates = 0;  // 0 means min(100 d, 1000)
    int gp_restarts = 5;
    int gp_iterations = 50;
    int threads = 1;

    void validate() const;
};

struct TrustRegion {
    Vector center;
    double side_length = 0.8;
    int success_count = 0;
    int failure_count = 0;
    int success_tol = 3;
    int failure_tol = 1;
    double min_side = 0.0078125;
    double max_side = 1.6;

    // Records one batch outcome and resizes the region.
    void update(bool improved);
    bool exhausted() const { return side_length < min_side; }
    // Box around the center, stretched per dimension by lengthscale / geometric mean.
    void bounds(const Vector& lengthscales, Vector& lo, Vector& hi) const;
};

struct Evaluation {
    Index index = 0;
    Vector unit;
    std::vector<double> values;
    double objective = 0.0;
    double best_so_far = 0.0;
    double side_length = 0.0;
    bool surrogate_fallback = false;
};

struct BOResult {
    std::vector<double> best_values;
    double best_objective = INFINITY;
    Index best_index = -1;
    std::vector<Evaluation> history;
    Index degenerate_iterations = 0;
    bool terminated_by_side = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Scrambled Sobol points in [0, 1]^d (random digital shift from seed).
Matrix sobol_points(Index count, Index dim, std::uint64_t seed);

BOResult optimize(const SearchSpace& space, const Objective& objective, const BOConfig& cfg);

struct CvLosses {
    double train = 0.0;
    double val = 0.0;
};

inline constexpr double kObjectiveSentinel = 1e9;

// Mean over samples and ICs of beta log L_train + (1 - beta) log L_val.
// Any non-finite or non-positive loss yields the sentinel.
double cv_objective(const std::vector<CvLosses>& losses, double beta);

// A problem that can be fit on the first n_train points of a sub-sequence
// starting at t_sub, with the initial condition imposed at t_sub, and scored
// by its mean squared residual there and on the next n_val points.
class TuningTarget {
public:
    virtual ~TuningTarget() = default;
    virtual double t_start() const = 0;
    virtual double t_end() const = 0;
    virtual std::vector<Vector> default_ics() const = 0;
    virtual std::vector<CvLosses> cv_losses(const Reservoir& res, const GDConfig& gd, double t_sub,
                                            Index n_train, Index n_val,
                                            const std::vector<Vector>& ics) const = 0;
};

class LinearTarget : public TuningTarget {
public:
    explicit LinearTarget(LinearODE ode) : ode_(std::move(ode)) {}
    double t_start() const override { return ode_.t_start; }
    double t_end() const override { return ode_.t_end; }
    std::vector<Vector> default_ics() const override;
    std::vector<CvLosses> cv_losses(const Reservoir& res, const GDConfig& gd, double t_sub, Index n_train,
                                    Index n_val, const std::vector<Vector>& ics) const override;

private:
    LinearODE ode_;
};

class BernoulliTarget : public TuningTarget {
public:
    BernoulliTarget(BernoulliODE ode, BernoulliInit init) : ode_(std::move(ode)), init_(init) {}
    double t_start() const override { return ode_.t_start; }
    double t_end() const override { return ode_.t_end; }
    std::vector<Vector> default_ics() const override;
    std::vector<CvLosses> cv_losses(const Reservoir& res, const GDConfig& gd, double t_sub, Index n_train,
                                    Index n_val, const std::vector<Vector>& ics) const override;

private:
    BernoulliODE ode_;
    BernoulliInit init_;
};

class SystemTarget : public TuningTarget {
public:
    explicit SystemTarget(SystemSpec spec) : spec_(std::move(spec)) {}
    double t_start() const override { return spec_.t_start; }
    double t_end() const override { return spec_.t_end; }
    std::vector<Vector> default_ics() const override { return {spec_.ic}; }
    std::vector<CvLosses> cv_losses(const Reservoir& res, const GDConfig& gd, double t_sub, Index n_train,
                                    Index n_val, const std::vector<Vector>& ics) const override;

private:
    SystemSpec spec_;
};

// Rows [start, start + count) of a basis.
TrialBasis slice_rows(const TrialBasis& basis, Index start, Index count);

// Writes named search-space values into the reservoir and GD settings.
// Unknown names raise a config error.
void apply_point(const SearchSpace& space, const std::vector<double>& values, HyperParams& hp, GDConfig& gd);

double bo_objective(const HyperParams& hp, const GDConfig& gd, const TuningTarget& target,
                    const BOConfig& cfg);

struct TuningResult {
    BOResult bo;
    HyperParams hyper;
    GDConfig gd;
};

TuningResult optimize_hyperparameters(const SearchSpace& space, const TuningTarget& target,
                                      const HyperParams& base_hp, const GDConfig& base_gd,
                                      const BOConfig& cfg);

}  // namespace esnode
