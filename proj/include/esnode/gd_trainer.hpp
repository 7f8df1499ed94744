#pragma once

#include "esnode/common.hpp"
#include "esnode/trial.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace esnode {

// Residual values and their partial derivatives on the whole grid.
struct ResidualJet {
    Matrix value;                // K x E
    std::vector<Matrix> d_y;     // R entries of K x E: d r_i / d y_r
    std::vector<Matrix> d_ydot;  // R entries of K x E: d r_i / d y'_r
};

// A problem whose solution is y = psi0 + S w^T, judged by residuals r_i(t, y, y').
class ResidualProblem {
public:
    virtual ~ResidualProblem() = default;
    virtual Index outputs() const = 0;
    virtual Index equations() const = 0;
    virtual Vector initial_state() const = 0;
    // Fills jet.value; partials too when need_partials is set.
    virtual void evaluate(const Vector& t, const Matrix& y, const Matrix& y_dot, ResidualJet& jet,
                          bool need_partials) const = 0;
};

struct ElasticNet {
    double alpha = 0.0;     // L1 share
    double strength = 0.0;  // overall weight

    double value(const Matrix& w) const;
    // Adds the (sub)gradient; sign(0) = 0.
    void add_gradient(const Matrix& w, Matrix& grad) const;
};

enum class Preconditioner { None, Gram };

struct GDConfig {
    Index epochs = 1000;
    double learning_rate = 0.01;
    double spike_threshold = 0.25;
    double gamma = 0.5;
    std::optional<double> gamma_cyclic;
    Index cyclic_cap_epochs = 5000;
    Index cyclic_period = 200;
    double cyclic_floor = 0.1;
    double enet_alpha = 0.0;
    double enet_strength = 0.0;
    std::uint64_t seed = 0;
    double momentum = 0.0;
    Preconditioner preconditioner = Preconditioner::None;
    double precondition_ridge = 1e-6;

    void validate() const;
    ElasticNet elastic_net() const { return {enet_alpha, enet_strength}; }
};

struct TrainTrace {
    std::vector<double> loss_per_epoch;
    std::vector<double> lr_per_epoch;
    double best_loss = INFINITY;
    Index best_epoch = -1;
    double final_lr = 0.0;
    Index spikes = 0;
};

struct LossGrad {
    double loss = 0.0;
    Matrix grad;
};

// Sum over grid and equations of r^2, plus the elastic net.
LossGrad loss_and_grad(const ResidualProblem& problem, const TrialBasis& basis,
                       const ReadoutWeights& w, const ElasticNet& reg = {});

double loss_value(const ResidualProblem& problem, const TrialBasis& basis, const ReadoutWeights& w,
                  const ElasticNet& reg = {});

// Residuals at given weights, K x E.
Matrix residuals_at(const ResidualProblem& problem, const TrialBasis& basis, const ReadoutWeights& w);

// Spike rule and cyclic schedule. The cyclic factor is a triangular wave
// between floor and 1 of the given period, damped by gamma_cyclic^epoch,
// and held at the floor after the cap.
class LearningRateSchedule {
public:
    explicit LearningRateSchedule(const GDConfig& cfg);

    static bool is_spike(double previous, double current, double threshold);

    // Feeds the loss of the current epoch; returns true when the rate was decayed.
    bool observe(double loss);
    double rate(Index epoch) const;
    double base() const { return base_; }

private:
    double base_;
    double threshold_;
    double gamma_;
    std::optional<double> gamma_cyclic_;
    Index cap_;
    Index period_;
    double floor_;
    std::optional<double> previous_;
};

struct TrainResult {
    ReadoutWeights w_best;
    TrainTrace trace;
};

TrainResult train(const ResidualProblem& problem, const TrialBasis& basis,
                  const ReadoutWeights& w_init, const GDConfig& cfg);

// Entries i.i.d. normal(0, 0.01^2) from the given seed.
ReadoutWeights random_weights(Index outputs, Index features, std::uint64_t seed);

}  // namespace esnode
