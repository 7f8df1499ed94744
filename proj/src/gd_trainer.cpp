#include "esnode/gd_trainer.hpp"
#include "esnode/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace esnode {

namespace {

void check_shapes(const ResidualProblem& problem, const TrialBasis& basis, const ReadoutWeights& w) {
    require(w.outputs() == problem.outputs(), ErrorKind::DimensionMismatch,
            "readout rows do not match problem outputs");
    require(w.features() == basis.features(), ErrorKind::DimensionMismatch,
            "readout width does not match basis");
}

// Reuses buffers across epochs.
class Evaluator {
public:
    Evaluator(const ResidualProblem& problem, const TrialBasis& basis, const ElasticNet& reg)
        : problem_(problem), basis_(basis), reg_(reg), psi0_(problem.initial_state()) {}

    double loss(const Matrix& w) {
        forward(w, false);
        return jet_.value.squaredNorm() + reg_.value(w);
    }

    double loss_grad(const Matrix& w, Matrix& grad) {
        forward(w, true);
        const Index k = basis_.size();
        const Index r_out = problem_.outputs();
        a_.resize(k, r_out);
        b_.resize(k, r_out);
        for (Index r = 0; r < r_out; ++r) {
            a_.col(r) = (jet_.value.array() * jet_.d_y[static_cast<std::size_t>(r)].array()).rowwise().sum();
            b_.col(r) = (jet_.value.array() * jet_.d_ydot[static_cast<std::size_t>(r)].array()).rowwise().sum();
        }
        grad.noalias() = 2.0 * (a_.transpose() * basis_.s_mat);
        grad.noalias() += 2.0 * (b_.transpose() * basis_.s_dot);
        reg_.add_gradient(w, grad);
        return jet_.value.squaredNorm() + reg_.value(w);
    }

    const ResidualJet& jet() const { return jet_; }

private:
    void forward(const Matrix& w, bool partials) {
        y_.noalias() = basis_.s_mat * w.transpose();
        y_.rowwise() += psi0_.transpose();
        yd_.noalias() = basis_.s_dot * w.transpose();
        problem_.evaluate(basis_.times, y_, yd_, jet_, partials);
    }

    const ResidualProblem& problem_;
    const TrialBasis& basis_;
    ElasticNet reg_;
    Vector psi0_;
    Matrix y_, yd_, a_, b_;
    ResidualJet jet_;
};

}  // namespace

double ElasticNet::value(const Matrix& w) const {
    if (strength == 0.0) return 0.0;
    return strength * (alpha * w.cwiseAbs().sum() + (1.0 - alpha) * w.squaredNorm());
}

void ElasticNet::add_gradient(const Matrix& w, Matrix& grad) const {
    if (strength == 0.0) return;
    grad.array() += strength * (alpha * w.array().sign() + 2.0 * (1.0 - alpha) * w.array());
}

void GDConfig::validate() const {
    require(epochs >= 1, ErrorKind::InvalidArgument, "epochs must be positive");
    require(learning_rate > 0.0, ErrorKind::InvalidArgument, "learning_rate must be positive");
    require(spike_threshold > 0.0, ErrorKind::InvalidArgument, "spike_threshold must be positive");
    require(gamma > 0.0 && gamma < 1.0, ErrorKind::InvalidArgument, "gamma must lie in (0, 1)");
    if (gamma_cyclic)
        require(*gamma_cyclic > 0.0 && *gamma_cyclic < 1.0, ErrorKind::InvalidArgument,
                "gamma_cyclic must lie in (0, 1)");
    require(cyclic_cap_epochs >= 1 && cyclic_period >= 2, ErrorKind::InvalidArgument,
            "cyclic cap and period must be positive");
    require(cyclic_floor > 0.0 && cyclic_floor <= 1.0, ErrorKind::InvalidArgument,
            "cyclic_floor must lie in (0, 1]");
    require(enet_alpha >= 0.0 && enet_alpha <= 1.0, ErrorKind::InvalidArgument,
            "enet_alpha must lie in [0, 1]");
    require(enet_strength >= 0.0, ErrorKind::InvalidArgument, "enet_strength must be >= 0");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::InvalidArgument, "momentum must lie in [0, 1)");
    require(precondition_ridge > 0.0, ErrorKind::InvalidArgument, "precondition_ridge must be positive");
}

LossGrad loss_and_grad(const ResidualProblem& problem, const TrialBasis& basis,
                       const ReadoutWeights& w, const ElasticNet& reg) {
    check_shapes(problem, basis, w);
    Evaluator ev(problem, basis, reg);
    LossGrad out;
    out.loss = ev.loss_grad(w.w_out, out.grad);
    return out;
}

double loss_value(const ResidualProblem& problem, const TrialBasis& basis, const ReadoutWeights& w,
                  const ElasticNet& reg) {
    check_shapes(problem, basis, w);
    Evaluator ev(problem, basis, reg);
    return ev.loss(w.w_out);
}

Matrix residuals_at(const ResidualProblem& problem, const TrialBasis& basis, const ReadoutWeights& w) {
    check_shapes(problem, basis, w);
    Evaluator ev(problem, basis, {});
    ev.loss(w.w_out);
    return ev.jet().value;
}

LearningRateSchedule::LearningRateSchedule(const GDConfig& cfg)
    : base_(cfg.learning_rate),
      threshold_(cfg.spike_threshold),
      gamma_(cfg.gamma),
      gamma_cyclic_(cfg.gamma_cyclic),
      cap_(cfg.cyclic_cap_epochs),
      period_(cfg.cyclic_period),
      floor_(cfg.cyclic_floor) {}

bool LearningRateSchedule::is_spike(double previous, double current, double threshold) {
    return current - previous > threshold;
}

bool LearningRateSchedule::observe(double loss) {
    bool fired = false;
    if (!std::isfinite(loss)) fired = true;
    else if (previous_ && is_spike(*previous_, loss, threshold_)) fired = true;
    if (fired) base_ *= gamma_;
    previous_ = std::isfinite(loss) ? loss : INFINITY;
    return fired;
}

double LearningRateSchedule::rate(Index epoch) const {
    if (!gamma_cyclic_) return base_;
    if (epoch >= cap_) return base_ * floor_;
    const double half = 0.5 * static_cast<double>(period_);
    const double phase = std::fmod(static_cast<double>(epoch), static_cast<double>(period_)) / half;
    const double tri = 1.0 - std::abs(phase - 1.0);
    return base_ * (floor_ + (1.0 - floor_) * tri * std::pow(*gamma_cyclic_, static_cast<double>(epoch)));
}

ReadoutWeights random_weights(Index outputs, Index features, std::uint64_t seed) {
    Rng rng(seed);
    Matrix w(outputs, features);
    for (Index r = 0; r < outputs; ++r)
        for (Index j = 0; j < features; ++j) w(r, j) = 0.01 * rng.normal();
    return ReadoutWeights(std::move(w));
}

TrainResult train(const ResidualProblem& problem, const TrialBasis& basis,
                  const ReadoutWeights& w_init, const GDConfig& cfg) {
    cfg.validate();
    check_shapes(problem, basis, w_init);
    Evaluator ev(problem, basis, cfg.elastic_net());
    LearningRateSchedule schedule(cfg);

    // Fixed metric (S^T S + S'^T S' + eps I): the loss curvature along a readout
    // row is dominated by these two Gram blocks for residuals linear in y and y'.
    std::optional<Eigen::LLT<Matrix>> metric;
    if (cfg.preconditioner == Preconditioner::Gram) {
        const Index p = basis.features();
        Matrix g = Matrix::Zero(p, p);
        g.selfadjointView<Eigen::Lower>().rankUpdate(basis.s_mat.transpose());
        g.selfadjointView<Eigen::Lower>().rankUpdate(basis.s_dot.transpose());
        g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
        g.diagonal().array() += cfg.precondition_ridge * g.trace() / static_cast<double>(p);
        metric.emplace(g);
        require(metric->info() == Eigen::Success, ErrorKind::IllConditioned,
                "preconditioner factorization failed");
    }

    TrainResult out;
    TrainTrace& trace = out.trace;
    trace.loss_per_epoch.reserve(static_cast<std::size_t>(cfg.epochs));
    trace.lr_per_epoch.reserve(static_cast<std::size_t>(cfg.epochs));

    Matrix w = w_init.w_out;
    Matrix best = w;
    Matrix grad(w.rows(), w.cols());
    Matrix step(w.rows(), w.cols());
    Matrix velocity = Matrix::Zero(w.rows(), w.cols());

    for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = ev.loss_grad(w, grad);
        const bool finite = std::isfinite(loss) && grad.allFinite();
        if (!finite) loss = INFINITY;
        trace.loss_per_epoch.push_back(loss);

        if (schedule.observe(loss)) {
            ++trace.spikes;
            velocity.setZero();
        }
        if (loss < trace.best_loss) {
            trace.best_loss = loss;
            trace.best_epoch = epoch;
            best = w;
        }
        const double lr = schedule.rate(epoch);
        trace.lr_per_epoch.push_back(lr);
        trace.final_lr = lr;

        if (!finite) {
            w = best;
            velocity.setZero();
            continue;
        }
        if (epoch + 1 == cfg.epochs) break;

        if (metric) step = metric->solve(grad.transpose()).transpose();
        else step = grad;

        if (cfg.momentum > 0.0) {
            // Adaptive restart: drop the velocity once it points uphill.
            if ((velocity.array() * grad.array()).sum() > 0.0) velocity.setZero();
            velocity = cfg.momentum * velocity - lr * step;
            w += velocity;
        } else {
            w -= lr * step;
        }
    }
    out.w_best = ReadoutWeights(best);
    return out;
}

}  // namespace esnode
