#include "esnode/bernoulli_solver.hpp"
#include "esnode/gd_trainer.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace esnode;

namespace {

// r = a1 y' + a0 y - f with constant coefficients, written out independently
// of the linear solver.
class AffineProblem : public ResidualProblem {
public:
    AffineProblem(double a1, double a0, Vector f, double psi0) : a1_(a1), a0_(a0), f_(std::move(f)), psi0_(psi0) {}
    Index outputs() const override { return 1; }
    Index equations() const override { return 1; }
    Vector initial_state() const override { return Vector::Constant(1, psi0_); }
    void evaluate(const Vector& t, const Matrix& y, const Matrix& y_dot, ResidualJet& jet,
                  bool need_partials) const override {
        jet.value = a1_ * y_dot + a0_ * y - f_;
        if (!need_partials) return;
        jet.d_y = {Matrix::Constant(t.size(), 1, a0_)};
        jet.d_ydot = {Matrix::Constant(t.size(), 1, a1_)};
    }

private:
    double a1_, a0_;
    Vector f_;
    double psi0_;
};

TrialBasis random_basis(Index k, Index m, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TrialBasis b;
    b.times = Vector::LinSpaced(k, 0.0, 1.0);
    b.s_mat.resize(k, m + 1);
    b.s_dot.resize(k, m + 1);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j <= m; ++j) {
            b.s_mat(i, j) = u(gen);
            b.s_dot(i, j) = u(gen);
        }
    return b;
}

Matrix nonzero_weights(Index r, Index p, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.1, 0.5);
    std::bernoulli_distribution sign(0.5);
    Matrix w(r, p);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < p; ++j) w(i, j) = sign(gen) ? u(gen) : -u(gen);
    return w;
}

double fd_relative_error(const ResidualProblem& problem, const TrialBasis& basis, const Matrix& w,
                         const ElasticNet& reg) {
    const LossGrad lg = loss_and_grad(problem, basis, ReadoutWeights(w), reg);
    const double h = 1e-6;
    double worst = 0.0;
    for (Index i = 0; i < w.rows(); ++i)
        for (Index j = 0; j < w.cols(); ++j) {
            Matrix wp = w, wm = w;
            wp(i, j) += h;
            wm(i, j) -= h;
            const double fd = (loss_value(problem, basis, ReadoutWeights(wp), reg) -
                               loss_value(problem, basis, ReadoutWeights(wm), reg)) /
                              (2.0 * h);
            worst = std::max(worst, std::abs(fd - lg.grad(i, j)) / std::max(std::abs(fd), 1.0));
        }
    return worst;
}

}  // namespace

TEST_CASE("linear residual gradient equals the normal-equation form") {
    const TrialBasis basis = random_basis(30, 6, 1);
    const Vector f = Vector::Random(30);
    const AffineProblem problem(1.0, 0.7, f, 0.4);
    const Matrix d_h = basis.s_dot + 0.7 * basis.s_mat;
    const Vector d_0 = Vector::Constant(30, 0.7 * 0.4) - f;
    const Matrix w = Matrix::Random(1, 7);
    const LossGrad lg = loss_and_grad(problem, basis, ReadoutWeights(w));
    const Vector r = d_h * w.transpose() + d_0;
    CHECK(lg.loss == doctest::Approx(r.squaredNorm()).epsilon(1e-13));
    CHECK((lg.grad.transpose() - 2.0 * d_h.transpose() * r).norm() <= 1e-12 * (1.0 + r.norm()));

    const Vector w_star = -(d_h.transpose() * d_h).ldlt().solve(d_h.transpose() * d_0);
    const LossGrad at_opt = loss_and_grad(problem, basis, ReadoutWeights(Matrix(w_star.transpose())));
    CHECK(at_opt.grad.norm() <= 1e-9 * (1.0 + (d_h.transpose() * d_0).norm()));
}

TEST_CASE("pure L2 elastic net reproduces the ridge objective") {
    const TrialBasis basis = random_basis(25, 4, 2);
    const Vector f = Vector::Random(25);
    const AffineProblem problem(1.0, 1.0, f, -1.0);
    const Matrix d_h = basis.s_dot + basis.s_mat;
    const Vector d_0 = Vector::Constant(25, -1.0) - f;
    const double lambda = 0.37;
    const Matrix w = Matrix::Random(1, 5);
    const double ridge = (d_h * w.transpose() + d_0).squaredNorm() + lambda * w.squaredNorm();
    CHECK(loss_value(problem, basis, ReadoutWeights(w), {0.0, lambda}) == doctest::Approx(ridge).epsilon(1e-13));
}

TEST_CASE("elastic net value and subgradient") {
    Matrix w(1, 3);
    w << -2.0, 0.0, 0.5;
    const ElasticNet en{0.25, 2.0};
    CHECK(en.value(w) == doctest::Approx(2.0 * (0.25 * 2.5 + 0.75 * 4.25)));
    Matrix g = Matrix::Zero(1, 3);
    en.add_gradient(w, g);
    CHECK(g(0, 0) == doctest::Approx(2.0 * (-0.25 + 1.5 * -2.0)));
    CHECK(g(0, 1) == 0.0);
    CHECK(g(0, 2) == doctest::Approx(2.0 * (0.25 + 1.5 * 0.5)));
}

TEST_CASE("nonlinear residual gradient matches central differences") {
    const TrialBasis basis = random_basis(20, 5, 3);
    const auto c = [](double v) { return TimeFunction([v](double) { return v; }); };
    const BernoulliODE ode{c(1.0), c(0.8), c(0.5), [](double t) { return std::cos(t); }, {}, 0.0, 1.0};
    const BernoulliProblem problem(ode, basis.times, 0.6);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix w = nonzero_weights(1, 6, seed);
        CHECK(fd_relative_error(problem, basis, w, {}) <= 1e-5);
        CHECK(fd_relative_error(problem, basis, w, {0.3, 0.2}) <= 1e-5);
    }
}

TEST_CASE("gradient descent on a convex quadratic is monotone and converges") {
    TrialBasis basis = random_basis(20, 2, 4);
    basis.s_dot.setZero();
    const Vector target = Vector::Random(20);
    const AffineProblem problem(0.0, 1.0, target, 0.0);
    const double lmax = (2.0 * basis.s_mat.transpose() * basis.s_mat).eigenvalues().real().maxCoeff();
    GDConfig cfg;
    cfg.epochs = 4000;
    cfg.learning_rate = 1.0 / lmax;
    const TrainResult tr = train(problem, basis, ReadoutWeights::zeros(1, 3), cfg);
    // Monotone up to rounding in the loss evaluation itself.
    for (std::size_t i = 1; i < tr.trace.loss_per_epoch.size(); ++i)
        CHECK(tr.trace.loss_per_epoch[i] <= tr.trace.loss_per_epoch[i - 1] * (1.0 + 1e-14));
    CHECK(loss_and_grad(problem, basis, tr.w_best).grad.norm() <= 1e-6);
    CHECK(tr.trace.spikes == 0);
}

TEST_CASE("best weights are the ones with the lowest recorded loss") {
    const TrialBasis basis = random_basis(20, 3, 5);
    const AffineProblem problem(1.0, 1.0, Vector::Random(20), 0.5);
    GDConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 0.05;
    cfg.spike_threshold = 1e9;
    const TrainResult tr = train(problem, basis, ReadoutWeights(Matrix::Random(1, 4)), cfg);
    const auto& l = tr.trace.loss_per_epoch;
    const double min = *std::min_element(l.begin(), l.end());
    CHECK(tr.trace.best_loss == min);
    CHECK(l[static_cast<std::size_t>(tr.trace.best_epoch)] == min);
    CHECK(loss_value(problem, basis, tr.w_best) == doctest::Approx(min).epsilon(1e-12));
}

TEST_CASE("spike rule decays the rate once per jump") {
    GDConfig cfg;
    cfg.learning_rate = 0.2;
    cfg.spike_threshold = 0.25;
    cfg.gamma = 0.5;
    LearningRateSchedule s(cfg);
    double loss = 10.0;
    for (int epoch = 0; epoch < 20; ++epoch) {
        if (epoch == 10) loss += 2.0 * cfg.spike_threshold;
        else loss -= 0.01;
        const double before = s.base();
        const bool fired = s.observe(loss);
        CHECK(fired == (epoch == 10));
        if (epoch == 10) CHECK(s.rate(epoch) == doctest::Approx(cfg.gamma * before));
    }
    CHECK(s.base() == doctest::Approx(0.1));
    CHECK(LearningRateSchedule::is_spike(1.0, 1.3, 0.25));
    CHECK_FALSE(LearningRateSchedule::is_spike(1.0, 1.2, 0.25));
    CHECK_FALSE(LearningRateSchedule::is_spike(1.0, 0.0, 0.25));
    CHECK(s.observe(NAN));
    CHECK(s.base() == doctest::Approx(0.05));
}

TEST_CASE("cyclic schedule shape") {
    GDConfig cfg;
    cfg.learning_rate = 1.0;
    cfg.gamma_cyclic = 0.99;
    const LearningRateSchedule s(cfg);
    CHECK(s.rate(0) == doctest::Approx(0.1));
    CHECK(s.rate(100) == doctest::Approx(0.1 + 0.9 * std::pow(0.99, 100)));
    CHECK(s.rate(50) == doctest::Approx(0.1 + 0.9 * 0.5 * std::pow(0.99, 50)));
    CHECK(s.rate(200) == doctest::Approx(0.1));
    CHECK(s.rate(5000) == doctest::Approx(0.1));
    CHECK(s.rate(12345) == doctest::Approx(0.1));
    for (Index e = 0; e < 5000; e += 37) {
        CHECK(s.rate(e) >= 0.1 - 1e-15);
        CHECK(s.rate(e) <= 1.0 + 1e-15);
    }
    GDConfig plain;
    plain.learning_rate = 0.3;
    CHECK(LearningRateSchedule(plain).rate(777) == 0.3);
}

TEST_CASE("divergent steps are recorded as spikes and training recovers") {
    const TrialBasis basis = random_basis(20, 3, 6);
    const AffineProblem problem(1.0, 1.0, Vector::Random(20), 0.5);
    GDConfig cfg;
    cfg.epochs = 400;
    cfg.learning_rate = 50.0;
    cfg.gamma = 0.1;
    const ReadoutWeights w0(Matrix::Random(1, 4));
    const TrainResult tr = train(problem, basis, w0, cfg);
    CHECK(tr.trace.spikes >= 1);
    CHECK(std::isfinite(tr.trace.best_loss));
    CHECK(tr.trace.final_lr < cfg.learning_rate);
    CHECK(tr.trace.best_loss <= loss_value(problem, basis, w0));
    CHECK(tr.w_best.w_out.allFinite());
}

TEST_CASE("preconditioned momentum descent reaches the least-squares optimum") {
    const TrialBasis basis = random_basis(40, 5, 7);
    const Vector f = Vector::Random(40);
    const AffineProblem problem(1.0, 2.0, f, 0.0);
    GDConfig cfg;
    cfg.epochs = 3000;
    cfg.learning_rate = 0.05;
    cfg.momentum = 0.9;
    cfg.preconditioner = Preconditioner::Gram;
    const TrainResult tr = train(problem, basis, ReadoutWeights::zeros(1, 6), cfg);
    const Matrix d_h = basis.s_dot + 2.0 * basis.s_mat;
    const Vector w_star = d_h.colPivHouseholderQr().solve(f);
    CHECK((tr.w_best.w_out.row(0).transpose() - w_star).norm() <= 1e-6 * (1.0 + w_star.norm()));
}

TEST_CASE("random initial weights are small and seeded") {
    const ReadoutWeights a = random_weights(2, 500, 11);
    const ReadoutWeights b = random_weights(2, 500, 11);
    const ReadoutWeights c = random_weights(2, 500, 12);
    CHECK(a.w_out == b.w_out);
    CHECK(a.w_out != c.w_out);
    const double sd = std::sqrt(a.w_out.squaredNorm() / 1000.0);
    CHECK(sd == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("invalid training settings are rejected") {
    const TrialBasis basis = random_basis(5, 2, 8);
    const AffineProblem problem(1.0, 1.0, Vector::Zero(5), 0.0);
    GDConfig cfg;
    cfg.gamma = 1.5;
    CHECK_THROWS_AS(train(problem, basis, ReadoutWeights::zeros(1, 3), cfg), Error);
    cfg = GDConfig{};
    CHECK_THROWS_AS(train(problem, basis, ReadoutWeights::zeros(2, 3), cfg), Error);
}
