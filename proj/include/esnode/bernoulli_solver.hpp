#pragma once

#include "esnode/gd_trainer.hpp"
#include "esnode/linear_solver.hpp"

#include <vector>

namespace esnode {

// a1(t) y' + a0(t) y + q(t) y^2 = f(t)
struct BernoulliODE {
    TimeFunction a1;
    TimeFunction a0;
    TimeFunction q;
    TimeFunction force;
    std::vector<double> psi0_list;
    double t_start = 0.0;
    double t_end = 1.0;

    LinearODE linear_part() const;
};

// Linearized characteristic matrices: drop (S w)^2 from the residual.
CharMatrices linearized_matrices(const BernoulliODE& ode, const TrialBasis& basis, double psi0);

ReadoutWeights linearized_weights(const BernoulliODE& ode, const TrialBasis& basis, double psi0,
                                  double lambda, RidgeDiagnostics* diag = nullptr);

// r = a1 y' + a0 y + q y^2 - f for one initial condition.
class BernoulliProblem : public ResidualProblem {
public:
    BernoulliProblem(const BernoulliODE& ode, const Vector& times, double psi0);

    Index outputs() const override { return 1; }
    Index equations() const override { return 1; }
    Vector initial_state() const override { return Vector::Constant(1, psi0_); }
    void evaluate(const Vector& t, const Matrix& y, const Matrix& y_dot, ResidualJet& jet,
                  bool need_partials) const override;

private:
    Vector a1_, a0_, q_, f_;
    double psi0_;
};

enum class BernoulliInit { Linearized, Random, LinearizedThenGD };

const char* bernoulli_init_name(BernoulliInit init);
BernoulliInit parse_bernoulli_init(const std::string& name);

struct BernoulliResult {
    SolveResult result;
    std::vector<TrainTrace> traces;  // one per IC; empty traces when no GD ran
    std::vector<double> initial_loss;
};

struct BernoulliICResult {
    ICSolution solution;
    TrainTrace trace;
    double initial_loss = 0.0;
    bool ill_conditioned = false;
};

// Shared propagation and basis; per-IC starts and GD runs on top of it.
class BernoulliSolver {
public:
    BernoulliSolver(const BernoulliODE& ode, const Reservoir& res);

    // ic_index offsets the seed of a random start.
    BernoulliICResult solve(double psi0, const GDConfig& cfg, BernoulliInit init, std::size_t ic_index) const;

    const TrialBasis& basis() const { return basis_; }

private:
    BernoulliODE ode_;
    TrialBasis basis_;
    double lambda_ = 0.0;
};

// Ridge strength for the linearized start is res.hyper().regularization.
BernoulliResult solve_bernoulli(const BernoulliODE& ode, const Reservoir& res, const GDConfig& cfg,
                                BernoulliInit init, int threads = 1);

}  // namespace esnode
