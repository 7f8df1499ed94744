#include "esnode/bernoulli_solver.hpp"
#include "esnode/parallel.hpp"

#include <cmath>

namespace esnode {

LinearODE BernoulliODE::linear_part() const {
    return LinearODE{a1, a0, force, psi0_list, t_start, t_end};
}

// Starting from r = A1 S' w + A0 (psi0 + S w) + Q (psi0 + S w)^2 - F and
// dropping (S w)^2 leaves r = (D_H + 2 Q psi0 S) w + (D_0 + Q psi0^2), with
// Q acting row-wise. The ridge minimizer of this affine residual is the
// usual closed form with the corrected matrices.
CharMatrices linearized_matrices(const BernoulliODE& ode, const TrialBasis& basis, double psi0) {
    CharMatrices cm = characteristic_matrices(ode.linear_part(), basis, psi0);
    const Vector q = sample(ode.q, basis.times);
    cm.d_h.noalias() += (2.0 * psi0 * q).asDiagonal() * basis.s_mat;
    cm.d_0 += q * (psi0 * psi0);
    return cm;
}

ReadoutWeights linearized_weights(const BernoulliODE& ode, const TrialBasis& basis, double psi0,
                                  double lambda, RidgeDiagnostics* diag) {
    return closed_form_weights(linearized_matrices(ode, basis, psi0), lambda, diag);
}

BernoulliProblem::BernoulliProblem(const BernoulliODE& ode, const Vector& times, double psi0)
    : a1_(sample_nonzero(ode.a1, times, "a1(t)")),
      a0_(sample(ode.a0, times)),
      q_(sample(ode.q, times)),
      f_(sample(ode.force, times)),
      psi0_(psi0) {}

void BernoulliProblem::evaluate(const Vector& t, const Matrix& y, const Matrix& y_dot,
                                ResidualJet& jet, bool need_partials) const {
    require(t.size() == a1_.size() && y.cols() == 1 && y_dot.cols() == 1, ErrorKind::DimensionMismatch,
            "Bernoulli residual expects the sampling grid and one output");
    const auto yv = y.col(0).array();
    jet.value.resize(t.size(), 1);
    jet.value.col(0) = a1_.array() * y_dot.col(0).array() + a0_.array() * yv + q_.array() * yv.square() -
                       f_.array();
    if (!need_partials) return;
    jet.d_y.resize(1);
    jet.d_ydot.resize(1);
    jet.d_y[0].resize(t.size(), 1);
    jet.d_y[0].col(0) = a0_.array() + 2.0 * q_.array() * yv;
    jet.d_ydot[0] = a1_;
}

const char* bernoulli_init_name(BernoulliInit init) {
    switch (init) {
        case BernoulliInit::Linearized: return "linearized";
        case BernoulliInit::Random: return "random";
        case BernoulliInit::LinearizedThenGD: return "linearized_then_gd";
    }
    return "linearized_then_gd";
}

BernoulliInit parse_bernoulli_init(const std::string& name) {
    if (name == "linearized") return BernoulliInit::Linearized;
    if (name == "random") return BernoulliInit::Random;
    if (name == "linearized_then_gd") return BernoulliInit::LinearizedThenGD;
    raise(ErrorKind::Config, "unknown Bernoulli init '" + name + "'");
}

BernoulliSolver::BernoulliSolver(const BernoulliODE& ode, const Reservoir& res)
    : ode_(ode), basis_(build_basis(res.propagate(ode.t_start, ode.t_end))), lambda_(res.hyper().regularization) {}

BernoulliICResult BernoulliSolver::solve(double psi0, const GDConfig& cfg, BernoulliInit init,
                                         std::size_t ic_index) const {
    if (init != BernoulliInit::Linearized) cfg.validate();
    const BernoulliProblem problem(ode_, basis_.times, psi0);
    BernoulliICResult out;
    ReadoutWeights w0;
    if (init == BernoulliInit::Random) {
        w0 = random_weights(1, basis_.features(), cfg.seed + ic_index);
    } else {
        RidgeDiagnostics diag;
        w0 = linearized_weights(ode_, basis_, psi0, lambda_, &diag);
        out.ill_conditioned = diag.ill_conditioned;
    }
    out.initial_loss = loss_value(problem, basis_, w0, cfg.elastic_net());

    ReadoutWeights w = w0;
    if (init != BernoulliInit::Linearized) {
        TrainResult tr = train(problem, basis_, w0, cfg);
        w = std::move(tr.w_best);
        out.trace = std::move(tr.trace);
    }
    ICSolution& sol = out.solution;
    sol.psi0 = Vector::Constant(1, psi0);
    const Trajectory traj = evaluate(basis_, w, sol.psi0);
    sol.y = traj.y;
    sol.y_dot = traj.y_dot;
    sol.residual = residuals_at(problem, basis_, w);
    sol.weights = std::move(w);
    return out;
}

BernoulliResult solve_bernoulli(const BernoulliODE& ode, const Reservoir& res, const GDConfig& cfg,
                                BernoulliInit init, int threads) {
    require(!ode.psi0_list.empty(), ErrorKind::InvalidArgument, "no initial conditions given");
    if (init != BernoulliInit::Linearized) cfg.validate();
    const BernoulliSolver solver(ode, res);

    BernoulliResult out;
    out.result.times = solver.basis().times;
    out.result.hyper = res.hyper();
    const std::size_t n_ic = ode.psi0_list.size();
    out.result.solutions.resize(n_ic);
    out.traces.resize(n_ic);
    out.initial_loss.resize(n_ic);
    std::vector<char> ill(n_ic, 0);

    parallel_for(n_ic, threads, [&](std::size_t i) {
        BernoulliICResult r = solver.solve(ode.psi0_list[i], cfg, init, i);
        out.result.solutions[i] = std::move(r.solution);
        out.traces[i] = std::move(r.trace);
        out.initial_loss[i] = r.initial_loss;
        ill[i] = r.ill_conditioned;
    });
    for (std::size_t i = 0; i < n_ic; ++i)
        if (ill[i])
            out.result.warnings.push_back("linearized ridge system is ill-conditioned for psi0 = " +
                                          std::to_string(ode.psi0_list[i]));
    return out;
}

}  // namespace esnode
