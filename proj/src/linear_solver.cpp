#include "esnode/linear_solver.hpp"
#include "esnode/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <sstream>

namespace esnode {

Vector sample(const TimeFunction& fn, const Vector& times) {
    Vector v(times.size());
    for (Index n = 0; n < times.size(); ++n) v(n) = fn(times(n));
    return v;
}

Vector sample_nonzero(const TimeFunction& fn, const Vector& times, const char* what) {
    Vector v = sample(fn, times);
    for (Index n = 0; n < v.size(); ++n) {
        if (v(n) == 0.0 || !std::isfinite(v(n))) {
            std::ostringstream msg;
            msg << what << " is zero or non-finite at t = " << times(n);
            raise(ErrorKind::SingularCoefficient, msg.str());
        }
    }
    return v;
}

CharMatrices characteristic_matrices(const LinearODE& ode, const TrialBasis& basis, double psi0) {
    const Vector a1 = sample_nonzero(ode.a1, basis.times, "a1(t)");
    const Vector a0 = sample(ode.a0, basis.times);
    const Vector f = sample(ode.force, basis.times);
    CharMatrices cm;
    cm.d_h = a1.asDiagonal() * basis.s_dot;
    cm.d_h.noalias() += a0.asDiagonal() * basis.s_mat;
    cm.d_0 = a0 * psi0 - f;
    return cm;
}

struct RidgeFactorization::Impl {
    Eigen::LLT<Matrix> llt;
    Eigen::ColPivHouseholderQR<Matrix> qr;
    bool use_qr = false;
};

RidgeFactorization::RidgeFactorization(const Matrix& d_h, double lambda)
    : impl_(std::make_unique<Impl>()) {
    require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::InvalidArgument,
            "regularization must be finite and >= 0");
    const Index p = d_h.cols();
    Matrix gram = Matrix::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(d_h.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    gram.diagonal().array() += lambda;

    impl_->llt.compute(gram);
    if (impl_->llt.info() == Eigen::Success && impl_->llt.rcond() > 0.0) {
        diag_.condition_estimate = 1.0 / impl_->llt.rcond();
    } else {
        impl_->use_qr = true;
        impl_->qr.compute(gram);
        diag_.used_fallback = true;
        const double amax = impl_->qr.maxPivot();
        const Vector rdiag = impl_->qr.matrixQR().diagonal().cwiseAbs();
        const double amin = rdiag.minCoeff();
        diag_.condition_estimate = amin > 0.0 ? amax / amin : INFINITY;
    }
    diag_.ill_conditioned = !(diag_.condition_estimate <= kIllConditionedLimit);
}

RidgeFactorization::~RidgeFactorization() = default;
RidgeFactorization::RidgeFactorization(RidgeFactorization&&) noexcept = default;
RidgeFactorization& RidgeFactorization::operator=(RidgeFactorization&&) noexcept = default;

Vector RidgeFactorization::solve(const Vector& rhs) const {
    Vector x = impl_->use_qr ? Vector(impl_->qr.solve(rhs)) : Vector(impl_->llt.solve(rhs));
    if (!x.allFinite()) raise(ErrorKind::IllConditioned, "ridge solve produced non-finite weights");
    return x;
}

ReadoutWeights closed_form_weights(const CharMatrices& cm, double lambda, RidgeDiagnostics* diag) {
    require(cm.d_h.rows() == cm.d_0.size(), ErrorKind::DimensionMismatch,
            "d_h and d_0 row counts differ");
    RidgeFactorization fac(cm.d_h, lambda);
    if (diag) *diag = fac.diagnostics();
    const Vector w = -fac.solve(cm.d_h.transpose() * cm.d_0);
    return ReadoutWeights(Matrix(w.transpose()));
}

LinearSolver::LinearSolver(const LinearODE& ode, const Reservoir& res)
    : lambda_(res.hyper().regularization) {
    basis_ = build_basis(res.propagate(ode.t_start, ode.t_end));
    a1_ = sample_nonzero(ode.a1, basis_.times, "a1(t)");
    a0_ = sample(ode.a0, basis_.times);
    f_ = sample(ode.force, basis_.times);

    Matrix d_h = a1_.asDiagonal() * basis_.s_dot;
    d_h.noalias() += a0_.asDiagonal() * basis_.s_mat;
    factor_.emplace(d_h, lambda_);

    // d_0 = a0 psi0 - f, so w = -(G + lambda I)^-1 D^T (a0 psi0 - f).
    u_psi_ = -factor_->solve(d_h.transpose() * a0_);
    u_free_ = factor_->solve(d_h.transpose() * f_);
    y_psi_ = basis_.s_mat * u_psi_;
    y_free_ = basis_.s_mat * u_free_;
    yd_psi_ = basis_.s_dot * u_psi_;
    yd_free_ = basis_.s_dot * u_free_;
}

ICSolution LinearSolver::solve(double psi0) const {
    ICSolution sol;
    sol.psi0 = Vector::Constant(1, psi0);
    sol.weights = ReadoutWeights(Matrix((psi0 * u_psi_ + u_free_).transpose()));
    sol.y = (psi0 + (psi0 * y_psi_ + y_free_).array()).matrix();
    sol.y_dot = psi0 * yd_psi_ + yd_free_;
    sol.residual = (a1_.array() * sol.y_dot.col(0).array() + a0_.array() * sol.y.col(0).array() -
                    f_.array())
                       .matrix();
    return sol;
}

SolveResult solve_linear(const LinearODE& ode, const Reservoir& res, int threads) {
    require(!ode.psi0_list.empty(), ErrorKind::InvalidArgument, "no initial conditions given");
    LinearSolver solver(ode, res);
    SolveResult out;
    out.times = solver.basis().times;
    out.hyper = res.hyper();
    if (solver.diagnostics().ill_conditioned) {
        std::ostringstream msg;
        msg << "regularized Gram matrix condition estimate " << solver.diagnostics().condition_estimate
            << " exceeds " << kIllConditionedLimit;
        out.warnings.push_back(msg.str());
    }
    out.solutions.resize(ode.psi0_list.size());
    parallel_for(ode.psi0_list.size(), threads,
                 [&](std::size_t i) { out.solutions[i] = solver.solve(ode.psi0_list[i]); });
    return out;
}

Vector rmsr(const Matrix& residual_per_ic) {
    require(residual_per_ic.rows() >= 1, ErrorKind::InvalidArgument, "rmsr needs at least one IC");
    return (residual_per_ic.array().square().colwise().sum() /
            static_cast<double>(residual_per_ic.rows()))
        .sqrt()
        .transpose();
}

Matrix residual_table(const std::vector<ICSolution>& solutions, Index col) {
    require(!solutions.empty(), ErrorKind::InvalidArgument, "no solutions");
    const Index k = solutions.front().residual.rows();
    Matrix out(static_cast<Index>(solutions.size()), k);
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        require(solutions[i].residual.rows() == k, ErrorKind::DimensionMismatch,
                "residual lengths differ across ICs");
        out.row(static_cast<Index>(i)) = solutions[i].residual.col(col).transpose();
    }
    return out;
}

}  // namespace esnode
