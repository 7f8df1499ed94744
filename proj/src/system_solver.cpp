#include "esnode/system_solver.hpp"
#include "esnode/rng.hpp"

#include <algorithm>
#include <cmath>

namespace esnode {

ExplicitSystem::ExplicitSystem(std::string name, Index dim, Rhs f, Jacobian jac,
                               std::optional<Hamiltonian> h)
    : name_(std::move(name)), dim_(dim), f_(std::move(f)), jac_(std::move(jac)), h_(std::move(h)) {
    require(dim_ >= 1, ErrorKind::InvalidArgument, "system dimension must be >= 1");
}

void ExplicitSystem::residual(double t, const Vector& y, const Vector& y_dot, Vector& res, Matrix* jy,
                              Matrix* jyd) const {
    res = y_dot - f_(t, y);
    if (jy) *jy = -jac_(t, y);
    if (jyd) *jyd = Matrix::Identity(dim_, dim_);
}

std::shared_ptr<OdeSystem> nonlinear_oscillator() {
    auto f = [](double, const Vector& y) {
        Vector d(2);
        d << y(1), -y(0) - y(0) * y(0) * y(0);
        return d;
    };
    auto jac = [](double, const Vector& y) {
        Matrix j(2, 2);
        j << 0.0, 1.0, -1.0 - 3.0 * y(0) * y(0), 0.0;
        return j;
    };
    Hamiltonian h{[](const Vector& y) {
                      const double x2 = y(0) * y(0);
                      return 0.5 * y(1) * y(1) + 0.5 * x2 + 0.25 * x2 * x2;
                  },
                  [](const Vector& y) {
                      Vector g(2);
                      g << y(0) + y(0) * y(0) * y(0), y(1);
                      return g;
                  }};
    return std::make_shared<ExplicitSystem>("nonlinear_oscillator", 2, f, jac, h);
}

std::shared_ptr<OdeSystem> harmonic_oscillator() {
    auto f = [](double, const Vector& y) {
        Vector d(2);
        d << y(1), -y(0);
        return d;
    };
    auto jac = [](double, const Vector&) {
        Matrix j(2, 2);
        j << 0.0, 1.0, -1.0, 0.0;
        return j;
    };
    Hamiltonian h{[](const Vector& y) { return 0.5 * (y(0) * y(0) + y(1) * y(1)); },
                  [](const Vector& y) { return Vector(y); }};
    return std::make_shared<ExplicitSystem>("harmonic_oscillator", 2, f, jac, h);
}

std::shared_ptr<OdeSystem> make_system(const std::string& name) {
    if (name == "nonlinear_oscillator") return nonlinear_oscillator();
    if (name == "harmonic_oscillator") return harmonic_oscillator();
    raise(ErrorKind::Config, "unknown system '" + name + "'");
}

double partials_discrepancy(const OdeSystem& sys, std::uint64_t seed, int points) {
    Rng rng(seed);
    const Index r = sys.dim();
    const double h = 1e-6;
    double worst = 0.0;
    Vector res, rp, rm;
    Matrix jy, jyd;
    for (int k = 0; k < points; ++k) {
        const double t = rng.uniform(0.0, 2.0);
        Vector y(r), yd(r);
        for (Index i = 0; i < r; ++i) {
            y(i) = rng.uniform(-1.5, 1.5);
            yd(i) = rng.uniform(-1.5, 1.5);
        }
        sys.residual(t, y, yd, res, &jy, &jyd);
        for (Index j = 0; j < r; ++j) {
            for (int which = 0; which < 2; ++which) {
                Vector a = which == 0 ? y : yd;
                Vector b = a;
                a(j) += h;
                b(j) -= h;
                if (which == 0) {
                    sys.residual(t, a, yd, rp, nullptr, nullptr);
                    sys.residual(t, b, yd, rm, nullptr, nullptr);
                } else {
                    sys.residual(t, y, a, rp, nullptr, nullptr);
                    sys.residual(t, y, b, rm, nullptr, nullptr);
                }
                const Vector fd = (rp - rm) / (2.0 * h);
                const Vector an = which == 0 ? Vector(jy.col(j)) : Vector(jyd.col(j));
                const double scale = std::max(1.0, an.cwiseAbs().maxCoeff());
                worst = std::max(worst, (fd - an).cwiseAbs().maxCoeff() / scale);
            }
        }
    }
    return worst;
}

SystemProblem::SystemProblem(const SystemSpec& spec) : sys_(spec.system), ic_(spec.ic) {
    require(sys_ != nullptr, ErrorKind::InvalidArgument, "no system given");
    require(ic_.size() == sys_->dim(), ErrorKind::DimensionMismatch,
            "initial condition size does not match system dimension");
    const double disc = partials_discrepancy(*sys_);
    require(disc <= 1e-5, ErrorKind::Config,
            "residual partials of '" + sys_->name() + "' disagree with finite differences");
    if (spec.use_hamiltonian) {
        if (auto h = sys_->hamiltonian()) {
            require(spec.hamiltonian_weight >= 0.0, ErrorKind::InvalidArgument,
                    "hamiltonian weight must be >= 0");
            ham_ = HamiltonianSpec{*h, h->value(ic_)};
            weight_sqrt_ = std::sqrt(spec.hamiltonian_weight);
        }
    }
}

void SystemProblem::evaluate(const Vector& t, const Matrix& y, const Matrix& y_dot, ResidualJet& jet,
                             bool need_partials) const {
    const Index k = t.size();
    const Index r = sys_->dim();
    const Index e = equations();
    require(y.rows() == k && y.cols() == r && y_dot.rows() == k && y_dot.cols() == r,
            ErrorKind::DimensionMismatch, "system residual received mis-shaped arrays");
    jet.value.resize(k, e);
    if (need_partials) {
        jet.d_y.resize(static_cast<std::size_t>(r));
        jet.d_ydot.resize(static_cast<std::size_t>(r));
        for (Index j = 0; j < r; ++j) {
            jet.d_y[static_cast<std::size_t>(j)].resize(k, e);
            jet.d_ydot[static_cast<std::size_t>(j)].resize(k, e);
        }
    }
    Vector yn(r), ydn(r), res(r);
    Matrix jy, jyd;
    for (Index n = 0; n < k; ++n) {
        yn = y.row(n).transpose();
        ydn = y_dot.row(n).transpose();
        sys_->residual(t(n), yn, ydn, res, need_partials ? &jy : nullptr, need_partials ? &jyd : nullptr);
        jet.value.row(n).head(r) = res.transpose();
        if (need_partials) {
            for (Index j = 0; j < r; ++j) {
                jet.d_y[static_cast<std::size_t>(j)].row(n).head(r) = jy.col(j).transpose();
                jet.d_ydot[static_cast<std::size_t>(j)].row(n).head(r) = jyd.col(j).transpose();
            }
        }
        if (ham_) {
            const double gap = ham_->energy - ham_->h.value(yn);
            jet.value(n, r) = weight_sqrt_ * gap;
            if (need_partials) {
                const Vector gh = ham_->h.gradient(yn);
                for (Index j = 0; j < r; ++j) {
                    jet.d_y[static_cast<std::size_t>(j)](n, r) = -weight_sqrt_ * gh(j);
                    jet.d_ydot[static_cast<std::size_t>(j)](n, r) = 0.0;
                }
            }
        }
    }
}

LossGrad system_loss(const SystemSpec& spec, const TrialBasis& basis, const ReadoutWeights& w,
                     const ElasticNet& reg) {
    const SystemProblem problem(spec);
    return loss_and_grad(problem, basis, w, reg);
}

SystemResult solve_system(const SystemSpec& spec, const Reservoir& res, const GDConfig& cfg,
                          const ReadoutWeights* w_init) {
    cfg.validate();
    const TrialBasis basis = build_basis(res.propagate(spec.t_start, spec.t_end));
    return solve_system_on_basis(spec, basis, res.hyper(), cfg, w_init);
}

SystemResult solve_system_on_basis(const SystemSpec& spec, const TrialBasis& basis, const HyperParams& hyper,
                                   const GDConfig& cfg, const ReadoutWeights* w_init) {
    cfg.validate();
    const SystemProblem problem(spec);
    const Index r = problem.outputs();
    const ReadoutWeights w0 = w_init ? *w_init : random_weights(r, basis.features(), cfg.seed);

    TrainResult tr = train(problem, basis, w0, cfg);

    SystemResult out;
    out.times = basis.times;
    out.hyper = hyper;
    out.trace = std::move(tr.trace);
    ICSolution& sol = out.solution;
    sol.psi0 = spec.ic;
    const Trajectory traj = evaluate(basis, tr.w_best, spec.ic);
    sol.y = traj.y;
    sol.y_dot = traj.y_dot;
    const Matrix all = residuals_at(problem, basis, tr.w_best);
    sol.residual = all.leftCols(r);
    sol.weights = std::move(tr.w_best);
    if (auto h = spec.system->hamiltonian()) {
        out.energy = h->value(spec.ic);
        out.energy_violation.resize(basis.size());
        for (Index n = 0; n < basis.size(); ++n)
            out.energy_violation(n) = std::abs(out.energy - h->value(Vector(sol.y.row(n).transpose())));
    }
    return out;
}

}  // namespace esnode
