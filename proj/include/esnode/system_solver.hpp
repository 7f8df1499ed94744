#pragma once

#include "esnode/gd_trainer.hpp"
#include "esnode/linear_solver.hpp"

#include <memory>
#include <optional>
#include <string>

namespace esnode {

// Scalar function of the state with its gradient.
struct Hamiltonian {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
};

struct HamiltonianSpec {
    Hamiltonian h;
    double energy = 0.0;  // h.value(ic)
};

// First-order system in residual form r_i(t, y, y') = 0 with analytic partials.
class OdeSystem {
public:
    virtual ~OdeSystem() = default;
    virtual Index dim() const = 0;
    virtual std::string name() const = 0;
    // res: R values; jy(i, j) = d r_i / d y_j; jyd(i, j) = d r_i / d y'_j.
    virtual void residual(double t, const Vector& y, const Vector& y_dot, Vector& res, Matrix* jy,
                          Matrix* jyd) const = 0;
    // Explicit right-hand side y' = F(t, y) for the classical integrators.
    virtual Vector rhs(double t, const Vector& y) const = 0;
    virtual std::optional<Hamiltonian> hamiltonian() const { return std::nullopt; }
};

// y' = F(t, y) written as r = y' - F(t, y).
class ExplicitSystem : public OdeSystem {
public:
    using Rhs = std::function<Vector(double, const Vector&)>;
    using Jacobian = std::function<Matrix(double, const Vector&)>;

    ExplicitSystem(std::string name, Index dim, Rhs f, Jacobian jac,
                   std::optional<Hamiltonian> h = std::nullopt);

    Index dim() const override { return dim_; }
    std::string name() const override { return name_; }
    void residual(double t, const Vector& y, const Vector& y_dot, Vector& res, Matrix* jy,
                  Matrix* jyd) const override;
    Vector rhs(double t, const Vector& y) const override { return f_(t, y); }
    std::optional<Hamiltonian> hamiltonian() const override { return h_; }

private:
    std::string name_;
    Index dim_;
    Rhs f_;
    Jacobian jac_;
    std::optional<Hamiltonian> h_;
};

// x' = p, p' = -x - x^3 with H = p^2/2 + x^2/2 + x^4/4.
std::shared_ptr<OdeSystem> nonlinear_oscillator();
// x' = p, p' = -x with H = (x^2 + p^2)/2.
std::shared_ptr<OdeSystem> harmonic_oscillator();
std::shared_ptr<OdeSystem> make_system(const std::string& name);

// Finite-difference check of the residual partials at a few random points.
// Returns the largest relative discrepancy.
double partials_discrepancy(const OdeSystem& sys, std::uint64_t seed = 7, int points = 4);

struct SystemSpec {
    std::shared_ptr<OdeSystem> system;
    Vector ic;
    double t_start = 0.0;
    double t_end = 1.0;
    bool use_hamiltonian = true;
    double hamiltonian_weight = 1.0;
};

// ODE residuals plus sqrt(weight) (E - H(y)) as an extra equation.
class SystemProblem : public ResidualProblem {
public:
    explicit SystemProblem(const SystemSpec& spec);

    Index outputs() const override { return sys_->dim(); }
    Index equations() const override { return sys_->dim() + (ham_ ? 1 : 0); }
    Vector initial_state() const override { return ic_; }
    void evaluate(const Vector& t, const Matrix& y, const Matrix& y_dot, ResidualJet& jet,
                  bool need_partials) const override;

    const std::optional<HamiltonianSpec>& hamiltonian() const { return ham_; }

private:
    std::shared_ptr<OdeSystem> sys_;
    Vector ic_;
    std::optional<HamiltonianSpec> ham_;
    double weight_sqrt_ = 1.0;
};

LossGrad system_loss(const SystemSpec& spec, const TrialBasis& basis, const ReadoutWeights& w,
                     const ElasticNet& reg = {});

struct SystemResult {
    Vector times;
    HyperParams hyper;
    ICSolution solution;  // residual holds the R ODE residuals
    TrainTrace trace;
    Vector energy_violation;  // |E - H(y_n)|, empty without a Hamiltonian
    double energy = 0.0;
};

// Trains on an existing basis; hyper is recorded in the result.
SystemResult solve_system_on_basis(const SystemSpec& spec, const TrialBasis& basis, const HyperParams& hyper,
                                   const GDConfig& cfg, const ReadoutWeights* w_init = nullptr);

// Starts from random_weights(R, M+1, cfg.seed) unless w_init is given.
SystemResult solve_system(const SystemSpec& spec, const Reservoir& res, const GDConfig& cfg,
                          const ReadoutWeights* w_init = nullptr);

}  // namespace esnode
