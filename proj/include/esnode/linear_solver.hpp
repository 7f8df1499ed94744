#pragma once

#include "esnode/common.hpp"
#include "esnode/reservoir.hpp"
#include "esnode/trial.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace esnode {

// a1(t) y' + a0(t) y = f(t)
struct LinearODE {
    TimeFunction a1;
    TimeFunction a0;
    TimeFunction force;
    std::vector<double> psi0_list;
    double t_start = 0.0;
    double t_end = 1.0;
};

struct CharMatrices {
    Matrix d_h;  // K x (M+1)
    Vector d_0;  // K
};

// Samples fn on the grid. SingularCoefficient is raised by sample_nonzero when
// any value is zero.
Vector sample(const TimeFunction& fn, const Vector& times);
Vector sample_nonzero(const TimeFunction& fn, const Vector& times, const char* what);

CharMatrices characteristic_matrices(const LinearODE& ode, const TrialBasis& basis, double psi0);

struct RidgeDiagnostics {
    double condition_estimate = 1.0;  // 1-norm estimate of the regularized Gram matrix
    bool used_fallback = false;       // Cholesky failed; rank-revealing QR used instead
    bool ill_conditioned = false;     // condition_estimate > 1e14
};

inline constexpr double kIllConditionedLimit = 1e14;

// Factorization of (D^T D + lambda I), reusable across right-hand sides.
class RidgeFactorization {
public:
    RidgeFactorization(const Matrix& d_h, double lambda);
    ~RidgeFactorization();
    RidgeFactorization(RidgeFactorization&&) noexcept;
    RidgeFactorization& operator=(RidgeFactorization&&) noexcept;

    Vector solve(const Vector& rhs) const;
    const RidgeDiagnostics& diagnostics() const { return diag_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    RidgeDiagnostics diag_;
};

// argmin ||d_h w + d_0||^2 + lambda ||w||^2, returned as a one-row readout.
ReadoutWeights closed_form_weights(const CharMatrices& cm, double lambda,
                                   RidgeDiagnostics* diag = nullptr);

struct ICSolution {
    Vector psi0;
    ReadoutWeights weights;
    Matrix y;         // K x R
    Matrix y_dot;     // K x R
    Matrix residual;  // K x (number of equations)
};

struct SolveResult {
    Vector times;
    HyperParams hyper;
    std::vector<ICSolution> solutions;
    std::vector<std::string> warnings;
};

// Shared part of a linear solve: one propagation, one basis, one factorization.
// The readout is affine in psi0, so per-IC work reduces to combining two
// precomputed solutions.
class LinearSolver {
public:
    LinearSolver(const LinearODE& ode, const Reservoir& res);

    ICSolution solve(double psi0) const;

    const TrialBasis& basis() const { return basis_; }
    const RidgeDiagnostics& diagnostics() const { return factor_->diagnostics(); }
    double lambda() const { return lambda_; }

private:
    TrialBasis basis_;
    Vector a1_, a0_, f_;
    double lambda_ = 0.0;
    std::optional<RidgeFactorization> factor_;
    Vector u_psi_, u_free_;      // w = psi0 * u_psi + u_free
    Vector y_psi_, y_free_;      // S u
    Vector yd_psi_, yd_free_;    // S' u
};

SolveResult solve_linear(const LinearODE& ode, const Reservoir& res, int threads = 1);

// Root-mean-square residual across ICs: rows are ICs, columns grid points.
Vector rmsr(const Matrix& residual_per_ic);

// Stacks column `col` of each solution's residual into an L x K matrix.
Matrix residual_table(const std::vector<ICSolution>& solutions, Index col = 0);

}  // namespace esnode
