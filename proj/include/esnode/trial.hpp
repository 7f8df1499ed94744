#pragma once

#include "esnode/common.hpp"
#include "esnode/reservoir.hpp"

#include <utility>

namespace esnode {

// Time scaling g(t) with g(0) = 0 and its derivative. The default is 1 - exp(-t).
struct TrialFunction {
    std::function<double(double)> g;
    std::function<double(double)> g_dot;

    static TrialFunction exponential();
};

std::pair<double, double> g_of_t(double t);

struct TrialBasis {
    Vector times;      // K
    Matrix s_mat;      // K x (M+1), g(t_n) * h~_n
    Matrix s_dot;      // K x (M+1), product rule
    Vector g_vals;
    Vector g_dot_vals;

    Index size() const { return times.size(); }
    Index features() const { return s_mat.cols(); }
};

struct ReadoutWeights {
    Matrix w_out;  // R x (M+1)

    ReadoutWeights() = default;
    explicit ReadoutWeights(Matrix w) : w_out(std::move(w)) {}
    static ReadoutWeights zeros(Index outputs, Index features) {
        return ReadoutWeights(Matrix::Zero(outputs, features));
    }
    Index outputs() const { return w_out.rows(); }
    Index features() const { return w_out.cols(); }
};

struct Trajectory {
    Vector times;
    Matrix y;      // K x R
    Matrix y_dot;  // K x R
};

// The trial function is evaluated at t - times(0) so the initial condition
// holds at the first grid point whatever the start time.
TrialBasis build_basis(const StateTrajectory& traj,
                       const TrialFunction& trial = TrialFunction::exponential());

Trajectory evaluate(const TrialBasis& basis, const ReadoutWeights& w, const Vector& psi0);

}  // namespace esnode
