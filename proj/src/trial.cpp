#include "esnode/trial.hpp"

#include <cmath>

namespace esnode {

TrialFunction TrialFunction::exponential() {
    return TrialFunction{[](double t) { return -std::expm1(-t); },
                         [](double t) { return std::exp(-t); }};
}

std::pair<double, double> g_of_t(double t) { return {-std::expm1(-t), std::exp(-t)}; }

TrialBasis build_basis(const StateTrajectory& traj, const TrialFunction& trial) {
    require(traj.size() >= 1, ErrorKind::InvalidArgument, "empty trajectory");
    require(traj.states.rows() == traj.size() && traj.state_derivs.rows() == traj.size() &&
                traj.states.cols() == traj.state_derivs.cols(),
            ErrorKind::DimensionMismatch, "trajectory arrays disagree in shape");
    const Index k = traj.size();
    const double t0 = traj.times(0);
    TrialBasis b;
    b.times = traj.times;
    b.g_vals.resize(k);
    b.g_dot_vals.resize(k);
    for (Index n = 0; n < k; ++n) {
        const double s = traj.times(n) - t0;
        b.g_vals(n) = trial.g(s);
        b.g_dot_vals(n) = trial.g_dot(s);
    }
    b.s_mat = b.g_vals.asDiagonal() * traj.states;
    b.s_dot = b.g_dot_vals.asDiagonal() * traj.states;
    b.s_dot.noalias() += b.g_vals.asDiagonal() * traj.state_derivs;
    return b;
}

Trajectory evaluate(const TrialBasis& basis, const ReadoutWeights& w, const Vector& psi0) {
    require(w.features() == basis.features(), ErrorKind::DimensionMismatch,
            "readout width does not match basis");
    require(psi0.size() == w.outputs(), ErrorKind::DimensionMismatch,
            "initial condition size does not match readout rows");
    Trajectory out;
    out.times = basis.times;
    out.y.noalias() = basis.s_mat * w.w_out.transpose();
    out.y.rowwise() += psi0.transpose();
    out.y_dot.noalias() = basis.s_dot * w.w_out.transpose();
    return out;
}

}  // namespace esnode
