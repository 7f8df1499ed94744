#pragma once

#include "esnode/bernoulli_solver.hpp"
#include "esnode/linear_solver.hpp"
#include "esnode/system_solver.hpp"

namespace esnode {

// y' = F(t, y)
using VectorRhs = std::function<Vector(double, const Vector&)>;
using ScalarRhs = std::function<double(double, double)>;

struct IntegratedTrajectory {
    Vector times;  // K, same grid rule as the reservoir
    Matrix y;      // K x R
};

IntegratedTrajectory euler_integrate(const VectorRhs& f, const Vector& y0, double dt, double t_start,
                                     double t_end);
IntegratedTrajectory euler_integrate(const ScalarRhs& f, double y0, double dt, double t_start,
                                     double t_end);

// Samples on the dt grid, taking `substeps` RK4 steps of dt/substeps between samples.
IntegratedTrajectory rk4_integrate(const VectorRhs& f, const Vector& y0, double dt, double t_start,
                                   double t_end, int substeps = 1);
IntegratedTrajectory rk4_integrate(const ScalarRhs& f, double y0, double dt, double t_start,
                                   double t_end, int substeps = 1);

// Explicit forms y' = (f - a0 y [- q y^2]) / a1.
ScalarRhs explicit_rhs(const LinearODE& ode);
ScalarRhs explicit_rhs(const BernoulliODE& ode);
VectorRhs explicit_rhs(const OdeSystem& sys);

}  // namespace esnode
