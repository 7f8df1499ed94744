#include "esnode/integrators.hpp"

#include <cmath>
#include <string>

namespace esnode {

namespace {

void check_grid(double dt, double t_start, double t_end) {
    require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
    require(t_end > t_start, ErrorKind::InvalidArgument, "t_end must exceed t_start");
}

[[noreturn]] void blow_up(double t) {
    raise(ErrorKind::NonFinite, "integrator blew up at t = " + std::to_string(t));
}

}  // namespace

IntegratedTrajectory euler_integrate(const VectorRhs& f, const Vector& y0, double dt, double t_start,
                                     double t_end) {
    check_grid(dt, t_start, t_end);
    const Index k = grid_size(t_start, t_end, dt);
    IntegratedTrajectory out;
    out.times.resize(k);
    out.y.resize(k, y0.size());
    Vector y = y0;
    for (Index n = 0; n < k; ++n) {
        const double t = t_start + static_cast<double>(n) * dt;
        out.times(n) = t;
        out.y.row(n) = y.transpose();
        if (n + 1 < k) {
            y += dt * f(t, y);
            if (!y.allFinite()) blow_up(t + dt);
        }
    }
    return out;
}

IntegratedTrajectory euler_integrate(const ScalarRhs& f, double y0, double dt, double t_start,
                                     double t_end) {
    check_grid(dt, t_start, t_end);
    const Index k = grid_size(t_start, t_end, dt);
    IntegratedTrajectory out;
    out.times.resize(k);
    out.y.resize(k, 1);
    double y = y0;
    for (Index n = 0; n < k; ++n) {
        const double t = t_start + static_cast<double>(n) * dt;
        out.times(n) = t;
        out.y(n, 0) = y;
        if (n + 1 < k) {
            y += dt * f(t, y);
            if (!std::isfinite(y)) blow_up(t + dt);
        }
    }
    return out;
}

IntegratedTrajectory rk4_integrate(const VectorRhs& f, const Vector& y0, double dt, double t_start,
                                   double t_end, int substeps) {
    check_grid(dt, t_start, t_end);
    require(substeps >= 1, ErrorKind::InvalidArgument, "substeps must be >= 1");
    const Index k = grid_size(t_start, t_end, dt);
    const double h = dt / substeps;
    IntegratedTrajectory out;
    out.times.resize(k);
    out.y.resize(k, y0.size());
    Vector y = y0;
    for (Index n = 0; n < k; ++n) {
        const double tn = t_start + static_cast<double>(n) * dt;
        out.times(n) = tn;
        out.y.row(n) = y.transpose();
        if (n + 1 == k) break;
        for (int s = 0; s < substeps; ++s) {
            const double t = tn + s * h;
            const Vector k1 = f(t, y);
            const Vector k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
            const Vector k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
            const Vector k4 = f(t + h, y + h * k3);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!y.allFinite()) blow_up(tn + dt);
    }
    return out;
}

IntegratedTrajectory rk4_integrate(const ScalarRhs& f, double y0, double dt, double t_start,
                                   double t_end, int substeps) {
    VectorRhs vf = [&f](double t, const Vector& y) { return Vector::Constant(1, f(t, y(0))); };
    return rk4_integrate(vf, Vector::Constant(1, y0), dt, t_start, t_end, substeps);
}

ScalarRhs explicit_rhs(const LinearODE& ode) {
    return [a1 = ode.a1, a0 = ode.a0, force = ode.force](double t, double y) {
        const double c = a1(t);
        if (c == 0.0) raise(ErrorKind::SingularCoefficient, "a1(t) vanishes at t = " + std::to_string(t));
        return (force(t) - a0(t) * y) / c;
    };
}

ScalarRhs explicit_rhs(const BernoulliODE& ode) {
    return [a1 = ode.a1, a0 = ode.a0, q = ode.q, force = ode.force](double t, double y) {
        const double c = a1(t);
        if (c == 0.0) raise(ErrorKind::SingularCoefficient, "a1(t) vanishes at t = " + std::to_string(t));
        return (force(t) - a0(t) * y - q(t) * y * y) / c;
    };
}

VectorRhs explicit_rhs(const OdeSystem& sys) {
    return [&sys](double t, const Vector& y) { return sys.rhs(t, y); };
}

}  // namespace esnode
