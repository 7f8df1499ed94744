#include "esnode/integrators.hpp"
#include "esnode/registry.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace esnode;

TEST_CASE("explicit Euler: one step of y' = -y") {
    const IntegratedTrajectory tr = euler_integrate([](double, double y) { return -y; }, 1.0, 0.1, 0.0, 0.1);
    REQUIRE(tr.times.size() == 2);
    CHECK(tr.y(1, 0) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("constant right-hand side is integrated exactly") {
    const IntegratedTrajectory e = euler_integrate([](double, double) { return 2.0; }, 1.0, 0.25, 0.0, 2.0);
    const IntegratedTrajectory r = rk4_integrate([](double, double) { return 2.0; }, 1.0, 0.25, 0.0, 2.0);
    for (Index n = 0; n < e.times.size(); ++n) {
        CHECK(e.y(n, 0) == doctest::Approx(1.0 + 2.0 * e.times(n)).epsilon(1e-14));
        CHECK(r.y(n, 0) == doctest::Approx(1.0 + 2.0 * r.times(n)).epsilon(1e-14));
    }
}

TEST_CASE("Euler on the driven population at dt = 1e-3") {
    LinearODE ode{[](double) { return 1.0; }, [](double) { return 1.0; }, [](double t) { return std::sin(t); },
                  {}, 0.0, 4.0 * std::numbers::pi};
    const IntegratedTrajectory tr = euler_integrate(explicit_rhs(ode), 2.0, 1e-3, ode.t_start, ode.t_end);
    double worst = 0.0;
    for (Index n = 0; n < tr.times.size(); ++n)
        worst = std::max(worst, std::abs(tr.y(n, 0) - driven_population_exact(tr.times(n), 2.0)));
    CHECK(worst <= 5e-3);
}

TEST_CASE("RK4 reaches exp(-1) in ten steps") {
    const IntegratedTrajectory tr = rk4_integrate([](double, double y) { return -y; }, 1.0, 0.1, 0.0, 1.0);
    CHECK(tr.times.size() == 11);
    CHECK(std::abs(tr.y(10, 0) - std::exp(-1.0)) <= 1e-6);
}

TEST_CASE("RK4 substeps on the harmonic oscillator over one period") {
    const VectorRhs f = [](double, const Vector& y) {
        Vector d(2);
        d << y(1), -y(0);
        return d;
    };
    Vector y0(2);
    y0 << 1.0, 0.0;
    const double period = 2.0 * std::numbers::pi;
    const IntegratedTrajectory tr = rk4_integrate(f, y0, period / 200.0, 0.0, period, 10);
    const Index last = tr.times.size() - 1;
    CHECK(tr.times(last) == doctest::Approx(period));
    CHECK(std::abs(tr.y(last, 0) - 1.0) <= 1e-8);
    CHECK(std::abs(tr.y(last, 1)) <= 1e-8);

    const VectorRhs g = explicit_rhs(*harmonic_oscillator());
    const IntegratedTrajectory tg = rk4_integrate(g, y0, period / 200.0, 0.0, period, 10);
    CHECK((tg.y - tr.y).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("Bernoulli explicit form against the logistic closed form") {
    const BernoulliODE ode{[](double) { return 1.0; }, [](double) { return 1.0; }, [](double) { return 0.5; },
                           [](double) { return 0.0; }, {}, 0.0, 2.0};
    const IntegratedTrajectory tr = rk4_integrate(explicit_rhs(ode), 1.0, 0.01, 0.0, 2.0);
    // y' + y + q y^2 = 0 gives y = y0 e^{-t} / (1 + q y0 (1 - e^{-t})).
    for (Index n = 0; n < tr.times.size(); n += 20) {
        const double e = std::exp(-tr.times(n));
        CHECK(tr.y(n, 0) == doctest::Approx(e / (1.0 + 0.5 * (1.0 - e))).epsilon(1e-8));
    }
}

TEST_CASE("blow-up is reported as a non-finite integration") {
    try {
        euler_integrate([](double, double y) { return y * y; }, 1.0, 0.5, 0.0, 50.0);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFinite);
    }
}
