#include "esnode/bernoulli_solver.hpp"
#include "esnode/integrators.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace esnode;

namespace {

TimeFunction constant(double c) {
    return [c](double) { return c; };
}

Reservoir small_reservoir(double lambda, std::uint64_t seed = 2) {
    HyperParams hp;
    hp.n_nodes = 60;
    hp.connectivity = 0.2;
    hp.spectral_radius = 0.9;
    hp.leaking_rate = 0.3;
    hp.bias = 0.4;
    hp.dt = 0.02;
    hp.regularization = lambda;
    hp.random_seed = seed;
    return Reservoir::build(hp);
}

HyperParams published_bernoulli() {
    HyperParams hp;
    hp.dt = 0.007943282347242814;
    hp.n_nodes = 500;
    hp.connectivity = 0.0003179179463749722;
    hp.spectral_radius = 7.975825786590576;
    hp.regularization = 0.3332787303378571;
    hp.leaking_rate = 0.07119506597518921;
    hp.bias = -0.9424528479576111;
    hp.random_seed = 209;
    return hp;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("q = 0 reduces the linearization to the linear closed form") {
    const TrialBasis basis = build_basis(small_reservoir(0.01).propagate(0.0, 3.0));
    const BernoulliODE ode{constant(1.0), [](double t) { return 1.0 + 0.1 * t; }, constant(0.0),
                           [](double t) { return std::sin(t); }, {}, 0.0, 3.0};
    for (double psi0 : {-2.0, 0.5, 3.0}) {
        const ReadoutWeights lin = linearized_weights(ode, basis, psi0, 0.01);
        const ReadoutWeights ref = closed_form_weights(characteristic_matrices(ode.linear_part(), basis, psi0), 0.01);
        CHECK((lin.w_out - ref.w_out).norm() <= 1e-12 * ref.w_out.norm());
    }
}

TEST_CASE("psi0 = 0 leaves the characteristic matrices unchanged") {
    const TrialBasis basis = build_basis(small_reservoir(0.0).propagate(0.0, 2.0));
    const BernoulliODE ode{constant(1.0), constant(1.0), constant(0.5), constant(0.3), {}, 0.0, 2.0};
    const CharMatrices a = linearized_matrices(ode, basis, 0.0);
    const CharMatrices b = characteristic_matrices(ode.linear_part(), basis, 0.0);
    CHECK(a.d_h == b.d_h);
    CHECK(a.d_0 == b.d_0);
}

TEST_CASE("linearized matrices carry the psi0 corrections row-wise") {
    const TrialBasis basis = build_basis(small_reservoir(0.0).propagate(0.0, 2.0));
    const BernoulliODE ode{constant(1.0), constant(1.0), [](double t) { return 0.5 + t; }, constant(0.3), {}, 0.0, 2.0};
    const double psi0 = 1.7;
    const CharMatrices cm = linearized_matrices(ode, basis, psi0);
    for (Index n = 0; n < basis.size(); n += 17) {
        const double q = 0.5 + basis.times(n);
        const Eigen::RowVectorXd expect = basis.s_dot.row(n) + basis.s_mat.row(n) + 2.0 * q * psi0 * basis.s_mat.row(n);
        CHECK((cm.d_h.row(n) - expect).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK(cm.d_0(n) == doctest::Approx(psi0 - 0.3 + q * psi0 * psi0).epsilon(1e-14));
    }
}

TEST_CASE("linearized start beats a random start before any training") {
    const Reservoir res = build_reservoir_resampling(published_bernoulli());
    const double t_end = 2.0 * std::numbers::pi;
    const TrialBasis basis = build_basis(res.propagate(0.0, t_end));
    const BernoulliODE ode{constant(1.0), constant(1.0), constant(0.5), constant(0.0), {1.0}, 0.0, t_end};
    const BernoulliProblem problem(ode, basis.times, 1.0);
    const double lin = loss_value(problem, basis, linearized_weights(ode, basis, 1.0, res.hyper().regularization));
    std::vector<double> random;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
        random.push_back(loss_value(problem, basis, random_weights(1, basis.features(), seed)));
    CHECK(lin < median(random));
}

TEST_CASE("linear case: gradient descent cannot improve on the linearized start") {
    const double lambda = 0.05;
    const Reservoir res = small_reservoir(lambda, 4);
    const BernoulliODE ode{constant(1.0), constant(1.0), constant(0.0), [](double t) { return std::sin(t); },
                           {1.5}, 0.0, 3.0};
    GDConfig cfg;
    cfg.epochs = 200;
    cfg.learning_rate = 1e-3;
    cfg.enet_alpha = 0.0;
    cfg.enet_strength = lambda;
    const BernoulliResult r = solve_bernoulli(ode, res, cfg, BernoulliInit::LinearizedThenGD);
    CHECK(r.initial_loss[0] - r.traces[0].best_loss <= 1e-8);
}

TEST_CASE("zero initial condition with no forcing stays at zero") {
    const Reservoir res = small_reservoir(1e-4, 5);
    const BernoulliODE ode{constant(1.0), constant(1.0), constant(0.5), constant(0.0), {0.0}, 0.0, 3.0};
    GDConfig cfg;
    cfg.epochs = 50;
    const BernoulliResult r = solve_bernoulli(ode, res, cfg, BernoulliInit::LinearizedThenGD);
    const Matrix& resid = r.result.solutions[0].residual;
    CHECK(std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size())) <= 1e-6);
}

TEST_CASE("init modes: linearized only runs no descent") {
    const Reservoir res = small_reservoir(1e-3, 6);
    const BernoulliODE ode{constant(1.0), constant(1.0), constant(0.5), constant(0.0), {1.0, -1.0}, 0.0, 2.0};
    GDConfig cfg;
    cfg.epochs = 30;
    const BernoulliResult lin = solve_bernoulli(ode, res, cfg, BernoulliInit::Linearized);
    CHECK(lin.traces[0].loss_per_epoch.empty());
    const BernoulliResult rnd = solve_bernoulli(ode, res, cfg, BernoulliInit::Random);
    CHECK(rnd.traces[1].loss_per_epoch.size() == 30);
    CHECK(parse_bernoulli_init("linearized_then_gd") == BernoulliInit::LinearizedThenGD);
    CHECK_THROWS_AS(parse_bernoulli_init("warm"), Error);
}

TEST_CASE("published Bernoulli block trains to a small residual") {
    const double t_end = 2.0 * std::numbers::pi;
    const Reservoir res = build_reservoir_resampling(published_bernoulli());
    const BernoulliODE ode{constant(1.0), constant(1.0), constant(0.5), constant(0.0), {-2.0, -1.0, 1.0, 2.0},
                           0.0, t_end};
    GDConfig cfg;
    cfg.epochs = 3000;
    cfg.learning_rate = 0.01;
    cfg.spike_threshold = 0.25;
    cfg.preconditioner = Preconditioner::Gram;
    const BernoulliResult r = solve_bernoulli(ode, res, cfg, BernoulliInit::LinearizedThenGD);
    for (std::size_t i = 0; i < r.result.solutions.size(); ++i) {
        const ICSolution& s = r.result.solutions[i];
        const double rms = std::sqrt(s.residual.squaredNorm() / static_cast<double>(s.residual.size()));
        CHECK(rms <= 1e-2);
        const IntegratedTrajectory ref =
            rk4_integrate(explicit_rhs(ode), ode.psi0_list[i], res.hyper().dt, 0.0, t_end, 10);
        CHECK((s.y.col(0) - ref.y.col(0)).cwiseAbs().maxCoeff() <= 5e-2);
    }
}
