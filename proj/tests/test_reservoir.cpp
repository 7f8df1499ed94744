#include "esnode/reservoir.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace esnode;

namespace {

HyperParams small_hyper(Index m, double connectivity, std::uint64_t seed) {
    HyperParams hp;
    hp.n_nodes = m;
    hp.connectivity = connectivity;
    hp.spectral_radius = 0.9;
    hp.leaking_rate = 0.3;
    hp.bias = 0.2;
    hp.dt = 0.01;
    hp.random_seed = seed;
    return hp;
}

}  // namespace

TEST_CASE("hyperparameter validation rejects out-of-range values") {
    HyperParams hp;
    hp.validate();
    auto bad = [](auto mutate) {
        HyperParams h;
        mutate(h);
        CHECK_THROWS_AS(h.validate(), Error);
    };
    bad([](HyperParams& h) { h.connectivity = 0.0; });
    bad([](HyperParams& h) { h.connectivity = 1.5; });
    bad([](HyperParams& h) { h.leaking_rate = 0.0; });
    bad([](HyperParams& h) { h.leaking_rate = 1.1; });
    bad([](HyperParams& h) { h.dt = 0.0; });
    bad([](HyperParams& h) { h.spectral_radius = -1.0; });
    bad([](HyperParams& h) { h.n_nodes = 0; });
    bad([](HyperParams& h) { h.regularization = -1e-3; });
}

TEST_CASE("published driven-population block gives the requested spectral radius") {
    HyperParams hp;
    hp.n_nodes = 500;
    hp.connectivity = 0.7875262340500385;
    hp.spectral_radius = 9.97140121459961;
    hp.leaking_rate = 0.007868987508118153;
    hp.bias = -0.2435922622680664;
    hp.dt = 0.0031622776601683794;
    hp.random_seed = 209;
    const Reservoir res = Reservoir::build(hp);
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(res.w_res(), false).eigenvalues();
    CHECK(ev.cwiseAbs().maxCoeff() == doctest::Approx(9.97140121459961).epsilon(1e-6));
}

TEST_CASE("dense connectivity fills every entry") {
    HyperParams hp = small_hyper(4, 1.0, 3);
    const Reservoir res = Reservoir::build(hp);
    CHECK(res.nonzeros() == 16);
    CHECK((res.w_res().array() != 0.0).all());
}

TEST_CASE("sparse connectivity count lies within three sigma of the binomial mean") {
    HyperParams hp = small_hyper(500, 0.0003179179463749722, 209);
    const Reservoir res = build_reservoir_resampling(hp);
    const double n = 250000.0, p = 0.0003179179463749722;
    const double mean = n * p, sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(std::abs(static_cast<double>(res.nonzeros()) - mean) <= 3.0 * sigma);
}

TEST_CASE("arnoldi estimate agrees with the dense eigenvalue solver") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        HyperParams hp = small_hyper(200, 0.05, seed);
        hp.spectral_radius = 1.7;
        const Reservoir res = Reservoir::build(hp);
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(res.w_res(), false).eigenvalues();
        CHECK(ev.cwiseAbs().maxCoeff() == doctest::Approx(1.7).epsilon(1e-6));
        const RadiusEstimate est = spectral_radius(res.w_res());
        CHECK(est.radius == doctest::Approx(1.7).epsilon(1e-8));
    }
}

TEST_CASE("degenerate recurrent draws raise and resampling moves to the next seed") {
    HyperParams hp = small_hyper(3, 1e-6, 11);
    CHECK_THROWS_AS(Reservoir::build(hp), Error);
    try {
        Reservoir::build(hp);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AllZeroRecurrent);
    }
    Matrix upper = Matrix::Zero(3, 3);
    upper(0, 1) = 0.5;
    upper(1, 2) = -0.3;
    CHECK_FALSE(has_cycle(upper));
    try {
        Reservoir::from_weights(small_hyper(3, 0.5, 0), upper, Vector::Ones(3), Vector::Zero(3), true);
        FAIL("nilpotent matrix accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NilpotentRecurrent);
    }
    upper(2, 0) = 0.1;
    CHECK(has_cycle(upper));

    HyperParams sparse = small_hyper(500, 0.0003179179463749722, 209);
    const Reservoir res = build_reservoir_resampling(sparse);
    CHECK(res.hyper().random_seed >= 209);
    CHECK(res.nonzeros() > 0);
}

TEST_CASE("M = 2 reservoir matches a hand iteration of the leaky update") {
    HyperParams hp;
    hp.n_nodes = 2;
    hp.connectivity = 1.0;
    hp.leaking_rate = 0.5;
    hp.dt = 0.1;
    hp.bias = 0.0;
    Matrix w(2, 2);
    w << 0.5, 0.0, 0.0, 0.5;
    const Reservoir res = Reservoir::from_weights(hp, w, Vector::Ones(2), Vector::Zero(2), false);
    const StateTrajectory tr = res.propagate(0.0, 0.3);
    REQUIRE(tr.size() == 4);

    // Both nodes see the same input, so one scalar sequence describes them.
    double h = 0.0;
    for (int n = 0; n < 4; ++n) {
        const double t = 0.1 * n;
        const double target = std::tanh(0.5 * h + t);
        CHECK(std::abs(tr.states(n, 1) - h) <= 1e-12);
        CHECK(std::abs(tr.states(n, 2) - h) <= 1e-12);
        CHECK(std::abs(tr.state_derivs(n, 1) - 0.5 / 0.1 * (target - h)) <= 1e-12);
        h = 0.5 * h + 0.5 * target;
    }
}

TEST_CASE("leaking rate one removes the leak term") {
    HyperParams hp = small_hyper(5, 1.0, 4);
    hp.leaking_rate = 1.0;
    const Reservoir res = Reservoir::build(hp);
    const StateTrajectory tr = res.propagate(0.25, 1.0);
    const Vector h1 = (res.w_in() * 0.25 + res.bias_vec()).array().tanh();
    CHECK((tr.states.row(1).tail(5).transpose() - h1).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("tiny leaking rate freezes the reservoir") {
    HyperParams hp = small_hyper(20, 0.5, 5);
    hp.leaking_rate = 1e-12;
    const StateTrajectory tr = Reservoir::build(hp).propagate(0.0, 1.0);
    const Index k = tr.size();
    CHECK((tr.states.row(k - 1) - tr.states.row(0)).norm() <= 1e-9);
    CHECK(tr.state_derivs.cwiseAbs().maxCoeff() <= 1e-9 / hp.dt);
}

TEST_CASE("trajectory layout: bias column, bounded states, grid") {
    for (Activation act : {Activation::Tanh, Activation::Sin}) {
        HyperParams hp = small_hyper(30, 0.2, 6);
        hp.activation = act;
        const StateTrajectory tr = Reservoir::build(hp).propagate(0.0, 2.0);
        CHECK(tr.size() == grid_size(0.0, 2.0, hp.dt));
        CHECK(tr.size() == 201);
        CHECK((tr.states.col(0).array() == 1.0).all());
        CHECK((tr.state_derivs.col(0).array() == 0.0).all());
        CHECK(tr.states.rightCols(30).cwiseAbs().maxCoeff() <= 1.0);
        CHECK(tr.times(200) == doctest::Approx(2.0));
    }
}

TEST_CASE("derivative identity holds on propagated trajectories") {
    HyperParams hp = small_hyper(500, 0.05, 12);
    hp.dt = 0.001;
    const Reservoir res = Reservoir::build(hp);
    const StateTrajectory tr = res.propagate(0.0, 1.0);
    CHECK(tr.size() == 1001);
    CHECK(check_derivative_identity(tr) <= 1e-8);
    CHECK(check_derivative_identity(tr) <= 1e-10 * hp.leaking_rate / hp.dt);

    StateTrajectory zeroed = tr;
    zeroed.state_derivs.setZero();
    double expected = 0.0;
    for (Index n = 0; n + 1 < tr.size(); ++n)
        expected = std::max(expected,
                            ((tr.states.row(n + 1) - tr.states.row(n)) / tr.dt).cwiseAbs().maxCoeff());
    CHECK(check_derivative_identity(zeroed) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("transient steps shift the initial state") {
    HyperParams hp = small_hyper(10, 0.5, 8);
    const StateTrajectory plain = Reservoir::build(hp).propagate(0.0, 1.0);
    hp.n_transient = 50;
    const StateTrajectory warm = Reservoir::build(hp).propagate(0.0, 1.0);
    CHECK(plain.states.row(0).tail(10).norm() == 0.0);
    CHECK(warm.states.row(0).tail(10).norm() > 0.0);
    CHECK(check_derivative_identity(warm) <= 1e-10);
}

TEST_CASE("divergent states raise NonFiniteState") {
    HyperParams hp = small_hyper(3, 1.0, 1);
    Matrix w = Matrix::Zero(3, 3);
    Vector w_in(3);
    w_in << NAN, 0.0, 0.0;
    const Reservoir res = Reservoir::from_weights(hp, w, w_in, Vector::Zero(3), false);
    try {
        res.propagate(0.0, 0.1);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteState);
    }
}

TEST_CASE("serialization round trip is exact") {
    HyperParams hp = small_hyper(40, 0.1, 21);
    hp.activation = Activation::Sin;
    hp.n_transient = 3;
    const Reservoir a = Reservoir::build(hp);
    std::stringstream ss;
    a.save(ss);
    const Reservoir b = Reservoir::load(ss);
    CHECK(b.w_res() == a.w_res());
    CHECK(b.w_in() == a.w_in());
    CHECK(b.bias_vec() == a.bias_vec());
    CHECK(b.hyper().activation == Activation::Sin);
    CHECK(b.hyper().n_transient == 3);
    CHECK(b.hyper().random_seed == 21);
    CHECK(b.propagate(0.0, 0.5).states == a.propagate(0.0, 0.5).states);

    std::stringstream broken("esnode-reservoir 1\nn_nodes nonsense\n");
    CHECK_THROWS_AS(Reservoir::load(broken), Error);
}

TEST_CASE("same seed gives the same reservoir, and propagate calls are counted") {
    HyperParams hp = small_hyper(25, 0.3, 99);
    const Reservoir a = Reservoir::build(hp);
    const Reservoir b = Reservoir::build(hp);
    CHECK(a.w_res() == b.w_res());
    const auto before = propagate_count();
    a.propagate(0.0, 0.1);
    CHECK(propagate_count() == before + 1);
}

TEST_CASE("grid size rounds to the nearest step count") {
    CHECK(grid_size(0.0, 1.0, 0.1) == 11);
    CHECK(grid_size(0.0, 4.0 * M_PI, 0.0031622776601683794) == 3975);
    CHECK(grid_size(0.0, 0.3, 0.1) == 4);
}
