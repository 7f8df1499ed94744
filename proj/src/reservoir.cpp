#include "esnode/reservoir.hpp"
#include "esnode/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

namespace esnode {

namespace {

std::atomic<std::uint64_t> g_propagate_calls{0};

constexpr Index kDenseRadiusLimit = 64;
constexpr double kSparseFraction = 0.3;

// Matrix-vector product through whichever storage the caller has.
struct MatVec {
    const Matrix* dense = nullptr;
    const Eigen::SparseMatrix<double, Eigen::RowMajor>* sparse = nullptr;
    void apply(const Vector& x, Eigen::Ref<Vector> y) const {
        if (sparse) y.noalias() = (*sparse) * x;
        else y.noalias() = (*dense) * x;
    }
};

double dense_radius(const Matrix& w) {
    Eigen::EigenSolver<Matrix> es(w, false);
    if (es.info() != Eigen::Success) raise(ErrorKind::IllConditioned, "dense eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Explicitly restarted Arnoldi targeting the largest-modulus eigenvalue. The
// restart vector mixes the top k Ritz vectors (real and imaginary parts) so a
// dominant complex-conjugate pair is kept together.
RadiusEstimate arnoldi_radius(const MatVec& op, Index n, double tol) {
    const Index m = std::min<Index>(60, n);
    const Index k = 6;
    const int max_restart = 100;

    Rng rng(0x5eed);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();

    RadiusEstimate out;
    Matrix V(n, m + 1);
    Matrix H(m + 1, m);
    Vector w(n);
    for (int rs = 0; rs < max_restart; ++rs) {
        out.restarts = rs;
        V.setZero();
        H.setZero();
        V.col(0) = v / v.norm();
        Index kk = m;
        for (Index j = 0; j < m; ++j) {
            op.apply(V.col(j), w);
            for (int pass = 0; pass < 2; ++pass) {
                const Vector h = V.leftCols(j + 1).transpose() * w;
                w.noalias() -= V.leftCols(j + 1) * h;
                H.col(j).head(j + 1) += h;
            }
            H(j + 1, j) = w.norm();
            const double scale = H.topLeftCorner(j + 2, j + 1).cwiseAbs().maxCoeff();
            if (H(j + 1, j) < 1e-13 * scale) {
                kk = j + 1;
                break;
            }
            V.col(j + 1) = w / H(j + 1, j);
        }

        Eigen::EigenSolver<Matrix> es(H.topLeftCorner(kk, kk), true);
        if (es.info() != Eigen::Success) break;
        const Eigen::VectorXcd ev = es.eigenvalues();
        Eigen::MatrixXcd Y = es.eigenvectors();
        for (Index c = 0; c < Y.cols(); ++c) {
            const double nrm = Y.col(c).norm();
            if (nrm > 0) Y.col(c) /= nrm;
        }
        std::vector<Index> order(static_cast<std::size_t>(kk));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return std::abs(ev(a)) > std::abs(ev(b)); });
        const Index top = order[0];
        out.radius = std::abs(ev(top));
        const double resid = (kk == m) ? std::abs(H(kk, kk - 1) * Y(kk - 1, top)) : 0.0;
        if (out.radius == 0.0 || resid <= tol * out.radius) {
            out.converged = true;
            return out;
        }
        v.setZero();
        const Index nk = std::min<Index>(k, kk);
        for (Index c = 0; c < nk; ++c) {
            const Eigen::VectorXcd x = V.leftCols(kk) * Y.col(order[static_cast<std::size_t>(c)]);
            v += x.real() + x.imag();
        }
        if (!(v.norm() > 0.0) || !v.allFinite()) break;
    }
    out.converged = false;
    return out;
}

void put_hex(std::ostream& os, double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", x);
    os << buf;
}

double get_hex(std::istream& is) {
    std::string tok;
    if (!(is >> tok)) raise(ErrorKind::Io, "truncated reservoir stream");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') raise(ErrorKind::Io, "bad number '" + tok + "'");
    return v;
}

void expect_key(std::istream& is, const char* key) {
    std::string tok;
    if (!(is >> tok) || tok != key)
        raise(ErrorKind::Io, std::string("expected '") + key + "' in reservoir stream, got '" + tok + "'");
}

}  // namespace

const char* activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "sin"; }

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "sin") return Activation::Sin;
    raise(ErrorKind::Config, "unknown activation '" + name + "'");
}

void HyperParams::validate() const {
    require(n_nodes >= 1, ErrorKind::InvalidArgument, "n_nodes must be >= 1");
    require(connectivity > 0.0 && connectivity <= 1.0, ErrorKind::InvalidArgument,
            "connectivity must lie in (0, 1]");
    require(spectral_radius > 0.0 && std::isfinite(spectral_radius), ErrorKind::InvalidArgument,
            "spectral_radius must be positive");
    require(leaking_rate > 0.0 && leaking_rate <= 1.0, ErrorKind::InvalidArgument,
            "leaking_rate must lie in (0, 1]");
    require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
    require(regularization >= 0.0, ErrorKind::InvalidArgument, "regularization must be >= 0");
    require(std::isfinite(bias), ErrorKind::InvalidArgument, "bias must be finite");
    require(n_transient >= 0, ErrorKind::InvalidArgument, "n_transient must be >= 0");
}

bool has_cycle(const Matrix& w) {
    // Kahn's algorithm on edges i -> j for w(i, j) != 0.
    const Index n = w.rows();
    std::vector<Index> indeg(static_cast<std::size_t>(n), 0);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            if (w(i, j) != 0.0) ++indeg[static_cast<std::size_t>(j)];
    std::vector<Index> stack;
    for (Index i = 0; i < n; ++i)
        if (indeg[static_cast<std::size_t>(i)] == 0) stack.push_back(i);
    Index removed = 0;
    while (!stack.empty()) {
        const Index i = stack.back();
        stack.pop_back();
        ++removed;
        for (Index j = 0; j < n; ++j)
            if (w(i, j) != 0.0 && --indeg[static_cast<std::size_t>(j)] == 0) stack.push_back(j);
    }
    return removed < n;
}

RadiusEstimate spectral_radius(const Matrix& w, double tol) {
    require(w.rows() == w.cols(), ErrorKind::DimensionMismatch, "spectral_radius needs a square matrix");
    RadiusEstimate est;
    if (w.rows() <= kDenseRadiusLimit) {
        est.radius = dense_radius(w);
        est.converged = true;
        est.used_dense = true;
        return est;
    }
    const Index nnz = (w.array() != 0.0).count();
    Eigen::SparseMatrix<double, Eigen::RowMajor> sp;
    MatVec op;
    if (static_cast<double>(nnz) < kSparseFraction * static_cast<double>(w.size())) {
        sp = w.sparseView();
        op.sparse = &sp;
    } else {
        op.dense = &w;
    }
    est = arnoldi_radius(op, w.rows(), tol);
    if (!est.converged) {
        est.radius = dense_radius(w);
        est.converged = true;
        est.used_dense = true;
    }
    return est;
}

Reservoir Reservoir::build(const HyperParams& hyper) {
    hyper.validate();
    const Index m = hyper.n_nodes;
    Rng rng(hyper.random_seed);

    Matrix w = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
            if (rng.uniform() < hyper.connectivity) w(i, j) = rng.uniform(-1.0, 1.0);

    Vector w_in(m);
    for (Index i = 0; i < m; ++i) w_in(i) = rng.uniform(-1.0, 1.0);
    Vector bias_vec(m);
    for (Index i = 0; i < m; ++i) bias_vec(i) = hyper.bias * rng.uniform(-1.0, 1.0);

    return from_weights(hyper, std::move(w), std::move(w_in), std::move(bias_vec), true);
}

Reservoir Reservoir::from_weights(const HyperParams& hyper, Matrix w_res, Vector w_in,
                                  Vector bias_vec, bool rescale) {
    hyper.validate();
    const Index m = hyper.n_nodes;
    require(w_res.rows() == m && w_res.cols() == m && w_in.size() == m && bias_vec.size() == m,
            ErrorKind::DimensionMismatch, "reservoir weight shapes do not match n_nodes");
    Reservoir r;
    r.hyper_ = hyper;
    r.w_res_ = std::move(w_res);
    r.w_in_ = std::move(w_in);
    r.bias_vec_ = std::move(bias_vec);
    r.nnz_ = (r.w_res_.array() != 0.0).count();
    if (rescale) {
        if (r.nnz_ == 0)
            raise(ErrorKind::AllZeroRecurrent,
                  "sampled recurrent matrix has no nonzero entry (seed " +
                      std::to_string(hyper.random_seed) + ")");
        if (!has_cycle(r.w_res_))
            raise(ErrorKind::NilpotentRecurrent,
                  "sampled recurrent matrix is nilpotent, spectral radius 0 (seed " +
                      std::to_string(hyper.random_seed) + ")");
        const RadiusEstimate est = spectral_radius(r.w_res_);
        if (!(est.radius > 0.0) || !std::isfinite(est.radius))
            raise(ErrorKind::NilpotentRecurrent, "recurrent matrix has zero spectral radius");
        r.w_res_ *= hyper.spectral_radius / est.radius;
    }
    r.finalize();
    return r;
}

void Reservoir::finalize() {
    use_sparse_ = static_cast<double>(nnz_) < kSparseFraction * static_cast<double>(w_res_.size());
    if (use_sparse_) {
        w_sparse_ = w_res_.sparseView();
        w_sparse_.makeCompressed();
    } else {
        w_sparse_.resize(0, 0);
    }
}

Index grid_size(double t_start, double t_end, double dt) {
    return static_cast<Index>(std::floor((t_end - t_start) / dt + 0.5)) + 1;
}

StateTrajectory Reservoir::propagate(double t_start, double t_end) const {
    const double dt = hyper_.dt;
    require(t_end > t_start, ErrorKind::InvalidArgument, "propagate needs t_end > t_start");
    require((t_end - t_start) / dt >= 2.0, ErrorKind::InvalidArgument,
            "time range must hold at least two steps of dt");
    g_propagate_calls.fetch_add(1, std::memory_order_relaxed);

    const Index m = hyper_.n_nodes;
    const Index k = grid_size(t_start, t_end, dt);
    const double alpha = hyper_.leaking_rate;
    const double rate = alpha / dt;

    MatVec op;
    if (use_sparse_) op.sparse = &w_sparse_;
    else op.dense = &w_res_;

    StateTrajectory tr;
    tr.dt = dt;
    tr.times.resize(k);
    tr.states.resize(k, m + 1);
    tr.state_derivs.resize(k, m + 1);
    tr.states.col(0).setOnes();
    tr.state_derivs.col(0).setZero();

    Vector h = Vector::Zero(m);
    Vector pre(m);
    Vector d(m);
    auto activate = [&](double t) {
        op.apply(h, pre);
        pre += w_in_ * t + bias_vec_;
        if (hyper_.activation == Activation::Tanh) d = pre.array().tanh().matrix() - h;
        else d = pre.array().sin().matrix() - h;
    };

    for (Index n = hyper_.n_transient; n > 0; --n) {
        activate(t_start - static_cast<double>(n) * dt);
        h += alpha * d;
    }
    for (Index n = 0; n < k; ++n) {
        const double t = t_start + static_cast<double>(n) * dt;
        tr.times(n) = t;
        activate(t);
        if (!d.allFinite())
            raise(ErrorKind::NonFiniteState, "reservoir state became non-finite at t = " + std::to_string(t));
        tr.states.row(n).tail(m) = h.transpose();
        tr.state_derivs.row(n).tail(m) = rate * d.transpose();
        h += alpha * d;
    }
    return tr;
}

void Reservoir::save(std::ostream& os) const {
    os << "esnode-reservoir 1\n";
    os << "n_nodes " << hyper_.n_nodes << "\n";
    os << "connectivity "; put_hex(os, hyper_.connectivity); os << "\n";
    os << "spectral_radius "; put_hex(os, hyper_.spectral_radius); os << "\n";
    os << "leaking_rate "; put_hex(os, hyper_.leaking_rate); os << "\n";
    os << "bias "; put_hex(os, hyper_.bias); os << "\n";
    os << "dt "; put_hex(os, hyper_.dt); os << "\n";
    os << "regularization "; put_hex(os, hyper_.regularization); os << "\n";
    os << "activation " << activation_name(hyper_.activation) << "\n";
    os << "random_seed " << hyper_.random_seed << "\n";
    os << "n_transient " << hyper_.n_transient << "\n";
    os << "w_in";
    for (Index i = 0; i < w_in_.size(); ++i) { os << ' '; put_hex(os, w_in_(i)); }
    os << "\nbias_vec";
    for (Index i = 0; i < bias_vec_.size(); ++i) { os << ' '; put_hex(os, bias_vec_(i)); }
    os << "\nw_res_nnz " << nnz_ << "\n";
    for (Index i = 0; i < w_res_.rows(); ++i)
        for (Index j = 0; j < w_res_.cols(); ++j)
            if (w_res_(i, j) != 0.0) {
                os << i << ' ' << j << ' ';
                put_hex(os, w_res_(i, j));
                os << '\n';
            }
    os << "end\n";
}

Reservoir Reservoir::load(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "esnode-reservoir" || version != 1)
        raise(ErrorKind::Io, "not an esnode reservoir stream (or unsupported version)");
    HyperParams hp;
    std::string tok;
    expect_key(is, "n_nodes");
    is >> hp.n_nodes;
    expect_key(is, "connectivity");
    hp.connectivity = get_hex(is);
    expect_key(is, "spectral_radius");
    hp.spectral_radius = get_hex(is);
    expect_key(is, "leaking_rate");
    hp.leaking_rate = get_hex(is);
    expect_key(is, "bias");
    hp.bias = get_hex(is);
    expect_key(is, "dt");
    hp.dt = get_hex(is);
    expect_key(is, "regularization");
    hp.regularization = get_hex(is);
    expect_key(is, "activation");
    is >> tok;
    hp.activation = parse_activation(tok);
    expect_key(is, "random_seed");
    is >> hp.random_seed;
    expect_key(is, "n_transient");
    is >> hp.n_transient;
    if (!is) raise(ErrorKind::Io, "malformed reservoir header");

    const Index m = hp.n_nodes;
    Vector w_in(m), bias_vec(m);
    expect_key(is, "w_in");
    for (Index i = 0; i < m; ++i) w_in(i) = get_hex(is);
    expect_key(is, "bias_vec");
    for (Index i = 0; i < m; ++i) bias_vec(i) = get_hex(is);
    expect_key(is, "w_res_nnz");
    Index nnz = 0;
    is >> nnz;
    Matrix w = Matrix::Zero(m, m);
    for (Index e = 0; e < nnz; ++e) {
        Index i = -1, j = -1;
        is >> i >> j;
        if (!is || i < 0 || j < 0 || i >= m || j >= m) raise(ErrorKind::Io, "bad recurrent entry");
        w(i, j) = get_hex(is);
    }
    expect_key(is, "end");
    return from_weights(hp, std::move(w), std::move(w_in), std::move(bias_vec), false);
}

void Reservoir::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) raise(ErrorKind::Io, "cannot write " + path);
    save(os);
}

Reservoir Reservoir::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) raise(ErrorKind::Io, "cannot read " + path);
    return load(is);
}

Reservoir build_reservoir_resampling(const HyperParams& hyper, int max_attempts) {
    HyperParams hp = hyper;
    for (int attempt = 0;; ++attempt) {
        try {
            return Reservoir::build(hp);
        } catch (const Error& e) {
            const bool degenerate = e.kind() == ErrorKind::AllZeroRecurrent ||
                                    e.kind() == ErrorKind::NilpotentRecurrent;
            if (!degenerate || attempt + 1 >= max_attempts) throw;
            ++hp.random_seed;
        }
    }
}

double check_derivative_identity(const StateTrajectory& traj) {
    const Index k = traj.size();
    double worst = 0.0;
    for (Index n = 0; n + 1 < k; ++n) {
        const auto diff = (traj.states.row(n + 1).tail(traj.states.cols() - 1) -
                           traj.states.row(n).tail(traj.states.cols() - 1)) / traj.dt -
                          traj.state_derivs.row(n).tail(traj.states.cols() - 1);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    return worst;
}

std::uint64_t propagate_count() { return g_propagate_calls.load(std::memory_order_relaxed); }

}  // namespace esnode
