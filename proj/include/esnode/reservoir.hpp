#pragma once

#include "esnode/common.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace esnode {

enum class Activation { Tanh, Sin };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct HyperParams {
    Index n_nodes = 100;
    double connectivity = 0.1;
    double spectral_radius = 1.0;
    double leaking_rate = 1.0;
    double bias = 0.0;
    double dt = 0.01;
    double regularization = 0.0;
    Activation activation = Activation::Tanh;
    std::uint64_t random_seed = 0;
    // Steps discarded before t_start; 0 keeps states aligned with the initial condition.
    Index n_transient = 0;

    void validate() const;
};

struct StateTrajectory {
    Vector times;          // K
    Matrix states;         // K x (M+1), column 0 = 1
    Matrix state_derivs;   // K x (M+1), column 0 = 0
    double dt = 0.0;

    Index size() const { return times.size(); }
};

// Result of the eigenvalue search used to rescale the recurrent matrix.
struct RadiusEstimate {
    double radius = 0.0;
    bool converged = false;
    bool used_dense = false;
    int restarts = 0;
};

// Largest |eigenvalue|. Dense QR for small matrices, restarted Arnoldi otherwise
// with a dense fallback if Arnoldi does not converge.
RadiusEstimate spectral_radius(const Matrix& w, double tol = 1e-10);

// True when the directed graph of nonzeros has a cycle. A matrix with random
// continuous entries is nilpotent (radius exactly 0) iff this graph is acyclic.
bool has_cycle(const Matrix& w);

class Reservoir {
public:
    // Samples weights from hyper.random_seed and rescales w_res.
    static Reservoir build(const HyperParams& hyper);

    // Uses the given weights as-is; w_res is rescaled to hyper.spectral_radius
    // only when rescale is true.
    static Reservoir from_weights(const HyperParams& hyper, Matrix w_res, Vector w_in,
                                  Vector bias_vec, bool rescale);

    const HyperParams& hyper() const { return hyper_; }
    const Matrix& w_res() const { return w_res_; }
    const Vector& w_in() const { return w_in_; }
    const Vector& bias_vec() const { return bias_vec_; }
    Index n_nodes() const { return hyper_.n_nodes; }
    Index nonzeros() const { return nnz_; }

    // Runs the leaky update over the uniform grid t_start, t_start + dt, ...
    StateTrajectory propagate(double t_start, double t_end) const;

    void save(std::ostream& os) const;
    static Reservoir load(std::istream& is);
    void save_file(const std::string& path) const;
    static Reservoir load_file(const std::string& path);

private:
    Reservoir() = default;
    void finalize();

    HyperParams hyper_;
    Matrix w_res_;
    Vector w_in_;
    Vector bias_vec_;
    Index nnz_ = 0;
    bool use_sparse_ = false;
    Eigen::SparseMatrix<double, Eigen::RowMajor> w_sparse_;
};

// Builds with hyper.random_seed, moving on to seed+1, seed+2, ... when the draw
// is all-zero or nilpotent. The seed actually used is stored in hyper().
Reservoir build_reservoir_resampling(const HyperParams& hyper, int max_attempts = 64);

// Number of grid points for a range: t_start + n*dt <= t_end + dt/2.
Index grid_size(double t_start, double t_end, double dt);

double check_derivative_identity(const StateTrajectory& traj);

// Total propagate calls in this process.
std::uint64_t propagate_count();

}  // namespace esnode
