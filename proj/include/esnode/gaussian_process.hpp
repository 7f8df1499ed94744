#pragma once

#include "esnode/common.hpp"
#include "esnode/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <optional>

namespace esnode {

// GP regression with a constant mean and an anisotropic squared-exponential
// kernel: k(x, x') = s^2 exp(-0.5 sum_i (x_i - x'_i)^2 / l_i^2).
struct GpHyper {
    Vector log_lengthscale;
    double log_signal = 0.0;  // log s^2
    double log_noise = std::log(5e-3);
};

struct GpBounds {
    double length_lo = 0.005, length_hi = 2.0;
    double signal_lo = 0.05, signal_hi = 20.0;
    double noise_lo = 1e-6, noise_hi = 0.2;
};

class GaussianProcess {
public:
    static constexpr double kJitter = 1e-6;

    // Fits hyperparameters by maximizing the marginal likelihood with Adam
    // from `restarts` starting points. Returns nullopt when every start fails.
    static std::optional<GaussianProcess> fit(const Matrix& x, const Vector& y, Rng& rng,
                                              int restarts = 5, int iterations = 60,
                                              const GpBounds& bounds = {});

    // Conditions on fixed hyperparameters. Returns nullopt if the kernel
    // matrix is not positive definite.
    static std::optional<GaussianProcess> condition(const Matrix& x, const Vector& y, const GpHyper& h);

    // Log marginal likelihood and its gradient in the log-parameters
    // (lengthscales, signal, noise). Non-finite value on failure.
    static double log_marginal(const Matrix& x, const Vector& y, const GpHyper& h, Vector* grad);

    Vector mean(const Matrix& xs) const;
    Matrix covariance(const Matrix& xs) const;
    // Joint posterior draws at xs, one column per sample.
    std::optional<Matrix> sample(const Matrix& xs, int count, Rng& rng) const;

    const GpHyper& hyper() const { return h_; }
    double constant_mean() const { return c_; }
    Vector lengthscales() const { return h_.log_lengthscale.array().exp(); }

private:
    Matrix kernel(const Matrix& a, const Matrix& b) const;

    Matrix x_;
    GpHyper h_;
    double c_ = 0.0;
    Eigen::LLT<Matrix> llt_;
    Vector alpha_;
};

Matrix se_kernel(const Matrix& a, const Matrix& b, const Vector& lengthscale, double signal);

}  // namespace esnode
