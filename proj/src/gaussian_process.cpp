#include "esnode/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace esnode {

Matrix se_kernel(const Matrix& a, const Matrix& b, const Vector& lengthscale, double signal) {
    const Matrix as = a * lengthscale.cwiseInverse().asDiagonal();
    const Matrix bs = b * lengthscale.cwiseInverse().asDiagonal();
    Matrix d2 = (-2.0) * as * bs.transpose();
    d2.colwise() += as.rowwise().squaredNorm();
    d2.rowwise() += bs.rowwise().squaredNorm().transpose();
    return signal * (-0.5 * d2.array().max(0.0)).exp().matrix();
}

namespace {

struct Conditioned {
    Eigen::LLT<Matrix> llt;
    double c = 0.0;
    Vector alpha;
    Matrix k_se;
};

bool condition_on(const Matrix& x, const Vector& y, const GpHyper& h, Conditioned& out) {
    const Index n = x.rows();
    const Vector ell = h.log_lengthscale.array().exp();
    out.k_se = se_kernel(x, x, ell, std::exp(h.log_signal));
    Matrix k = out.k_se;
    k.diagonal().array() += std::exp(h.log_noise) + GaussianProcess::kJitter;
    out.llt.compute(k);
    if (out.llt.info() != Eigen::Success) return false;
    const Vector ones = Vector::Ones(n);
    const Vector k1 = out.llt.solve(ones);
    const Vector ky = out.llt.solve(y);
    const double denom = ones.dot(k1);
    if (!(denom > 0.0)) return false;
    out.c = ones.dot(ky) / denom;
    out.alpha = out.llt.solve((y.array() - out.c).matrix());
    return out.alpha.allFinite() && std::isfinite(out.c);
}

}  // namespace

double GaussianProcess::log_marginal(const Matrix& x, const Vector& y, const GpHyper& h, Vector* grad) {
    Conditioned cd;
    if (!condition_on(x, y, h, cd)) return NAN;
    const Index n = x.rows();
    const Index d = x.cols();
    const Vector r = (y.array() - cd.c).matrix();
    const Matrix& l = cd.llt.matrixLLT();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const double value = -0.5 * r.dot(cd.alpha) - 0.5 * logdet -
                         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (grad) {
        // d/dtheta = 0.5 tr((alpha alpha^T - K^-1) dK/dtheta); the GLS mean is
        // stationary, so its dependence on theta drops out.
        const Matrix kinv = cd.llt.solve(Matrix::Identity(n, n));
        const Matrix w = cd.alpha * cd.alpha.transpose() - kinv;
        grad->resize(d + 2);
        const Vector ell = h.log_lengthscale.array().exp();
        for (Index i = 0; i < d; ++i) {
            Matrix diff2(n, n);
            for (Index a = 0; a < n; ++a)
                for (Index b = 0; b < n; ++b) {
                    const double t = x(a, i) - x(b, i);
                    diff2(a, b) = t * t;
                }
            (*grad)(i) = 0.5 * (w.array() * cd.k_se.array() * diff2.array()).sum() / (ell(i) * ell(i));
        }
        (*grad)(d) = 0.5 * (w.array() * cd.k_se.array()).sum();
        (*grad)(d + 1) = 0.5 * std::exp(h.log_noise) * w.trace();
    }
    return value;
}

std::optional<GaussianProcess> GaussianProcess::condition(const Matrix& x, const Vector& y,
                                                         const GpHyper& h) {
    Conditioned cd;
    if (!condition_on(x, y, h, cd)) return std::nullopt;
    GaussianProcess gp;
    gp.x_ = x;
    gp.h_ = h;
    gp.c_ = cd.c;
    gp.llt_ = std::move(cd.llt);
    gp.alpha_ = std::move(cd.alpha);
    return gp;
}

std::optional<GaussianProcess> GaussianProcess::fit(const Matrix& x, const Vector& y, Rng& rng,
                                                    int restarts, int iterations, const GpBounds& bounds) {
    const Index d = x.cols();
    const Index p = d + 2;
    Vector lo(p), hi(p);
    lo.head(d).setConstant(std::log(bounds.length_lo));
    hi.head(d).setConstant(std::log(bounds.length_hi));
    lo(d) = std::log(bounds.signal_lo);
    hi(d) = std::log(bounds.signal_hi);
    lo(d + 1) = std::log(bounds.noise_lo);
    hi(d + 1) = std::log(bounds.noise_hi);

    auto unpack = [d](const Vector& v) {
        GpHyper h;
        h.log_lengthscale = v.head(d);
        h.log_signal = v(d);
        h.log_noise = v(d + 1);
        return h;
    };

    double best_value = -INFINITY;
    Vector best_params;
    for (int start = 0; start < std::max(1, restarts); ++start) {
        Vector v(p);
        if (start == 0) {
            v.head(d).setConstant(std::log(0.5));
            v(d) = 0.0;
            v(d + 1) = std::log(5e-3);
        } else {
            for (Index i = 0; i < p; ++i) v(i) = rng.uniform(lo(i), hi(i));
        }
        v = v.cwiseMax(lo).cwiseMin(hi);
        Vector m = Vector::Zero(p), s = Vector::Zero(p), g;
        const double lr = 0.1, b1 = 0.9, b2 = 0.999;
        for (int it = 0; it <= iterations; ++it) {
            const double val = log_marginal(x, y, unpack(v), &g);
            if (!std::isfinite(val) || !g.allFinite()) break;
            if (val > best_value) {
                best_value = val;
                best_params = v;
            }
            if (it == iterations) break;
            m = b1 * m + (1 - b1) * g;
            s = b2 * s + (1 - b2) * g.cwiseProduct(g);
            const double c1 = 1 - std::pow(b1, it + 1), c2 = 1 - std::pow(b2, it + 1);
            v += lr * ((m / c1).array() / ((s / c2).array().sqrt() + 1e-8)).matrix();
            v = v.cwiseMax(lo).cwiseMin(hi);
        }
    }
    if (best_params.size() == 0) return std::nullopt;
    return condition(x, y, unpack(best_params));
}

Matrix GaussianProcess::kernel(const Matrix& a, const Matrix& b) const {
    return se_kernel(a, b, lengthscales(), std::exp(h_.log_signal));
}

Vector GaussianProcess::mean(const Matrix& xs) const {
    return (kernel(xs, x_) * alpha_).array() + c_;
}

Matrix GaussianProcess::covariance(const Matrix& xs) const {
    const Matrix ks = kernel(x_, xs);
    const Matrix v = llt_.matrixL().solve(ks);
    return kernel(xs, xs) - v.transpose() * v;
}

std::optional<Matrix> GaussianProcess::sample(const Matrix& xs, int count, Rng& rng) const {
    const Vector mu = mean(xs);
    Matrix cov = covariance(xs);
    const Index m = xs.rows();
    const double scale = std::exp(h_.log_signal);
    for (double jitter = 1e-8; jitter <= 1e-2; jitter *= 10.0) {
        Matrix c = cov;
        c.diagonal().array() += jitter * scale;
        Eigen::LLT<Matrix> llt(c);
        if (llt.info() != Eigen::Success) continue;
        Matrix z(m, count);
        for (Index j = 0; j < count; ++j)
            for (Index i = 0; i < m; ++i) z(i, j) = rng.normal();
        Matrix out = llt.matrixL() * z;
        out.colwise() += mu;
        if (out.allFinite()) return out;
    }
    return std::nullopt;
}

}  // namespace esnode
