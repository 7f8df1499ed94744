#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace esnode {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Scalar function of time, used for ODE coefficients and forcing.
using TimeFunction = std::function<double(double)>;

enum class ErrorKind {
    InvalidArgument,
    AllZeroRecurrent,
    NilpotentRecurrent,
    NonFiniteState,
    DimensionMismatch,
    SingularCoefficient,
    IllConditioned,
    NonFiniteLoss,
    NonFinite,
    Config,
    Io,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) raise(kind, what);
}

}  // namespace esnode
