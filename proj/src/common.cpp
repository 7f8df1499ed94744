#include "esnode/common.hpp"

namespace esnode {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::AllZeroRecurrent: return "AllZeroRecurrent";
        case ErrorKind::NilpotentRecurrent: return "NilpotentRecurrent";
        case ErrorKind::NonFiniteState: return "NonFiniteState";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::SingularCoefficient: return "SingularCoefficient";
        case ErrorKind::IllConditioned: return "IllConditioned";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::Io: return "IoError";
    }
    return "Unknown";
}

void raise(ErrorKind kind, const std::string& what) {
    throw Error(kind, std::string(error_kind_name(kind)) + ": " + what);
}

}  // namespace esnode
