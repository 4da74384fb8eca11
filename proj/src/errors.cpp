#include "kme/errors.hpp"

namespace kme {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidOrder: return "invalid-order";
        case ErrorKind::InvalidData: return "invalid-data";
        case ErrorKind::NotPositiveDefinite: return "not-positive-definite";
        case ErrorKind::InvalidHyperparameter: return "invalid-hyperparameter";
        case ErrorKind::InvalidModel: return "invalid-model";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::Parse: return "parse-error";
        case ErrorKind::InvalidConfig: return "invalid-config";
        case ErrorKind::Internal: return "internal-error";
    }
    return "unknown";
}

}  // namespace kme
