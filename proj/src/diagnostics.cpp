#include "kme/diagnostics.hpp"

#include "kme/errors.hpp"

namespace kme {

namespace {

double trace_of_solve(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) {
    Eigen::LLT<Eigen::MatrixXd> llt(lhs);
    if (llt.info() != Eigen::Success) fail(ErrorKind::NotPositiveDefinite, "regularized matrix is not positive definite");
    return llt.solve(rhs).trace();
}

}  // namespace

double degrees_of_freedom(const ToeplitzCovariance& cov, KernelFamily family, const Hyperparameters& eta, int N) {
    validate(eta);
    const Eigen::MatrixXd r = scaled_inverse_kernel({family, eta.beta, cov.dim()}, eta.lambda, N);
    return trace_of_solve(cov.matrix() + r, cov.matrix());
}

double regression_degrees_of_freedom(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& scaled_kernel_inverse) {
    if (gram.rows() != scaled_kernel_inverse.rows() || gram.cols() != scaled_kernel_inverse.cols()) {
        fail(ErrorKind::DimensionMismatch, "gram and kernel inverse sizes differ");
    }
    return trace_of_solve(gram + scaled_kernel_inverse, gram);
}

DiagnosticsReport make_report(double df, int n) {
    return DiagnosticsReport{df, n + 1, 1.0 - df / (n + 1)};
}

}  // namespace kme
