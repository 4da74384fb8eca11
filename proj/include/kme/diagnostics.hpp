#pragma once

#include "kme/covariance.hpp"
#include "kme/kernels.hpp"

#include <Eigen/Dense>

namespace kme {

struct DiagnosticsReport {
    double df = 0.0;
    int n_plus_1 = 0;
    double effective_shrinkage = 0.0;
};

/// df(eta) = tr[(Sigma + ((N-n) lambda K_beta)^{-1})^{-1} Sigma].
/// Equals n+1 without regularization and decreases towards 0 as lambda -> 0.
double degrees_of_freedom(const ToeplitzCovariance& cov, KernelFamily family, const Hyperparameters& eta, int N);

/// Same trace for the prediction error baseline: tr[(X^T X + (lambda K)^{-1})^{-1} X^T X].
double regression_degrees_of_freedom(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& scaled_kernel_inverse);

DiagnosticsReport make_report(double df, int n);

}  // namespace kme
