#include "kme/kernels.hpp"

#include "kme/errors.hpp"

#include <cmath>
#include <string>

namespace kme {

const char* to_string(KernelFamily family) {
    return family == KernelFamily::DI ? "DI" : "TC";
}

void validate(const KernelSpec& spec) {
    if (!(spec.beta > 0.0 && spec.beta < 1.0)) {
        fail(ErrorKind::InvalidHyperparameter, "beta must lie in (0,1), got " + std::to_string(spec.beta));
    }
    if (spec.size < 1) fail(ErrorKind::InvalidHyperparameter, "kernel size must be >= 1");
}

void validate(const Hyperparameters& eta) {
    if (!(eta.lambda > 0.0) || !std::isfinite(eta.lambda)) {
        fail(ErrorKind::InvalidHyperparameter, "lambda must be finite and > 0, got " + std::to_string(eta.lambda));
    }
    if (!(eta.beta > 0.0 && eta.beta < 1.0)) {
        fail(ErrorKind::InvalidHyperparameter, "beta must lie in (0,1), got " + std::to_string(eta.beta));
    }
}

Eigen::MatrixXd KernelFactorization::inverse_kernel() const {
    return F * d.asDiagonal() * F.transpose();
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec) {
    validate(spec);
    const int m = spec.size;
    const double beta = spec.beta;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
    if (spec.family == KernelFamily::DI) {
        for (int i = 0; i < m; ++i) k(i, i) = std::pow(beta, i + 1);
        return k;
    }
    // m = n + 1, so beta^{n+2} = beta^{m+1}.
    const double floor = std::pow(beta, m + 1);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) k(i, j) = std::pow(beta, std::max(i, j) + 1) - floor;
    }
    return k;
}

KernelFactorization kernel_factorization(const KernelSpec& spec) {
    validate(spec);
    const int m = spec.size;
    const double beta = spec.beta;
    KernelFactorization f;
    f.F = Eigen::MatrixXd::Identity(m, m);
    f.d.resize(m);
    if (spec.family == KernelFamily::DI) {
        f.variant = KernelFactorization::Variant::DI_inverse;
        for (int i = 0; i < m; ++i) f.d(i) = std::pow(beta, -(i + 1));
        return f;
    }
    f.variant = KernelFactorization::Variant::TC_inverse;
    for (int i = 1; i < m; ++i) f.F(i, i - 1) = -1.0;
    const double head = 1.0 / (beta - beta * beta);
    for (int i = 0; i < m; ++i) f.d(i) = head * std::pow(beta, -i);
    return f;
}

Eigen::MatrixXd kernel_sqrt(const KernelSpec& spec) {
    const KernelFactorization f = kernel_factorization(spec);
    const int m = spec.size;
    // K = F^{-T} diag(d)^{-1} F^{-1}; for TC, F^{-T} is the upper triangle of ones.
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        const double w = 1.0 / std::sqrt(f.d(j));
        if (spec.family == KernelFamily::DI) {
            s(j, j) = w;
        } else {
            for (int i = 0; i <= j; ++i) s(i, j) = w;
        }
    }
    return s;
}

Eigen::MatrixXd scaled_inverse_kernel(const KernelSpec& spec, double lambda, int N) {
    validate(spec);
    validate(Hyperparameters{lambda, spec.beta});
    const int n = spec.order();
    if (N <= n) {
        fail(ErrorKind::InvalidOrder, "need N > n, got N=" + std::to_string(N) + " n=" + std::to_string(n));
    }
    KernelFactorization f = kernel_factorization(spec);
    f.d /= static_cast<double>(N - n) * lambda;
    if (spec.family == KernelFamily::DI) return Eigen::MatrixXd(f.d.asDiagonal());
    return f.inverse_kernel();
}

}  // namespace kme
