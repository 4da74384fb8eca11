#pragma once

#include <Eigen/Dense>

namespace kme {

enum class KernelFamily { DI, TC };

const char* to_string(KernelFamily family);

/// Prior covariance family for the predictor coefficients b_0..b_n.
///
/// Entries follow the 1-based convention t, s = 1..n+1; storage index i maps
/// to t = i + 1.
///   DI: K = diag(beta, beta^2, ..., beta^{n+1})
///   TC: K(t,s) = beta^{max(t,s)} - beta^{n+2}
struct KernelSpec {
    KernelFamily family = KernelFamily::TC;
    double beta = 0.5;
    int size = 1;

    int order() const noexcept { return size - 1; }
};

struct Hyperparameters {
    double lambda = 1.0;
    double beta = 0.5;
};

/// K^{-1} = F diag(d) F^T with F lower bidiagonal (1 on the diagonal, -1 below it
/// for TC; identity for DI).
struct KernelFactorization {
    enum class Variant { TC_inverse, DI_inverse };

    Eigen::MatrixXd F;
    Eigen::VectorXd d;
    Variant variant = Variant::TC_inverse;

    Eigen::MatrixXd inverse_kernel() const;
};

void validate(const KernelSpec& spec);
void validate(const Hyperparameters& eta);

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec);

KernelFactorization kernel_factorization(const KernelSpec& spec);

/// A square root S with S S^T = K, assembled from the factorization rather than
/// by factoring K (upper triangular for TC, diagonal for DI).
Eigen::MatrixXd kernel_sqrt(const KernelSpec& spec);

/// R = ((N - n) * lambda * K)^{-1}, built from the factorization. n = spec.size - 1.
Eigen::MatrixXd scaled_inverse_kernel(const KernelSpec& spec, double lambda, int N);

}  // namespace kme
