#include "kme/errors.hpp"
#include "kme/estimators.hpp"

#include <cmath>
#include <string>

namespace kme {

LaggedRegression lagged_regression(const TimeSeries& y, int n) {
    const int N = static_cast<int>(y.size());
    if (n < 1 || N <= 2 * n) {
        fail(ErrorKind::InvalidOrder, "prediction error fit needs 1 <= n and N > 2n, got N=" + std::to_string(N) +
                                          " n=" + std::to_string(n));
    }
    const int rows = N - n;
    LaggedRegression reg{Eigen::MatrixXd(rows, n), Eigen::VectorXd(rows)};
    for (int r = 0; r < rows; ++r) {
        const int t = n + r;
        reg.Y(r) = y[t];
        for (int k = 1; k <= n; ++k) reg.X(r, k - 1) = y[t - k];
    }
    return reg;
}

Eigen::MatrixXd pem_kernel(KernelFamily family, double beta, int n) {
    return beta * kernel_matrix({family, beta, n});
}

Eigen::MatrixXd pem_kernel_inverse(KernelFamily family, double beta, int n) {
    return kernel_factorization({family, beta, n}).inverse_kernel() / beta;
}

double pem_objective(const LaggedRegression& reg, KernelFamily family, const Hyperparameters& eta,
                     const Eigen::VectorXd& a) {
    validate(eta);
    const Eigen::VectorXd residual = reg.Y - reg.X * a;
    const auto n = static_cast<int>(a.size());
    return residual.squaredNorm() + a.dot(pem_kernel_inverse(family, eta.beta, n) * a) / eta.lambda;
}

PredictorPolynomial kernel_pem(const TimeSeries& y, int n, KernelFamily family, const Hyperparameters& eta) {
    validate(eta);
    const LaggedRegression reg = lagged_regression(y, n);
    Eigen::MatrixXd normal = reg.X.transpose() * reg.X;
    normal += pem_kernel_inverse(family, eta.beta, n) / eta.lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Internal, "regularized normal matrix is not positive definite");
    const Eigen::VectorXd a = llt.solve(reg.X.transpose() * reg.Y);

    const double mse = (reg.Y - reg.X * a).squaredNorm() / static_cast<double>(reg.Y.size());
    if (!(mse > 0.0)) fail(ErrorKind::InvalidData, "prediction residuals are identically zero");
    const double sigma = std::sqrt(mse);
    Eigen::VectorXd b(n + 1);
    b(0) = 1.0;
    b.tail(n) = -a;
    return PredictorPolynomial(b / sigma);
}

}  // namespace kme
