#include "kme/estimators.hpp"

#include "kme/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace kme {

const char* to_string(Method method) {
    switch (method) {
        case Method::ME: return "ME";
        case Method::ME_DI: return "ME_DI";
        case Method::ME_TC: return "ME_TC";
        case Method::PEM_DI: return "PEM_DI";
        case Method::PEM_TC: return "PEM_TC";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    std::string key;
    for (char c : name) key.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    for (Method m : {Method::ME, Method::ME_DI, Method::ME_TC, Method::PEM_DI, Method::PEM_TC}) {
        if (key == to_string(m)) return m;
    }
    fail(ErrorKind::Parse, "unknown method '" + name + "'");
}

std::optional<KernelFamily> kernel_family_of(Method method) {
    switch (method) {
        case Method::ME_DI:
        case Method::PEM_DI: return KernelFamily::DI;
        case Method::ME_TC:
        case Method::PEM_TC: return KernelFamily::TC;
        case Method::ME: break;
    }
    return std::nullopt;
}

PredictorPolynomial::PredictorPolynomial(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() == 0) fail(ErrorKind::InvalidData, "empty predictor polynomial");
    if (!coeffs_.allFinite()) fail(ErrorKind::InvalidData, "non-finite predictor coefficient");
    if (coeffs_(0) == 0.0) fail(ErrorKind::InvalidData, "leading coefficient b0 must be non-zero");
}

Eigen::VectorXd PredictorPolynomial::predictor() const {
    return -coeffs_.tail(coeffs_.size() - 1) / coeffs_(0);
}

Eigen::VectorXd yule_walker_solution(const ToeplitzCovariance& cov) {
    const CholeskyFactor f = cholesky(cov, JitterPolicy::forbid());
    Eigen::VectorXd e1 = Eigen::VectorXd::Unit(cov.dim(), 0);
    const auto L = f.L.triangularView<Eigen::Lower>();
    Eigen::VectorXd a = L.solve(e1);
    L.transpose().solveInPlace(a);
    return a;
}

PredictorPolynomial yule_walker(const ToeplitzCovariance& cov) {
    const Eigen::VectorXd a = yule_walker_solution(cov);
    if (!(a(0) > 0.0)) fail(ErrorKind::NotPositiveDefinite, "Yule-Walker solution has a_0 <= 0");
    return PredictorPolynomial(a / std::sqrt(a(0)));
}

OrderSelection me_bic(const TimeSeries& y, int n_max, const JitterPolicy& policy) {
    const int N = static_cast<int>(y.size());
    if (n_max < 1 || n_max >= N) {
        fail(ErrorKind::InvalidOrder, "BIC search needs 1 <= n_max < N, got n_max=" + std::to_string(n_max));
    }
    ToeplitzCovariance full = build_toeplitz(estimate_lags(y, n_max));
    const CholeskyFactor f = cholesky(full, policy);
    if (f.jittered()) full = full.with_jitter(f.jitter);

    const double logN = std::log(static_cast<double>(N));
    std::vector<double> bic;
    std::optional<PredictorPolynomial> best;
    int best_n = 0;
    double best_bic = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const ToeplitzCovariance cov(full.lags().head(n + 1));
        const Eigen::VectorXd a = yule_walker_solution(cov);
        const double value = N * std::log(1.0 / a(0)) + n * logN;
        bic.push_back(value);
        if (!best || value < best_bic) {
            best = PredictorPolynomial(a / std::sqrt(a(0)));
            best_bic = value;
            best_n = n;
        }
    }
    return OrderSelection{*best, best_n, std::move(bic), f.jitter};
}

double preliminary_b0(const TimeSeries& y, int low_order, const JitterPolicy& policy) {
    ToeplitzCovariance cov = build_toeplitz(estimate_lags(y, low_order));
    const CholeskyFactor f = cholesky(cov, policy);
    if (f.jittered()) cov = cov.with_jitter(f.jitter);
    const Eigen::VectorXd a = yule_walker_solution(cov);
    return std::sqrt(a(0));
}

WhittleDesign build_whittle_design(const CholeskyFactor& factor, double b0_prelim, int N, int n) {
    if (factor.L.rows() != n + 1 || factor.L.cols() != n + 1) {
        fail(ErrorKind::DimensionMismatch, "Cholesky factor must be (n+1)x(n+1)");
    }
    if (N <= n) {
        fail(ErrorKind::InvalidOrder, "need N > n, got N=" + std::to_string(N) + " n=" + std::to_string(n));
    }
    if (!(b0_prelim > 0.0) || !std::isfinite(b0_prelim)) {
        fail(ErrorKind::InvalidData, "preliminary b0 must be finite and > 0");
    }
    const double root = std::sqrt(static_cast<double>(N - n));
    WhittleDesign d;
    d.v_tilde = factor.L.triangularView<Eigen::Lower>().solve(Eigen::VectorXd::Unit(n + 1, 0));
    d.v_tilde *= root / b0_prelim;
    d.phi = root * factor.L.transpose();
    d.b0_prelim = b0_prelim;
    d.N = N;
    d.n = n;
    return d;
}

PredictorPolynomial kernel_me(const WhittleDesign& design, const ToeplitzCovariance& cov, KernelFamily family,
                              const Hyperparameters& eta) {
    validate(eta);
    const int m = design.n + 1;
    if (cov.dim() != m || design.v_tilde.size() != m) {
        fail(ErrorKind::DimensionMismatch, "design and covariance sizes differ");
    }
    Eigen::MatrixXd a = cov.matrix() + scaled_inverse_kernel({family, eta.beta, m}, eta.lambda, design.N);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Internal, "Sigma + R is not positive definite");
    Eigen::VectorXd b = llt.solve(Eigen::VectorXd::Unit(m, 0));
    b /= design.b0_prelim;
    return PredictorPolynomial(std::move(b));
}

PredictorPolynomial kernel_me_regression_form(const WhittleDesign& design, KernelFamily family,
                                              const Hyperparameters& eta) {
    validate(eta);
    const int m = design.n + 1;
    const Eigen::MatrixXd k = eta.lambda * kernel_matrix({family, eta.beta, m});
    Eigen::MatrixXd gram = design.phi * k * design.phi.transpose();
    gram.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Internal, "lambda Phi K Phi^T + I is not positive definite");
    Eigen::VectorXd b = k * (design.phi.transpose() * llt.solve(design.v_tilde));
    return PredictorPolynomial(std::move(b));
}

}  // namespace kme
