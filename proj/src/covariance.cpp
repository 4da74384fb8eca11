#include "kme/covariance.hpp"

#include "kme/errors.hpp"

#include <cmath>
#include <string>

namespace kme {

TimeSeries::TimeSeries(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) {
        fail(ErrorKind::InvalidData, "time series needs at least 2 samples, got " +
                                         std::to_string(samples_.size()));
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i])) {
            fail(ErrorKind::InvalidData, "non-finite sample at index " + std::to_string(i));
        }
    }
}

ToeplitzCovariance::ToeplitzCovariance(Eigen::VectorXd lags) : lags_(std::move(lags)) {
    if (lags_.size() == 0) fail(ErrorKind::InvalidData, "empty lag vector");
    if (!lags_.allFinite()) fail(ErrorKind::InvalidData, "non-finite covariance lag");
    const Eigen::Index m = lags_.size();
    matrix_.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            matrix_(i, j) = lags_(i > j ? i - j : j - i);
        }
    }
}

ToeplitzCovariance ToeplitzCovariance::with_jitter(double eps) const {
    Eigen::VectorXd shifted = lags_;
    shifted(0) += eps;
    return ToeplitzCovariance(std::move(shifted));
}

Eigen::VectorXd estimate_lags(const TimeSeries& y, int n) {
    const auto N = static_cast<int>(y.size());
    if (n < 0 || n >= N) {
        fail(ErrorKind::InvalidOrder, "lag order n=" + std::to_string(n) +
                                          " must satisfy 0 <= n < N=" + std::to_string(N));
    }
    const auto s = y.samples();
    Eigen::VectorXd r(n + 1);
    for (int k = 0; k <= n; ++k) {
        double acc = 0.0;
        for (int t = 0; t + k < N; ++t) acc += s[t] * s[t + k];
        r(k) = acc / N;
    }
    return r;
}

ToeplitzCovariance build_toeplitz(const Eigen::VectorXd& lags) { return ToeplitzCovariance(lags); }

namespace {

bool try_llt(const Eigen::MatrixXd& a, Eigen::MatrixXd& out) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return false;
    Eigen::MatrixXd l = llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return false;
    }
    out = std::move(l);
    return true;
}

}  // namespace

CholeskyFactor cholesky(const ToeplitzCovariance& cov, const JitterPolicy& policy) {
    return cholesky(cov.matrix(), policy);
}

CholeskyFactor cholesky(const Eigen::MatrixXd& symmetric, const JitterPolicy& policy) {
    if (symmetric.rows() != symmetric.cols() || symmetric.rows() == 0) {
        fail(ErrorKind::DimensionMismatch, "Cholesky needs a non-empty square matrix");
    }
    CholeskyFactor f;
    if (try_llt(symmetric, f.L)) return f;
    if (!policy.allow_repair) {
        fail(ErrorKind::NotPositiveDefinite, "covariance matrix is not positive definite");
    }
    const double scale = std::abs(symmetric(0, 0)) > 0.0 ? std::abs(symmetric(0, 0)) : 1.0;
    double eps = policy.initial_relative * scale;
    for (int attempt = 0; attempt <= policy.max_escalations; ++attempt, eps *= policy.growth) {
        Eigen::MatrixXd shifted = symmetric;
        shifted.diagonal().array() += eps;
        if (try_llt(shifted, f.L)) {
            f.jitter = eps;
            return f;
        }
    }
    fail(ErrorKind::NotPositiveDefinite,
         "covariance matrix is not positive definite even after jitter up to " + std::to_string(eps / policy.growth));
}

}  // namespace kme
