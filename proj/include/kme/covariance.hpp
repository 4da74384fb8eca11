#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace kme {

/// A finite real sample y_1..y_N. Construction validates N >= 2 and finiteness.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> samples);

    std::size_t size() const noexcept { return samples_.size(); }
    std::span<const double> samples() const noexcept { return samples_; }
    double operator[](std::size_t i) const { return samples_[i]; }

private:
    std::vector<double> samples_;
};

/// Estimated lags r_0..r_n and the symmetric Toeplitz matrix they generate.
class ToeplitzCovariance {
public:
    explicit ToeplitzCovariance(Eigen::VectorXd lags);

    int order() const noexcept { return static_cast<int>(lags_.size()) - 1; }
    int dim() const noexcept { return static_cast<int>(lags_.size()); }
    const Eigen::VectorXd& lags() const noexcept { return lags_; }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

    /// Same covariance with `eps` added to r_0, i.e. Sigma + eps*I. Still Toeplitz.
    ToeplitzCovariance with_jitter(double eps) const;

private:
    Eigen::VectorXd lags_;
    Eigen::MatrixXd matrix_;
};

struct JitterPolicy {
    bool allow_repair = true;
    /// First jitter is initial_relative * r_0.
    double initial_relative = 1e-8;
    double growth = 10.0;
    int max_escalations = 4;

    static JitterPolicy forbid() { return JitterPolicy{false, 0.0, 1.0, 0}; }
};

struct CholeskyFactor {
    Eigen::MatrixXd L;
    /// Diagonal shift that was needed for the factorization to succeed (0 if none).
    double jitter = 0.0;

    bool jittered() const noexcept { return jitter > 0.0; }
};

/// Biased lag estimator r_k = (1/N) sum_{t=1}^{N-k} y_t y_{t+k}, k = 0..n.
Eigen::VectorXd estimate_lags(const TimeSeries& y, int n);

ToeplitzCovariance build_toeplitz(const Eigen::VectorXd& lags);

/// Cholesky factor of Sigma (or Sigma + eps*I if the policy allows repair).
/// Throws NotPositiveDefinite once the jitter schedule is exhausted.
CholeskyFactor cholesky(const ToeplitzCovariance& cov, const JitterPolicy& policy = {});

/// Same for any symmetric matrix; the jitter scale is |a(0,0)|.
CholeskyFactor cholesky(const Eigen::MatrixXd& symmetric, const JitterPolicy& policy = {});

}  // namespace kme
