#pragma once

#include "kme/covariance.hpp"
#include "kme/estimators.hpp"
#include "kme/kernels.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace kme {

/// Negative log-marginal likelihood of (lambda, beta) for one Whittle design:
///
///   l(eta) = 1/2 log det(M) + 1/2 v~^T M^{-1} v~,   M = lambda Phi K_beta Phi^T + I
///
/// with every additive constant fixed to zero.
class MarginalObjective {
public:
    MarginalObjective(WhittleDesign design, KernelFamily family);

    const WhittleDesign& design() const noexcept { return design_; }
    KernelFamily family() const noexcept { return family_; }
    int dim() const noexcept { return design_.n + 1; }

    /// Phi K_beta Phi^T, the lambda-independent part of M.
    Eigen::MatrixXd gram(double beta) const;

    /// Evaluate given a precomputed gram(beta); lets a search reuse it across lambdas.
    double evaluate(const Eigen::MatrixXd& gram, double lambda) const;

private:
    WhittleDesign design_;
    KernelFamily family_;
};

double neg_log_marginal(const MarginalObjective& obj, const Hyperparameters& eta);

/// Marginal likelihood of the lagged regression Y = X a + e with
/// e ~ N(0, sigma2 I) and a ~ N(0, sigma2 lambda K_pem), used to tune the
/// prediction error baseline. Scaling the prior by sigma2 makes the posterior
/// mean the minimizer of pem_objective at the same lambda. Additive constants
/// are fixed to zero.
class PemMarginalObjective {
public:
    PemMarginalObjective(const LaggedRegression& reg, double sigma2, KernelFamily family);

    KernelFamily family() const noexcept { return family_; }
    double noise_variance() const noexcept { return sigma2_; }
    double operator()(const Hyperparameters& eta) const;

private:
    Eigen::MatrixXd xtx_;
    Eigen::VectorXd xty_;
    double yty_ = 0.0;
    int rows_ = 0;
    double sigma2_ = 1.0;
    KernelFamily family_;
};

struct SearchConfig {
    double log10_lambda_min = -4.0;
    double log10_lambda_max = 4.0;
    double log10_lambda_step = 0.5;
    double beta_min = 0.05;
    double beta_max = 0.95;
    double beta_step = 0.05;
    bool refine = true;
    int max_evaluations = 500;
    /// Simplex diameter in (log lambda, logit beta) coordinates.
    double tolerance = 1e-6;

    std::vector<double> lambda_grid() const;
    std::vector<double> beta_grid() const;
};

struct TracePoint {
    double lambda = 0.0;
    double beta = 0.0;
    double value = 0.0;
};

struct HyperoptResult {
    Hyperparameters eta_hat;
    double objective_value = 0.0;
    int evaluations = 0;
    std::vector<TracePoint> trace;
};

/// Exhaustive grid over (lambda, beta), then Nelder-Mead from the best grid
/// point in (log lambda, logit beta) coordinates. The result is the best point
/// of the whole trace, so it is never worse than the grid.
HyperoptResult optimize_hyperparameters(const MarginalObjective& obj, const SearchConfig& config = {});

/// Same search over an arbitrary objective.
HyperoptResult optimize_hyperparameters(const std::function<double(const Hyperparameters&)>& objective,
                                        const SearchConfig& config = {});

struct PipelineConfig {
    int n = 50;
    int low_order = 4;
    SearchConfig search;
    JitterPolicy jitter;
};

/// Kernel-based maximum entropy estimate with empirical-Bayes hyperparameters:
/// preliminary b0, lags, Cholesky, Whittle design, hyperparameter search, and
/// the regularized solve, followed by df and the root check. Errors are
/// rethrown with the failing step named.
EstimateResult run_pipeline(const TimeSeries& y, KernelFamily family, const PipelineConfig& config = {});

/// Plain maximum entropy with BIC order selection over 1..config.n.
EstimateResult run_me_bic(const TimeSeries& y, const PipelineConfig& config = {});

/// Kernel prediction error baseline, hyperparameters tuned on the regression
/// marginal likelihood with noise variance 1 / b0_prelim^2.
EstimateResult run_pem_pipeline(const TimeSeries& y, KernelFamily family, const PipelineConfig& config = {});

EstimateResult estimate(Method method, const TimeSeries& y, const PipelineConfig& config = {});

}  // namespace kme
