#include "kme/hyperopt.hpp"

#include "kme/diagnostics.hpp"
#include "kme/errors.hpp"
#include "kme/nelder_mead.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace kme {

MarginalObjective::MarginalObjective(WhittleDesign design, KernelFamily family)
    : design_(std::move(design)), family_(family) {
    const int m = design_.n + 1;
    if (design_.phi.rows() != m || design_.phi.cols() != m || design_.v_tilde.size() != m) {
        fail(ErrorKind::DimensionMismatch, "Whittle design has inconsistent dimensions");
    }
}

Eigen::MatrixXd MarginalObjective::gram(double beta) const {
    const Eigen::MatrixXd k = kernel_matrix({family_, beta, dim()});
    return design_.phi * k * design_.phi.transpose();
}

double MarginalObjective::evaluate(const Eigen::MatrixXd& gram, double lambda) const {
    Eigen::MatrixXd m = lambda * gram;
    m.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Internal, "lambda Phi K Phi^T + I is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(design_.v_tilde);
    return l.diagonal().array().log().sum() + 0.5 * w.squaredNorm();
}

double neg_log_marginal(const MarginalObjective& obj, const Hyperparameters& eta) {
    validate(eta);
    return obj.evaluate(obj.gram(eta.beta), eta.lambda);
}

PemMarginalObjective::PemMarginalObjective(const LaggedRegression& reg, double sigma2, KernelFamily family)
    : xtx_(reg.X.transpose() * reg.X),
      xty_(reg.X.transpose() * reg.Y),
      yty_(reg.Y.squaredNorm()),
      rows_(static_cast<int>(reg.Y.size())),
      sigma2_(sigma2),
      family_(family) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail(ErrorKind::InvalidData, "noise variance must be > 0");
}

double PemMarginalObjective::operator()(const Hyperparameters& eta) const {
    validate(eta);
    const auto n = static_cast<int>(xtx_.rows());
    // Woodbury on sigma2 (I + lambda X K X^T) with K = S S^T.
    const Eigen::MatrixXd s = std::sqrt(eta.beta) * kernel_sqrt({family_, eta.beta, n});
    const double ratio = eta.lambda;
    Eigen::MatrixXd a = ratio * (s.transpose() * xtx_ * s);
    a.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Internal, "PEM marginal matrix is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(s.transpose() * xty_);
    const double logdet = rows_ * std::log(sigma2_) + 2.0 * l.diagonal().array().log().sum();
    const double quad = (yty_ - ratio * w.squaredNorm()) / sigma2_;
    return 0.5 * logdet + 0.5 * quad;
}

namespace {

std::vector<double> linspace_by_step(double lo, double hi, double step) {
    if (hi < lo) fail(ErrorKind::InvalidHyperparameter, "search grid has max < min");
    std::vector<double> out;
    if (hi == lo || !(step > 0.0)) {
        out.push_back(lo);
        return out;
    }
    const auto count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) out.push_back(lo + i * step);
    return out;
}

double logistic(double w) { return 1.0 / (1.0 + std::exp(-w)); }

// Whether the regularizer K^{-1} / scale stays finite. The marginal likelihood
// can keep improving towards beta -> 0 with lambda -> infinity (prior mass
// on b_0 only); past the overflow point the estimate itself cannot be formed,
// so the search treats such points as unusable.
bool regularizer_finite(KernelFamily family, double beta, int size, double scale) {
    const Eigen::VectorXd d = kernel_factorization({family, beta, size}).d;
    return std::isfinite(4.0 * d.maxCoeff() / scale);
}

// `objective(lambda, beta)` must return +inf (or NaN) for points it cannot evaluate.
HyperoptResult search(const std::function<double(double, double)>& objective, const SearchConfig& config) {
    HyperoptResult result;
    std::optional<std::size_t> best;
    auto record = [&](double lambda, double beta) {
        double value = std::numeric_limits<double>::infinity();
        if (lambda > 0.0 && std::isfinite(lambda) && beta > 0.0 && beta < 1.0) {
            try {
                value = objective(lambda, beta);
            } catch (const Error&) {
                // Overflowing lambda during refinement; the point is simply unusable.
                value = std::numeric_limits<double>::infinity();
            }
            if (!std::isfinite(value)) value = std::numeric_limits<double>::infinity();
        }
        result.trace.push_back({lambda, beta, value});
        if (!best || value < result.trace[*best].value) best = result.trace.size() - 1;
        return value;
    };

    const std::vector<double> lambdas = config.lambda_grid();
    for (double beta : config.beta_grid()) {
        for (double lambda : lambdas) record(lambda, beta);
    }

    if (config.refine) {
        const TracePoint start = result.trace[*best];
        Eigen::VectorXd x0(2);
        x0 << std::log(start.lambda), std::log(start.beta / (1.0 - start.beta));
        NelderMeadOptions opts;
        opts.max_evaluations = config.max_evaluations;
        opts.diameter_tolerance = config.tolerance;
        opts.initial_step = Eigen::Vector2d(0.5 * std::log(10.0) * std::max(config.log10_lambda_step, 0.1), 0.5);
        nelder_mead([&](const Eigen::VectorXd& x) { return record(std::exp(x(0)), logistic(x(1))); }, x0, opts);
    }

    const TracePoint& winner = result.trace[*best];
    if (!std::isfinite(winner.value)) fail(ErrorKind::Internal, "marginal likelihood is not finite anywhere on the grid");
    result.eta_hat = Hyperparameters{winner.lambda, winner.beta};
    result.objective_value = winner.value;
    result.evaluations = static_cast<int>(result.trace.size());
    return result;
}

template <class F>
auto at_step(int step, const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const Error& e) {
        throw Error(e.kind(), "step " + std::to_string(step) + " (" + name + "): " + e.what());
    }
}

}  // namespace

std::vector<double> SearchConfig::lambda_grid() const {
    std::vector<double> out;
    for (double e : linspace_by_step(log10_lambda_min, log10_lambda_max, log10_lambda_step)) {
        out.push_back(std::pow(10.0, e));
    }
    return out;
}

std::vector<double> SearchConfig::beta_grid() const {
    std::vector<double> out = linspace_by_step(beta_min, beta_max, beta_step);
    for (double b : out) {
        if (!(b > 0.0 && b < 1.0)) fail(ErrorKind::InvalidHyperparameter, "beta grid must lie inside (0,1)");
    }
    return out;
}

HyperoptResult optimize_hyperparameters(const MarginalObjective& obj, const SearchConfig& config) {
    // Gram matrices depend on beta only; the grid visits each beta for a run of lambdas.
    double cached_beta = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd cached_gram;
    return search(
        [&](double lambda, double beta) {
            const WhittleDesign& d = obj.design();
            if (!regularizer_finite(obj.family(), beta, obj.dim(), (d.N - d.n) * lambda)) {
                return std::numeric_limits<double>::infinity();
            }
            if (beta != cached_beta) {
                cached_gram = obj.gram(beta);
                cached_beta = beta;
            }
            return obj.evaluate(cached_gram, lambda);
        },
        config);
}

HyperoptResult optimize_hyperparameters(const std::function<double(const Hyperparameters&)>& objective,
                                        const SearchConfig& config) {
    return search([&](double lambda, double beta) { return objective(Hyperparameters{lambda, beta}); }, config);
}

EstimateResult run_pipeline(const TimeSeries& y, KernelFamily family, const PipelineConfig& config) {
    const int N = static_cast<int>(y.size());
    const int n = config.n;
    if (n < 0 || n >= N) {
        fail(ErrorKind::InvalidOrder, "step 2 (model order): need 0 <= n < N, got n=" + std::to_string(n) +
                                          " N=" + std::to_string(N));
    }
    const double b0 = at_step(1, "preliminary b0", [&] { return preliminary_b0(y, config.low_order, config.jitter); });
    ToeplitzCovariance cov = at_step(3, "covariance", [&] { return build_toeplitz(estimate_lags(y, n)); });
    const CholeskyFactor factor = at_step(4, "square root", [&] { return cholesky(cov, config.jitter); });
    if (factor.jittered()) cov = cov.with_jitter(factor.jitter);
    const MarginalObjective objective(at_step(5, "Whittle design", [&] { return build_whittle_design(factor, b0, N, n); }),
                                      family);
    const HyperoptResult opt = at_step(6, "hyperparameters", [&] { return optimize_hyperparameters(objective, config.search); });
    const PredictorPolynomial b = at_step(7, "regularized solve", [&] {
        return kernel_me(objective.design(), cov, family, opt.eta_hat);
    });

    EstimateResult r;
    r.method = family == KernelFamily::DI ? Method::ME_DI : Method::ME_TC;
    r.b_hat = b;
    r.eta_hat = opt.eta_hat;
    r.df = degrees_of_freedom(cov, family, opt.eta_hat, N);
    const MinPhaseCheck mp = check_min_phase(b);
    r.min_phase_verified = mp.min_phase;
    r.max_root_modulus = mp.max_root_modulus;
    r.jitter_used = factor.jitter;
    r.objective_value = opt.objective_value;
    r.evaluations = opt.evaluations;
    return r;
}

EstimateResult run_me_bic(const TimeSeries& y, const PipelineConfig& config) {
    const OrderSelection sel = me_bic(y, config.n, config.jitter);
    EstimateResult r;
    r.method = Method::ME;
    r.b_hat = sel.b;
    r.chosen_n = sel.chosen_n;
    r.df = sel.chosen_n + 1;
    const MinPhaseCheck mp = check_min_phase(sel.b);
    r.min_phase_verified = mp.min_phase;
    r.max_root_modulus = mp.max_root_modulus;
    r.jitter_used = sel.jitter;
    return r;
}

EstimateResult run_pem_pipeline(const TimeSeries& y, KernelFamily family, const PipelineConfig& config) {
    const int n = config.n;
    const double b0 = at_step(1, "preliminary b0", [&] { return preliminary_b0(y, config.low_order, config.jitter); });
    const LaggedRegression reg = at_step(2, "lagged regression", [&] { return lagged_regression(y, n); });
    const PemMarginalObjective objective(reg, 1.0 / (b0 * b0), family);
    const HyperoptResult opt = at_step(6, "hyperparameters", [&] {
        return optimize_hyperparameters(
            [&](const Hyperparameters& eta) {
                if (!regularizer_finite(family, eta.beta, n, eta.beta * eta.lambda)) {
                    return std::numeric_limits<double>::infinity();
                }
                return objective(eta);
            },
            config.search);
    });
    const PredictorPolynomial b = at_step(7, "regularized solve", [&] { return kernel_pem(y, n, family, opt.eta_hat); });

    EstimateResult r;
    r.method = family == KernelFamily::DI ? Method::PEM_DI : Method::PEM_TC;
    r.b_hat = b;
    r.eta_hat = opt.eta_hat;
    r.df = regression_degrees_of_freedom(reg.X.transpose() * reg.X,
                                         pem_kernel_inverse(family, opt.eta_hat.beta, n) / opt.eta_hat.lambda);
    const MinPhaseCheck mp = check_min_phase(b);
    r.min_phase_verified = mp.min_phase;
    r.max_root_modulus = mp.max_root_modulus;
    r.objective_value = opt.objective_value;
    r.evaluations = opt.evaluations;
    return r;
}

EstimateResult estimate(Method method, const TimeSeries& y, const PipelineConfig& config) {
    switch (method) {
        case Method::ME: return run_me_bic(y, config);
        case Method::ME_DI: return run_pipeline(y, KernelFamily::DI, config);
        case Method::ME_TC: return run_pipeline(y, KernelFamily::TC, config);
        case Method::PEM_DI: return run_pem_pipeline(y, KernelFamily::DI, config);
        case Method::PEM_TC: return run_pem_pipeline(y, KernelFamily::TC, config);
    }
    fail(ErrorKind::Internal, "unknown method");
}

}  // namespace kme
