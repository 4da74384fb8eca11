#pragma once

#include "kme/covariance.hpp"
#include "kme/kernels.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace kme {

enum class Method { ME, ME_DI, ME_TC, PEM_DI, PEM_TC };

/// "ME", "ME_DI", ... (the column/record tag used in every output file).
const char* to_string(Method method);
/// Accepts both the tag ("ME_DI") and the CLI spelling ("me-di").
Method parse_method(const std::string& name);
std::optional<KernelFamily> kernel_family_of(Method method);

/// Coefficients [b_0 ... b_n] of b(z) = sum_k b_k z^{-k}, the estimated inverse
/// spectral factor. b_0 must be non-zero.
class PredictorPolynomial {
public:
    explicit PredictorPolynomial(Eigen::VectorXd coeffs);

    int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
    double operator[](int k) const { return coeffs_(k); }

    /// One-step-ahead predictor coefficients a_k = -b_k / b_0, k = 1..n.
    Eigen::VectorXd predictor() const;

private:
    Eigen::VectorXd coeffs_;
};

/// Whitened regression data: v_tilde = sqrt(N-n)/b0 * L^{-1} e_1 and
/// Phi = sqrt(N-n) * L^T, where Sigma = L L^T.
struct WhittleDesign {
    Eigen::VectorXd v_tilde;
    Eigen::MatrixXd phi;
    double b0_prelim = 1.0;
    int N = 0;
    int n = 0;
};

struct MinPhaseCheck {
    bool min_phase = false;
    double max_root_modulus = 0.0;
};

struct OrderSelection {
    PredictorPolynomial b;
    int chosen_n = 1;
    /// bic[k] is the criterion at order k + 1.
    std::vector<double> bic;
    double jitter = 0.0;
};

struct EstimateResult {
    Method method = Method::ME;
    PredictorPolynomial b_hat{Eigen::VectorXd::Ones(1)};
    std::optional<Hyperparameters> eta_hat;
    double df = 0.0;
    bool min_phase_verified = false;
    double max_root_modulus = 0.0;
    double jitter_used = 0.0;
    std::optional<int> chosen_n;
    /// Minimized negative log-marginal likelihood (kernel methods only).
    std::optional<double> objective_value;
    int evaluations = 0;
};

/// a = Sigma^{-1} e_1. No jitter is applied here; a singular Sigma throws.
Eigen::VectorXd yule_walker_solution(const ToeplitzCovariance& cov);

/// b = a / sqrt(a_0).
PredictorPolynomial yule_walker(const ToeplitzCovariance& cov);

/// Yule-Walker fits for n = 1..n_max, choosing the order minimizing
/// BIC(n) = N log(1/a_0(n)) + n log N. Ties go to the smaller order.
OrderSelection me_bic(const TimeSeries& y, int n_max, const JitterPolicy& policy = {});

/// sqrt(a_0) of the order-`low_order` Yule-Walker fit: the inverse innovation
/// standard deviation of a low-order AR model.
double preliminary_b0(const TimeSeries& y, int low_order = 4, const JitterPolicy& policy = {});

WhittleDesign build_whittle_design(const CholeskyFactor& factor, double b0_prelim, int N, int n);

/// Kernel-regularized estimate b = b0^{-1} (Sigma + R)^{-1} e_1 with
/// R = ((N-n) lambda K)^{-1} in structured form.
///
/// The leading b0 is the preliminary estimate stored in the design; the
/// closed form is often written with the final b0, which is not yet known at
/// that point.
PredictorPolynomial kernel_me(const WhittleDesign& design, const ToeplitzCovariance& cov, KernelFamily family,
                              const Hyperparameters& eta);

/// Same estimate in regularized least-squares form:
/// b = lambda K Phi^T (lambda Phi K Phi^T + I)^{-1} v_tilde.
PredictorPolynomial kernel_me_regression_form(const WhittleDesign& design, KernelFamily family,
                                              const Hyperparameters& eta);

/// Lagged regression for one-step prediction: rows t = n+1..N, target y_t,
/// regressors y_{t-1}..y_{t-n}.
struct LaggedRegression {
    Eigen::MatrixXd X;
    Eigen::VectorXd Y;
};

LaggedRegression lagged_regression(const TimeSeries& y, int n);

/// Prior covariance for the predictor coefficients a_1..a_n used by kernel PEM:
/// the trailing n x n block of the size-(n+1) kernel, which equals beta times
/// the size-n kernel.
Eigen::MatrixXd pem_kernel(KernelFamily family, double beta, int n);
Eigen::MatrixXd pem_kernel_inverse(KernelFamily family, double beta, int n);

/// ||Y - X a||^2 + lambda^{-1} a^T K^{-1} a.
double pem_objective(const LaggedRegression& reg, KernelFamily family, const Hyperparameters& eta,
                     const Eigen::VectorXd& a);

/// Kernel-regularized prediction error baseline. Returns
/// b(z) = (1 - sum_k a_k z^{-k}) / sigma_hat with sigma_hat^2 the mean squared
/// residual. There is no minimum-phase guarantee.
PredictorPolynomial kernel_pem(const TimeSeries& y, int n, KernelFamily family, const Hyperparameters& eta);

/// Roots of b_0 z^n + b_1 z^{n-1} + ... + b_n from the balanced companion matrix.
std::vector<std::complex<double>> polynomial_roots(const Eigen::VectorXd& coeffs);

/// Strict check that every root lies inside the unit circle.
MinPhaseCheck check_min_phase(const PredictorPolynomial& b);

}  // namespace kme
