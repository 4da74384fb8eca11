#include "kme/errors.hpp"
#include "kme/estimators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace kme {

namespace {

// Parlett-Reinsch diagonal similarity scaling (radix 2, no permutations). It
// leaves eigenvalues unchanged and keeps companion matrices with widely
// spread coefficients from losing small roots to rounding.
void balance(Eigen::MatrixXd& a) {
    constexpr double radix = 2.0;
    constexpr double sqrdx = radix * radix;
    const Eigen::Index n = a.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = 0.0;
            double c = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                a.row(i) *= g;
                a.col(i) *= f;
            }
        }
    }
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(const Eigen::VectorXd& coeffs) {
    if (coeffs.size() == 0 || coeffs.cwiseAbs().maxCoeff() == 0.0) {
        fail(ErrorKind::InvalidData, "zero polynomial has no well-defined roots");
    }
    if (coeffs(0) == 0.0) fail(ErrorKind::InvalidData, "leading coefficient must be non-zero");

    // Exact trailing zeros are roots at the origin.
    Eigen::Index degree = coeffs.size() - 1;
    std::vector<std::complex<double>> roots;
    while (degree > 0 && coeffs(degree) == 0.0) {
        roots.emplace_back(0.0, 0.0);
        --degree;
    }
    if (degree == 0) return roots;
    if (degree == 1) {
        roots.emplace_back(-coeffs(1) / coeffs(0), 0.0);
        return roots;
    }

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (Eigen::Index k = 0; k < degree; ++k) companion(0, k) = -coeffs(k + 1) / coeffs(0);
    for (Eigen::Index k = 1; k < degree; ++k) companion(k, k - 1) = 1.0;
    balance(companion);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) fail(ErrorKind::Internal, "companion eigenvalue iteration did not converge");
    const Eigen::VectorXcd ev = solver.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) roots.push_back(ev(k));
    return roots;
}

MinPhaseCheck check_min_phase(const PredictorPolynomial& b) {
    MinPhaseCheck out;
    for (const auto& z : polynomial_roots(b.coeffs())) out.max_root_modulus = std::max(out.max_root_modulus, std::abs(z));
    out.min_phase = out.max_root_modulus < 1.0;
    return out;
}

}  // namespace kme
