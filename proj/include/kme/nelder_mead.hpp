#pragma once

#include <Eigen/Dense>

#include <functional>

namespace kme {

struct NelderMeadOptions {
    /// Checked once per iteration; a final shrink may overshoot by up to dim + 1.
    int max_evaluations = 500;
    /// Stop once the largest vertex-to-vertex distance drops below this.
    double diameter_tolerance = 1e-6;
    /// Axis-aligned offsets of the initial simplex around the start point.
    Eigen::VectorXd initial_step;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Unconstrained Nelder-Mead with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). Non-finite objective values are
/// treated as +infinity. The best vertex is never replaced by a worse one, so
/// the result is no worse than f(x0).
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& options);

}  // namespace kme
