#include "kme/nelder_mead.hpp"

#include "kme/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace kme {

namespace {

double diameter(const std::vector<Eigen::VectorXd>& simplex) {
    double d = 0.0;
    for (std::size_t i = 0; i < simplex.size(); ++i) {
        for (std::size_t j = i + 1; j < simplex.size(); ++j) d = std::max(d, (simplex[i] - simplex[j]).norm());
    }
    return d;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& options) {
    const Eigen::Index dim = x0.size();
    if (options.initial_step.size() != dim) fail(ErrorKind::DimensionMismatch, "initial_step size != x0 size");

    int evaluations = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Eigen::VectorXd> pts(dim + 1, x0);
    std::vector<double> vals(dim + 1);
    vals[0] = eval(x0);
    for (Eigen::Index i = 0; i < dim; ++i) {
        pts[i + 1](i) += options.initial_step(i);
        vals[i + 1] = eval(pts[i + 1]);
    }

    std::vector<std::size_t> order(dim + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        // Stable so ties keep their insertion order and runs stay deterministic.
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<Eigen::VectorXd> p2;
        std::vector<double> v2;
        for (std::size_t k : order) {
            p2.push_back(pts[k]);
            v2.push_back(vals[k]);
        }
        pts.swap(p2);
        vals.swap(v2);
    };

    bool converged = false;
    while (true) {
        sort_simplex();
        if (diameter(pts) < options.diameter_tolerance) {
            converged = true;
            break;
        }
        if (evaluations >= options.max_evaluations) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) centroid += pts[i];
        centroid /= static_cast<double>(dim);

        const Eigen::VectorXd& worst = pts[dim];
        const Eigen::VectorXd xr = centroid + (centroid - worst);
        const double fr = eval(xr);

        if (fr < vals[0]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[dim] = xe;
                vals[dim] = fe;
            } else {
                pts[dim] = xr;
                vals[dim] = fr;
            }
            continue;
        }
        if (fr < vals[dim - 1]) {
            pts[dim] = xr;
            vals[dim] = fr;
            continue;
        }
        // Outside contraction when the reflection beats the worst point, inside otherwise.
        const bool outside = fr < vals[dim];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                           : Eigen::VectorXd(centroid + 0.5 * (worst - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : vals[dim])) {
            pts[dim] = xc;
            vals[dim] = fc;
            continue;
        }
        for (Eigen::Index i = 1; i <= dim; ++i) {
            pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
            vals[i] = eval(pts[i]);
        }
    }
    return NelderMeadResult{pts[0], vals[0], evaluations, converged};
}

}  // namespace kme
