// Acceptance suite. Prints one PASS/FAIL line per criterion with the measured
// quantities and exits non-zero if any criterion fails.
//
// Usage: acceptance [path/to/kme_cli] [--only k,k,...]

#include "kme/covariance.hpp"
#include "kme/diagnostics.hpp"
#include "kme/errors.hpp"
#include "kme/estimators.hpp"
#include "kme/harness.hpp"
#include "kme/hyperopt.hpp"
#include "kme/kernels.hpp"
#include "kme/simulate.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace kme;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Fixture {
    TimeSeries y;
    ToeplitzCovariance cov;
    WhittleDesign design;
};

Fixture make_fixture(const TimeSeries& y, int n) {
    ToeplitzCovariance cov = build_toeplitz(estimate_lags(y, n));
    const CholeskyFactor f = cholesky(cov);
    if (f.jittered()) cov = cov.with_jitter(f.jitter);
    const double b0 = preliminary_b0(y);
    return {y, cov, build_whittle_design(f, b0, static_cast<int>(y.size()), n)};
}

KernelFamily family_for(int i) { return i % 2 ? KernelFamily::TC : KernelFamily::DI; }

// 1. Minimum phase of kernel-ME estimates over random stable ARMA truths.
Outcome minimum_phase_invariant() {
    std::mt19937_64 gen(20240601);
    std::uniform_real_distribution<double> ub(0.1, 0.95), ul(-3.0, 3.0);
    const int trials = 500;
    int failures = 0;
    double worst = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < trials; ++i) {
        const TimeSeries y = generate(random_arma(gen()), 500, gen());
        const Fixture fx = make_fixture(y, 50);
        for (auto family : {KernelFamily::DI, KernelFamily::TC}) {
            const Hyperparameters eta{std::pow(10.0, ul(gen)), ub(gen)};
            const MinPhaseCheck c = check_min_phase(kernel_me(fx.design, fx.cov, family, eta));
            worst = std::max(worst, c.max_root_modulus);
            failures += !c.min_phase;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {failures == 0 && secs <= 300.0,
            fmt("%d/%d estimates minimum phase, max |root| %.6f, %.1f s", 2 * trials - failures, 2 * trials, worst,
                secs)};
}

// 2. lambda -> infinity recovers the Yule-Walker solution scaled by 1/b0.
//
// lambda = 1e12 stands in for infinity only while (N-n) lambda beta^{n+1} is
// large: with n = 50 the regularizer is still O(1) at beta = 0.5. The assertion
// uses beta in [0.7, 0.95]; smaller beta is measured and reported.
Outcome large_lambda_reduction() {
    double worst = 0.0, worst_small_beta = 0.0;
    for (int i = 0; i < 20; ++i) {
        const TimeSeries y = i == 0 ? generate(reference_model(), 500, 42)
                                    : generate(random_arma(mix_seed(7, i)), 500, mix_seed(8, i));
        const Fixture fx = make_fixture(y, 50);
        const Eigen::VectorXd expected = yule_walker_solution(fx.cov) / fx.design.b0_prelim;
        for (auto family : {KernelFamily::DI, KernelFamily::TC}) {
            const Eigen::VectorXd b = kernel_me(fx.design, fx.cov, family, {1e12, 0.7 + 0.0125 * i}).coeffs();
            worst = std::max(worst, (b - expected).norm() / expected.norm());
            const Eigen::VectorXd c = kernel_me(fx.design, fx.cov, family, {1e12, 0.5 + 0.01 * i}).coeffs();
            worst_small_beta = std::max(worst_small_beta, (c - expected).norm() / expected.norm());
        }
    }
    return {worst <= 1e-4, fmt("max relative deviation %.3e over 20 fixtures x 2 kernels, beta in [0.7, 0.95] "
                               "(tol 1e-4); not asserted: %.3e for beta in [0.5, 0.7)",
                               worst, worst_small_beta)};
}

// 3. TC kernel equals the inverse of its bidiagonal factorization.
Outcome tc_factorization() {
    double worst = 0.0;
    for (int n : {1, 5, 20, 50}) {
        for (double beta : {0.05, 0.3, 0.6, 0.85, 0.95}) {
            const KernelSpec spec{KernelFamily::TC, beta, n + 1};
            const KernelFactorization f = kernel_factorization(spec);
            const Eigen::MatrixXd k = kernel_matrix(spec);
            worst = std::max(worst, oracle::rel_diff(oracle::inverse(f.F * f.d.asDiagonal() * f.F.transpose()), k));
        }
    }
    return {worst <= 1e-9, fmt("max relative Frobenius error %.3e (tol 1e-9)", worst)};
}

// 4. Regression form and structured form of the estimate agree.
Outcome dual_form() {
    std::mt19937_64 gen(4444);
    std::uniform_real_distribution<double> ub(0.1, 0.95), ul(-3.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int n = 1 + static_cast<int>(gen() % 50);
        const Fixture fx = make_fixture(generate(random_arma(gen()), 500, gen()), n);
        const Hyperparameters eta{std::pow(10.0, ul(gen)), ub(gen)};
        const Eigen::VectorXd a = kernel_me(fx.design, fx.cov, family_for(i), eta).coeffs();
        const Eigen::VectorXd b = kernel_me_regression_form(fx.design, family_for(i), eta).coeffs();
        worst = std::max(worst, (a - b).norm() / a.norm());
    }
    return {worst <= 1e-8, fmt("max relative difference %.3e over 100 instances (tol 1e-8)", worst)};
}

// 5. Degrees of freedom: unregularized limit, monotonicity in lambda, bounds.
Outcome degrees_of_freedom_checks() {
    std::mt19937_64 gen(555);
    std::uniform_real_distribution<double> ub(0.1, 0.95);
    double worst_limit = 0.0, worst_drop = 0.0;
    int out_of_range = 0;
    for (int i = 0; i < 50; ++i) {
        const int n = 1 + static_cast<int>(gen() % 50);
        const auto cov = build_toeplitz(estimate_lags(generate(random_arma(gen()), 500, gen()), n));
        const double beta = ub(gen);
        // Same caveat as criterion 2: the large-lambda limit is checked where 1e12 is effectively infinite.
        const double limit_beta = 0.7 + 0.25 * (beta - 0.1) / 0.85;
        worst_limit = std::max(worst_limit,
                               std::abs(degrees_of_freedom(cov, family_for(i), {1e12, limit_beta}, 500) - (n + 1)));
        double previous = 0.0;
        for (int k = 0; k < 20; ++k) {
            const double lambda = std::pow(10.0, -6.0 + 12.0 * k / 19.0);
            const double df = degrees_of_freedom(cov, family_for(i), {lambda, beta}, 500);
            if (df < -1e-9 || df > n + 1 + 1e-9) ++out_of_range;
            if (k > 0) worst_drop = std::max(worst_drop, previous - df);
            previous = df;
        }
    }
    // Rounding-level slack only: df saturates at n+1 for large lambda.
    const bool pass = worst_limit <= 1e-4 && worst_drop <= 1e-9 && out_of_range == 0;
    return {pass, fmt("|df(1e12) - (n+1)| <= %.2e (beta >= 0.7), largest decrease along lambda %.2e, %d out of [0, n+1]",
                      worst_limit, std::max(worst_drop, 0.0), out_of_range)};
}

// 6. Marginal likelihood: log-det identity and Gaussian integral by quadrature.
Outcome marginal_likelihood() {
    std::mt19937_64 gen(6666);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> ul(-2, 2), ub(0.1, 0.9);
    double worst_logdet = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int m = 2 + static_cast<int>(gen() % 10);
        Eigen::MatrixXd phi(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) phi(r, c) = normal(gen) + (r == c ? 3.0 : 0.0);
        const double lambda = std::pow(10.0, ul(gen));
        const KernelSpec spec{family_for(i), ub(gen), m};
        const Eigen::MatrixXd k = kernel_matrix(spec);
        const double lhs = 0.5 * oracle::logdet(phi.transpose() * phi +
                                                kernel_factorization(spec).inverse_kernel() / lambda) +
                           0.5 * oracle::logdet(lambda * k);
        WhittleDesign d;
        d.phi = phi;
        d.v_tilde = Eigen::VectorXd::Zero(m);
        d.n = m - 1;
        d.N = m + 10;
        const double rhs = neg_log_marginal(MarginalObjective(d, spec.family), {lambda, spec.beta});
        worst_logdet = std::max(worst_logdet, std::abs(lhs - rhs));
    }

    // n = 2: three-dimensional tensor quadrature of exp(-h(b)).
    const TimeSeries y = generate(ArmaModel{{}, {}, 1.0}, 8, 5, 0);
    const Fixture fx = make_fixture(y, 2);
    const Hyperparameters eta{1.0, 0.5};
    const KernelSpec spec{KernelFamily::TC, eta.beta, 3};
    const Eigen::MatrixXd kinv = kernel_factorization(spec).inverse_kernel();
    const WhittleDesign& d = fx.design;
    const Eigen::MatrixXd H = d.phi.transpose() * d.phi + kinv / eta.lambda;
    auto h = [&](const Eigen::Vector3d& b) {
        return 0.5 * (d.v_tilde - d.phi * b).squaredNorm() + 0.5 * b.dot(kinv * b) / eta.lambda;
    };
    const Eigen::Vector3d mode = oracle::solve(H, d.phi.transpose() * d.v_tilde);
    const double h0 = h(mode);
    const Eigen::MatrixXd cov = oracle::inverse(H);
    const int points = 161;
    Eigen::Vector3d lo, step, b;
    for (int i = 0; i < 3; ++i) {
        const double half = 9.0 * std::sqrt(cov(i, i));
        lo(i) = mode(i) - half;
        step(i) = 2.0 * half / (points - 1);
    }
    long double sum = 0.0L;
    for (int i = 0; i < points; ++i) {
        b(0) = lo(0) + i * step(0);
        for (int j = 0; j < points; ++j) {
            b(1) = lo(1) + j * step(1);
            for (int k = 0; k < points; ++k) {
                b(2) = lo(2) + k * step(2);
                sum += std::exp(-(h(b) - h0));
            }
        }
    }
    const double log_integral = std::log(static_cast<double>(sum) * step.prod()) - h0;
    const double two_pi = 2.0 * std::numbers::pi;
    const double quadrature = 0.5 * oracle::logdet(eta.lambda * kernel_matrix(spec)) + 3.0 * std::log(two_pi) -
                              log_integral;
    const double closed = neg_log_marginal(MarginalObjective(d, KernelFamily::TC), eta) + 1.5 * std::log(two_pi);
    const double gap = std::abs(quadrature - closed);
    return {worst_logdet <= 1e-8 && gap <= 1e-3,
            fmt("log-det forms differ by <= %.2e (tol 1e-8); quadrature vs closed form %.2e (tol 1e-3)", worst_logdet,
                gap)};
}

double peak_location(const std::vector<double>& theta, const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (theta[k] >= 0.0 && (values[k] > values[best] || theta[best] < 0.0)) best = k;
    }
    return theta[best];
}

// 7. Single-trial experiment on the reference model, 20 seeds.
Outcome single_trial_reproduction() {
    ExperimentConfig cfg;
    cfg.methods = {Method::ME, Method::ME_DI, Method::ME_TC};
    int near_di = 0, near_tc = 0, bad_df = 0, integer_df = 0, bad_me_df = 0, failures = 0;
    double df_di_sum = 0.0, df_tc_sum = 0.0, me_df_sum = 0.0;
    const double pole_phase = 0.482;
    std::vector<double> true_theta = frequency_grid(cfg.grid_size);
    const double true_peak = peak_location(true_theta, eval_spectrum(reference_model(), cfg.grid_size).values);
    for (int s = 0; s < 20; ++s) {
        cfg.master_seed = 42 + s;
        const SingleTrialResult r = run_single_trial(cfg);
        for (const auto& rec : r.outcome.records) {
            if (!rec.ok) {
                ++failures;
                continue;
            }
            if (rec.method == Method::ME) {
                bad_me_df += rec.df != *rec.chosen_n + 1;
                me_df_sum += rec.df;
                continue;
            }
            const double peak = peak_location(r.theta, r.outcome.spectra.at(rec.method));
            const bool near = std::abs(peak - pole_phase) <= 0.02;
            (rec.method == Method::ME_DI ? near_di : near_tc) += near;
            (rec.method == Method::ME_DI ? df_di_sum : df_tc_sum) += rec.df;
            bad_df += !(rec.df > 0.0 && rec.df < 51.0);
            integer_df += rec.df == std::round(rec.df);
        }
    }
    const bool pass = near_di >= 16 && near_tc >= 16 && bad_df == 0 && integer_df < 40 && bad_me_df == 0 &&
                      failures == 0;
    return {pass, fmt("peak within 0.02 of 0.482: ME_DI %d/20, ME_TC %d/20 (true peak %.4f); df in (0,51) "
                      "violations %d, integer df %d/40; mean df ME %.2f, ME_DI %.4f, ME_TC %.4f; "
                      "df_ME != n+1: %d; failures %d",
                      near_di, near_tc, true_peak, bad_df, integer_df, me_df_sum / 20, df_di_sum / 20, df_tc_sum / 20,
                      bad_me_df, failures)};
}

double median_of(const MonteCarloResult& r, Method m) {
    for (const auto& s : r.summary)
        if (s.method == m) return s.median;
    return NAN;
}

// 8. Monte Carlo ordering of median reconstruction error over 5 master seeds.
Outcome monte_carlo_ordering() {
    const auto t0 = std::chrono::steady_clock::now();
    int holds = 0;
    std::string medians;
    for (std::uint64_t seed : {42u, 43u, 44u, 45u, 46u}) {
        ExperimentConfig cfg;
        cfg.experiment = Experiment::MonteCarlo;
        cfg.methods = {Method::ME, Method::ME_DI, Method::ME_TC};
        cfg.master_seed = seed;
        const MonteCarloResult r = run_monte_carlo(cfg);
        const double me = median_of(r, Method::ME), di = median_of(r, Method::ME_DI), tc = median_of(r, Method::ME_TC);
        holds += di <= me && tc <= me;
        medians += fmt(" [seed %d: ME %.4f DI %.4f TC %.4f]", static_cast<int>(seed), me, di, tc);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {holds >= 4 && secs <= 900.0, fmt("ordering holds in %d/5 seeds, %.1f s;", holds, secs) + medians};
}

// 9. Near-unstable truths: kernel-ME always minimum phase; PEM violations counted.
Outcome pem_stress() {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::MonteCarlo;
    cfg.pole_modulus = 0.995;
    const MonteCarloResult r = run_monte_carlo(cfg);
    int me_bad = 0, me_total = 0, pem_bad = 0, pem_total = 0, failed = 0;
    for (const auto& rec : r.records) {
        if (!rec.ok) {
            ++failed;
            continue;
        }
        if (rec.method == Method::ME_DI || rec.method == Method::ME_TC) {
            ++me_total;
            me_bad += !rec.min_phase_verified;
        } else if (rec.method == Method::PEM_DI || rec.method == Method::PEM_TC) {
            ++pem_total;
            pem_bad += !rec.min_phase_verified;
        }
    }
    return {me_bad == 0 && me_total == 200,
            fmt("kernel-ME non-minimum-phase %d/%d; PEM non-minimum-phase %d/%d (reported); failed records %d",
                me_bad, me_total, pem_bad, pem_total, failed)};
}

// 10. Library routines against long-double dense oracles on the seed-42 fixture.
Outcome oracle_equivalence() {
    const TimeSeries y = generate(reference_model(), 500, 42);
    const int n = 50;
    const Eigen::VectorXd lags = estimate_lags(y, n);
    const std::vector<double> ref = oracle::lags(y.samples(), n);
    const double lag_err = (lags - Eigen::Map<const Eigen::VectorXd>(ref.data(), n + 1)).norm() /
                           Eigen::Map<const Eigen::VectorXd>(ref.data(), n + 1).norm();

    const Eigen::MatrixXd s = oracle::toeplitz(ref);
    const Eigen::VectorXd a_ref = oracle::solve(s, Eigen::VectorXd::Unit(n + 1, 0));
    const Eigen::VectorXd b_ref = a_ref / std::sqrt(a_ref(0));
    const Eigen::VectorXd b = yule_walker(build_toeplitz(lags)).coeffs();
    const double yw_err = (b - b_ref).norm() / b_ref.norm();

    const Fixture fx = make_fixture(y, n);
    double km_err = 0.0;
    for (auto family : {KernelFamily::DI, KernelFamily::TC}) {
        for (double lambda : {1e-2, 1.0, 1e2}) {
            for (double beta : {0.3, 0.8, 0.95}) {
                const Eigen::MatrixXd r = oracle::inverse((fx.design.N - n) * lambda * kernel_matrix({family, beta, n + 1}));
                const Eigen::VectorXd want =
                    oracle::solve(fx.cov.matrix() + r, Eigen::VectorXd::Unit(n + 1, 0)) / fx.design.b0_prelim;
                const Eigen::VectorXd got = kernel_me(fx.design, fx.cov, family, {lambda, beta}).coeffs();
                km_err = std::max(km_err, (got - want).norm() / want.norm());
            }
        }
    }
    return {yw_err <= 1e-12 && lag_err <= 1e-12 && km_err <= 1e-6,
            fmt("yule_walker %.2e (tol 1e-12), estimate_lags %.2e (tol 1e-12), kernel_me %.2e (tol 1e-6)", yw_err,
                lag_err, km_err)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 11. Repeated CLI runs produce byte-identical files.
Outcome determinism(const std::string& cli) {
    if (cli.empty()) return {false, "no CLI path given"};
    const fs::path root = fs::temp_directory_path() / "kme_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream out(root / "series.csv");
        out << "y\n";
        const TimeSeries y = generate(reference_model(), 300, 9);
        for (double v : y.samples()) out << format_double(v) << '\n';
    }
    const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
        {"single --seed 7", {"spectra.csv", "records.csv"}},
        {"montecarlo --runs 6 --threads 3 -N 300 -n 20 --seed 11", {"records.csv", "summary.csv"}},
        {"estimate " + (root / "series.csv").string() + " -n 20", {"estimate.json", "spectrum.csv"}},
    };
    int identical = 0, compared = 0;
    std::string bad;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (const char* rep : {"a", "b"}) {
            const fs::path out = root / (std::to_string(i) + rep);
            const std::string cmd = "\"" + cli + "\" " + runs[i].first + " --out \"" + out.string() + "\" > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
        }
        for (const auto& f : runs[i].second) {
            const std::string a = slurp(root / (std::to_string(i) + "a") / f);
            const std::string b = slurp(root / (std::to_string(i) + "b") / f);
            ++compared;
            if (!a.empty() && a == b) {
                ++identical;
            } else {
                bad += " " + f;
            }
        }
    }
    fs::remove_all(root);
    return {identical == compared, fmt("%d/%d output files byte-identical across repeated runs", identical, compared) + bad};
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string item; std::getline(ss, item, ',');) only.insert(std::stoi(item));
        } else {
            cli = arg;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"minimum-phase invariant", minimum_phase_invariant},
        {"large-lambda reduction to ME", large_lambda_reduction},
        {"TC factorization identity", tc_factorization},
        {"dual-form agreement", dual_form},
        {"degrees of freedom", degrees_of_freedom_checks},
        {"marginal likelihood", marginal_likelihood},
        {"single-trial reproduction", single_trial_reproduction},
        {"Monte Carlo ordering", monte_carlo_ordering},
        {"PEM stress observation", pem_stress},
        {"oracle equivalence", oracle_equivalence},
        {"determinism", [&] { return determinism(cli); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
