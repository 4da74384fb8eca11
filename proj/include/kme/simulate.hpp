#pragma once

#include "kme/covariance.hpp"
#include "kme/estimators.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace kme {

/// Rational spectral factor w(z) = gain * prod(z - zeros) / prod(z - poles).
///
/// Zeros and poles must be closed under conjugation, equal in number, and
/// strictly inside the unit circle.
struct ArmaModel {
    std::vector<std::complex<double>> zeros;
    std::vector<std::complex<double>> poles;
    double gain = 1.0;
};

/// Throws InvalidModel if any invariant of ArmaModel is violated.
void validate(const ArmaModel& model);

/// Real coefficients of prod_i (1 - r_i z^{-1}), constant term first.
Eigen::VectorXd expand_roots(const std::vector<std::complex<double>>& roots);

/// The two-pole/two-zero process of the single-trial experiment:
/// gain sqrt(2), zeros 0.85 e^{+-0.52j}, poles 0.98 e^{+-0.482j}.
ArmaModel reference_model();

/// Pseudo-random source used for every simulation: std::mt19937_64 (fully
/// specified by the standard) with a hand-written 53-bit uniform mapping and
/// Box-Muller transform, so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Uniform on [0, 1).
    double uniform();
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent per-trial seeds.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// Drives w(z) with unit-variance white Gaussian noise from a zero initial
/// state and discards the first `burn_in` outputs.
TimeSeries generate(const ArmaModel& model, int N, std::uint64_t seed, int burn_in = 2000);

/// `pairs` conjugate pole pairs at modulus pole_modulus with phases uniform on
/// [0, pi]; each zero pair sits at zero_modulus with phase equal to its pole's
/// phase plus a uniform offset in [-max_phase_gap, max_phase_gap]. Gain 1.
ArmaModel random_arma(std::uint64_t seed, double pole_modulus = 0.98, double zero_modulus = 0.85, int pairs = 3,
                      double max_phase_gap = 0.06);

using SpectrumModel = std::variant<ArmaModel, PredictorPolynomial>;

struct SpectrumEvaluation {
    std::vector<double> values;
    /// Set if a defining polynomial nearly vanishes (|.| <= 1e-12) at some grid point.
    bool near_singular = false;
};

/// theta_k = -pi + 2 pi k / grid_size, k = 0..grid_size-1.
std::vector<double> frequency_grid(int grid_size);

/// Truth: |w(e^{j theta})|^2. Estimate: 1 / |b(e^{j theta})|^2.
SpectrumEvaluation eval_spectrum(const SpectrumModel& model, int grid_size = 2048);

/// Ratio of trapezoidal integrals of (estimate - truth)^2 and truth^2 over a
/// full period of the shared uniform grid.
double reconstruction_error(std::span<const double> estimate, std::span<const double> truth);
double reconstruction_error(const SpectrumModel& estimate, const SpectrumModel& truth, int grid_size = 2048);

/// {"zeros": [[re, im], ...], "poles": [[re, im], ...], "gain": g}
std::string arma_to_json(const ArmaModel& model);
ArmaModel arma_from_json(const std::string& text);

}  // namespace kme
