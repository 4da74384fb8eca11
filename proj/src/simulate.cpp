#include "kme/simulate.hpp"

#include "kme/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace kme {

namespace {

using cd = std::complex<double>;

constexpr double kConjugateTolerance = 1e-12;

void check_conjugate_closed(const std::vector<cd>& roots, const char* what) {
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        if (std::abs(roots[i].imag()) <= kConjugateTolerance) continue;
        bool matched = false;
        for (std::size_t j = i + 1; j < roots.size() && !matched; ++j) {
            if (!used[j] && std::abs(roots[j] - std::conj(roots[i])) <= kConjugateTolerance) {
                used[j] = true;
                matched = true;
            }
        }
        if (!matched) fail(ErrorKind::InvalidModel, std::string(what) + " are not closed under conjugation");
    }
}

}  // namespace

void validate(const ArmaModel& model) {
    if (!(model.gain > 0.0) || !std::isfinite(model.gain)) fail(ErrorKind::InvalidModel, "gain must be finite and > 0");
    if (model.zeros.size() != model.poles.size()) {
        fail(ErrorKind::InvalidModel, "numerator and denominator degrees differ");
    }
    for (const cd& z : model.zeros) {
        if (!(std::abs(z) < 1.0)) fail(ErrorKind::InvalidModel, "zero outside or on the unit circle");
    }
    for (const cd& p : model.poles) {
        if (!(std::abs(p) < 1.0)) fail(ErrorKind::InvalidModel, "pole outside or on the unit circle");
    }
    check_conjugate_closed(model.zeros, "zeros");
    check_conjugate_closed(model.poles, "poles");
}

Eigen::VectorXd expand_roots(const std::vector<cd>& roots) {
    std::vector<cd> c{1.0};
    for (const cd& r : roots) {
        c.push_back(0.0);
        for (std::size_t k = c.size() - 1; k >= 1; --k) c[k] -= r * c[k - 1];
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(c.size()));
    for (std::size_t k = 0; k < c.size(); ++k) out(static_cast<Eigen::Index>(k)) = c[k].real();
    return out;
}

ArmaModel reference_model() {
    const cd z0 = std::polar(0.85, 0.52);
    const cd p0 = std::polar(0.98, 0.482);
    return ArmaModel{{z0, std::conj(z0)}, {p0, std::conj(p0)}, std::sqrt(2.0)};
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
    // Top 53 bits -> [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

TimeSeries generate(const ArmaModel& model, int N, std::uint64_t seed, int burn_in) {
    validate(model);
    if (N < 2) fail(ErrorKind::InvalidData, "a time series needs at least 2 samples");
    if (burn_in < 0) fail(ErrorKind::InvalidData, "burn_in must be >= 0");

    const Eigen::VectorXd num = expand_roots(model.zeros);
    const Eigen::VectorXd den = expand_roots(model.poles);
    const auto m = static_cast<int>(num.size()) - 1;

    // Circular history of the last m inputs and outputs.
    std::vector<double> e_hist(m + 1, 0.0);
    std::vector<double> y_hist(m + 1, 0.0);
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(N);
    const int total = burn_in + N;
    for (int t = 0; t < total; ++t) {
        const int slot = t % (m + 1);
        e_hist[slot] = rng.normal();
        double acc = 0.0;
        for (int k = 0; k <= m; ++k) acc += num(k) * e_hist[(slot - k + (m + 1)) % (m + 1)];
        for (int k = 1; k <= m; ++k) acc -= den(k) * y_hist[(slot - k + (m + 1)) % (m + 1)];
        y_hist[slot] = acc;
        if (t >= burn_in) out.push_back(model.gain * acc);
    }
    return TimeSeries(std::move(out));
}

ArmaModel random_arma(std::uint64_t seed, double pole_modulus, double zero_modulus, int pairs, double max_phase_gap) {
    if (!(pole_modulus > 0.0 && pole_modulus < 1.0)) fail(ErrorKind::InvalidModel, "pole modulus must lie in (0,1)");
    if (!(zero_modulus > 0.0 && zero_modulus < 1.0)) fail(ErrorKind::InvalidModel, "zero modulus must lie in (0,1)");
    if (pairs < 0) fail(ErrorKind::InvalidModel, "pairs must be >= 0");
    if (!(max_phase_gap >= 0.0)) fail(ErrorKind::InvalidModel, "max_phase_gap must be >= 0");

    Rng rng(seed);
    ArmaModel model;
    for (int i = 0; i < pairs; ++i) {
        const double pole_phase = std::numbers::pi * rng.uniform();
        const double zero_phase = pole_phase + max_phase_gap * (2.0 * rng.uniform() - 1.0);
        const cd p = std::polar(pole_modulus, pole_phase);
        const cd z = std::polar(zero_modulus, zero_phase);
        model.poles.push_back(p);
        model.poles.push_back(std::conj(p));
        model.zeros.push_back(z);
        model.zeros.push_back(std::conj(z));
    }
    model.gain = 1.0;
    return model;
}

std::vector<double> frequency_grid(int grid_size) {
    if (grid_size < 2) fail(ErrorKind::InvalidData, "grid_size must be >= 2");
    std::vector<double> theta(grid_size);
    for (int k = 0; k < grid_size; ++k) theta[k] = -std::numbers::pi + 2.0 * std::numbers::pi * k / grid_size;
    return theta;
}

SpectrumEvaluation eval_spectrum(const SpectrumModel& model, int grid_size) {
    constexpr double kSingular = 1e-12;
    const std::vector<double> theta = frequency_grid(grid_size);
    SpectrumEvaluation out;
    out.values.resize(theta.size());

    if (const auto* arma = std::get_if<ArmaModel>(&model)) {
        validate(*arma);
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const cd z = std::polar(1.0, theta[k]);
            double num = 1.0;
            double den = 1.0;
            for (const cd& r : arma->zeros) num *= std::norm(z - r);
            for (const cd& r : arma->poles) den *= std::norm(z - r);
            if (std::sqrt(num) <= kSingular) out.near_singular = true;
            out.values[k] = arma->gain * arma->gain * num / den;
        }
        return out;
    }

    const Eigen::VectorXd& b = std::get<PredictorPolynomial>(model).coeffs();
    for (std::size_t k = 0; k < theta.size(); ++k) {
        // Horner in w = e^{-j theta}.
        const cd w = std::polar(1.0, -theta[k]);
        cd acc = 0.0;
        for (Eigen::Index i = b.size() - 1; i >= 0; --i) acc = acc * w + b(i);
        const double mag2 = std::norm(acc);
        if (std::sqrt(mag2) <= kSingular) out.near_singular = true;
        out.values[k] = 1.0 / mag2;
    }
    return out;
}

double reconstruction_error(std::span<const double> estimate, std::span<const double> truth) {
    if (estimate.size() != truth.size() || truth.empty()) {
        fail(ErrorKind::DimensionMismatch, "spectra must share a non-empty grid");
    }
    // Uniform periodic grid: the trapezoid weights are all 2 pi / G and cancel in the ratio.
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double diff = estimate[k] - truth[k];
        num += diff * diff;
        den += truth[k] * truth[k];
    }
    return num / den;
}

double reconstruction_error(const SpectrumModel& estimate, const SpectrumModel& truth, int grid_size) {
    const SpectrumEvaluation e = eval_spectrum(estimate, grid_size);
    const SpectrumEvaluation t = eval_spectrum(truth, grid_size);
    return reconstruction_error(e.values, t.values);
}

std::string arma_to_json(const ArmaModel& model) {
    auto pairs = [](const std::vector<cd>& roots) {
        nlohmann::json arr = nlohmann::json::array();
        for (const cd& r : roots) arr.push_back({r.real(), r.imag()});
        return arr;
    };
    const nlohmann::json doc{{"zeros", pairs(model.zeros)}, {"poles", pairs(model.poles)}, {"gain", model.gain}};
    return doc.dump();
}

ArmaModel arma_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("ARMA model JSON: ") + e.what());
    }
    auto roots = [&](const char* key) {
        std::vector<cd> out;
        if (!doc.contains(key) || !doc[key].is_array()) fail(ErrorKind::Parse, std::string("missing array '") + key + "'");
        for (const auto& item : doc[key]) {
            if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
                fail(ErrorKind::Parse, std::string("entries of '") + key + "' must be [re, im] pairs");
            }
            out.emplace_back(item[0].get<double>(), item[1].get<double>());
        }
        return out;
    };
    ArmaModel model;
    model.zeros = roots("zeros");
    model.poles = roots("poles");
    if (!doc.contains("gain") || !doc["gain"].is_number()) fail(ErrorKind::Parse, "missing numeric 'gain'");
    model.gain = doc["gain"].get<double>();
    validate(model);
    return model;
}

}  // namespace kme
