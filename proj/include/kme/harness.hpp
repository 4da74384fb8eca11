#pragma once

#include "kme/estimators.hpp"
#include "kme/hyperopt.hpp"
#include "kme/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kme {

enum class Experiment { SingleTrial, MonteCarlo, EstimateFile };

struct ExperimentConfig {
    Experiment experiment = Experiment::SingleTrial;
    std::vector<Method> methods{Method::ME, Method::ME_DI, Method::ME_TC, Method::PEM_DI, Method::PEM_TC};
    int N = 500;
    int n = 50;
    int runs = 100;
    std::uint64_t master_seed = 42;
    double pole_modulus = 0.98;
    double zero_modulus = 0.85;
    double max_phase_gap = 0.06;
    int pairs = 3;
    int grid_size = 2048;
    int low_order = 4;
    int burn_in = 2000;
    /// Worker threads for Monte Carlo trials; 0 picks hardware concurrency.
    int threads = 0;
    /// Adds a wall_time_ms column to record files, which then stop being byte-reproducible.
    bool timing = false;
    SearchConfig search;
    JitterPolicy jitter;
    std::filesystem::path output_path = "results";

    PipelineConfig pipeline() const;
};

void validate(const ExperimentConfig& cfg);

/// Overlay keys of a JSON object onto `cfg`. Recognised keys mirror the CLI
/// flags: methods, N, n, runs, seed, pole_modulus, zero_modulus,
/// max_phase_gap, pairs, grid_size, low_order, burn_in, threads, timing, out,
/// jitter, refine.
void apply_json_config(ExperimentConfig& cfg, const std::string& text);

struct TrialRecord {
    int run_index = 0;
    Method method = Method::ME;
    bool ok = false;
    std::string error;
    double reconstruction_error = 0.0;
    double df = 0.0;
    std::optional<Hyperparameters> eta_hat;
    bool min_phase_verified = false;
    double max_root_modulus = 0.0;
    std::optional<int> chosen_n;
    double jitter = 0.0;
    double wall_time_ms = 0.0;
};

/// Boxplot-ready statistics over the successful records of one method.
/// Quartiles interpolate linearly between order statistics at (count-1)p;
/// outliers lie outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
struct MethodSummary {
    Method method = Method::ME;
    int count = 0;
    int failures = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    int outliers = 0;
    int non_min_phase = 0;
};

double quantile_sorted(const std::vector<double>& sorted, double p);

std::vector<MethodSummary> summarize(const std::vector<TrialRecord>& records, const std::vector<Method>& methods);

/// One dataset, every requested method, and its spectra on the shared grid.
struct TrialOutcome {
    std::vector<TrialRecord> records;
    std::map<Method, std::vector<double>> spectra;
};

TrialOutcome run_methods(const TimeSeries& y, const std::vector<double>& truth, int run_index,
                         const ExperimentConfig& cfg);

struct SingleTrialResult {
    std::vector<double> theta;
    std::vector<double> truth;
    TrialOutcome outcome;
};

/// Dataset from reference_model() with seed = master_seed.
SingleTrialResult run_single_trial(const ExperimentConfig& cfg);

struct MonteCarloResult {
    std::vector<TrialRecord> records;
    std::vector<MethodSummary> summary;
    int failed_records = 0;

    double failure_fraction() const;
};

/// Per-run seeds: trial = mix_seed(master, run); model from mix_seed(trial, 0),
/// noise from mix_seed(trial, 1). Records are ordered by (run, method)
/// regardless of how many threads executed the trials.
MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg);

struct FileEstimate {
    std::vector<EstimateResult> estimates;
    std::vector<double> theta;
    std::map<Method, std::vector<double>> spectra;
    int N = 0;
};

/// One-column CSV with an optional "y" header. Errors name the offending line.
TimeSeries read_series_csv(const std::filesystem::path& path);

FileEstimate estimate_series(const TimeSeries& y, const ExperimentConfig& cfg);
FileEstimate estimate_file(const ExperimentConfig& cfg, const std::filesystem::path& input);

// Writers. Every number is printed with 17 significant digits; column order
// is fixed (see README).
std::string format_double(double x);
void write_records_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& records, bool timing);
void write_summary_csv(const std::filesystem::path& path, const std::vector<MethodSummary>& summary);
void write_spectra_csv(const std::filesystem::path& path, const std::vector<double>& theta,
                       const std::vector<double>* truth, const std::vector<Method>& methods,
                       const std::map<Method, std::vector<double>>& spectra);
std::string estimate_to_json(const FileEstimate& result, const ExperimentConfig& cfg);

/// Run the experiment named in cfg.experiment and write its files under
/// cfg.output_path. Returns the process exit code (0 or 3 for too many failed
/// Monte Carlo trials).
int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& input = {});

}  // namespace kme
