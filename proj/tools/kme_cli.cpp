// Command-line front end: single-trial and Monte Carlo experiments, and
// spectral estimation of user-supplied series.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 too many failed trials.

#include "kme/errors.hpp"
#include "kme/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

struct Flags {
    std::string config;
    std::string methods;
    int N = 0;
    int n = 0;
    int runs = 0;
    std::uint64_t seed = 0;
    double pole_modulus = 0.0;
    double zero_modulus = 0.0;
    double max_phase_gap = 0.0;
    int pairs = 0;
    int grid_size = 0;
    int low_order = 0;
    int burn_in = 0;
    int threads = 0;
    bool timing = false;
    bool no_jitter = false;
    bool no_refine = false;
    std::string out;
    std::string input;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON file with default settings (flags override it)");
    cmd->add_option("--methods", f.methods, "Comma list from me,me-di,me-tc,pem-di,pem-tc");
    cmd->add_option("-n,--order", f.n, "AR order for kernel methods / BIC search bound (default 50)");
    cmd->add_option("--grid-size", f.grid_size, "Frequency grid points (default 2048)");
    cmd->add_option("--low-order", f.low_order, "AR order of the preliminary b0 fit (default 4)");
    cmd->add_flag("--no-jitter", f.no_jitter, "Fail instead of adding diagonal jitter to a non-PD covariance");
    cmd->add_flag("--no-refine", f.no_refine, "Skip Nelder-Mead refinement after the hyperparameter grid");
    cmd->add_option("--out", f.out, "Output directory (default ./results)");
}

void add_simulation(CLI::App* cmd, Flags& f) {
    cmd->add_option("-N,--samples", f.N, "Samples per dataset (default 500)");
    cmd->add_option("--seed", f.seed, "Master seed (default 42)");
    cmd->add_option("--burn-in", f.burn_in, "Discarded start-up samples (default 2000)");
    cmd->add_flag("--timing", f.timing, "Add wall_time_ms to records.csv (breaks byte reproducibility)");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kme::Error(kme::ErrorKind::InvalidConfig, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

kme::ExperimentConfig build_config(const CLI::App* cmd, const Flags& f, kme::Experiment experiment) {
    kme::ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (!f.config.empty()) kme::apply_json_config(cfg, read_text(f.config));
    auto given = [&](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };

    if (given("--methods")) {
        cfg.methods.clear();
        std::stringstream ss(f.methods);
        for (std::string item; std::getline(ss, item, ',');) cfg.methods.push_back(kme::parse_method(item));
    }
    if (given("--order")) cfg.n = f.n;
    if (given("--grid-size")) cfg.grid_size = f.grid_size;
    if (given("--low-order")) cfg.low_order = f.low_order;
    if (f.no_jitter) cfg.jitter = kme::JitterPolicy::forbid();
    if (f.no_refine) cfg.search.refine = false;
    if (given("--out")) cfg.output_path = f.out;
    if (given("--samples")) cfg.N = f.N;
    if (given("--seed")) cfg.master_seed = f.seed;
    if (given("--burn-in")) cfg.burn_in = f.burn_in;
    if (f.timing) cfg.timing = true;
    if (given("--runs")) cfg.runs = f.runs;
    if (given("--pole-modulus")) cfg.pole_modulus = f.pole_modulus;
    if (given("--zero-modulus")) cfg.zero_modulus = f.zero_modulus;
    if (given("--max-phase-gap")) cfg.max_phase_gap = f.max_phase_gap;
    if (given("--pairs")) cfg.pairs = f.pairs;
    if (given("--threads")) cfg.threads = f.threads;
    kme::validate(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel-regularized maximum entropy spectral estimation"};
    app.require_subcommand(1);
    Flags f;

    CLI::App* single = app.add_subcommand("single", "One dataset from the two-pole reference process");
    add_common(single, f);
    add_simulation(single, f);

    CLI::App* mc = app.add_subcommand("montecarlo", "Repeated trials on random ARMA processes");
    add_common(mc, f);
    add_simulation(mc, f);
    mc->add_option("--runs", f.runs, "Number of trials (default 100)");
    mc->add_option("--pole-modulus", f.pole_modulus, "Pole modulus of random models (default 0.98)");
    mc->add_option("--zero-modulus", f.zero_modulus, "Zero modulus of random models (default 0.85)");
    mc->add_option("--max-phase-gap", f.max_phase_gap, "Max |zero phase - pole phase| (default 0.06)");
    mc->add_option("--pairs", f.pairs, "Conjugate pole/zero pairs per model (default 3)");
    mc->add_option("--threads", f.threads, "Worker threads (default: hardware concurrency)");

    CLI::App* est = app.add_subcommand("estimate", "Estimate the spectrum of a one-column CSV series");
    add_common(est, f);
    est->add_option("input", f.input, "CSV file with one sample per line (optional 'y' header)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    CLI::App* cmd = single->parsed() ? single : mc->parsed() ? mc : est;
    const kme::Experiment experiment = cmd == single ? kme::Experiment::SingleTrial
                                       : cmd == mc   ? kme::Experiment::MonteCarlo
                                                     : kme::Experiment::EstimateFile;
    kme::ExperimentConfig cfg;
    try {
        cfg = build_config(cmd, f, experiment);
    } catch (const kme::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        const int code = kme::run_experiment(cfg, f.input);
        if (code != 0) std::cerr << "error: more than 10% of trials failed\n";
        return code;
    } catch (const kme::Error& e) {
        std::cerr << "error: " << kme::to_string(e.kind()) << ": " << e.what() << '\n';
        return e.kind() == kme::ErrorKind::InvalidConfig ? kUsage : kData;
    }
}
