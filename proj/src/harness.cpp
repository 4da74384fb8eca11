#include "kme/harness.hpp"

#include "kme/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace kme {

PipelineConfig ExperimentConfig::pipeline() const {
    PipelineConfig p;
    p.n = n;
    p.low_order = low_order;
    p.search = search;
    p.jitter = jitter;
    return p;
}

void validate(const ExperimentConfig& cfg) {
    auto usage = [](const std::string& what) { fail(ErrorKind::InvalidConfig, what); };
    if (cfg.methods.empty()) usage("at least one method is required");
    if (cfg.n < 1) usage("n must be >= 1");
    if (cfg.experiment != Experiment::EstimateFile && cfg.n >= cfg.N) {
        usage("n=" + std::to_string(cfg.n) + " must be < N=" + std::to_string(cfg.N));
    }
    if (cfg.runs < 1) usage("runs must be >= 1");
    if (cfg.grid_size < 2) usage("grid_size must be >= 2");
    if (cfg.low_order < 0) usage("low_order must be >= 0");
    if (cfg.burn_in < 0) usage("burn_in must be >= 0");
}

void apply_json_config(ExperimentConfig& cfg, const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("config JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorKind::Parse, "config JSON must be an object");
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "methods") {
                cfg.methods.clear();
                std::vector<std::string> names;
                if (value.is_string()) {
                    std::stringstream ss(value.get<std::string>());
                    for (std::string item; std::getline(ss, item, ',');) names.push_back(item);
                } else {
                    names = value.get<std::vector<std::string>>();
                }
                for (const auto& name : names) cfg.methods.push_back(parse_method(name));
            } else if (key == "N") {
                cfg.N = value.get<int>();
            } else if (key == "n") {
                cfg.n = value.get<int>();
            } else if (key == "runs") {
                cfg.runs = value.get<int>();
            } else if (key == "seed") {
                cfg.master_seed = value.get<std::uint64_t>();
            } else if (key == "pole_modulus") {
                cfg.pole_modulus = value.get<double>();
            } else if (key == "zero_modulus") {
                cfg.zero_modulus = value.get<double>();
            } else if (key == "max_phase_gap") {
                cfg.max_phase_gap = value.get<double>();
            } else if (key == "pairs") {
                cfg.pairs = value.get<int>();
            } else if (key == "grid_size") {
                cfg.grid_size = value.get<int>();
            } else if (key == "low_order") {
                cfg.low_order = value.get<int>();
            } else if (key == "burn_in") {
                cfg.burn_in = value.get<int>();
            } else if (key == "threads") {
                cfg.threads = value.get<int>();
            } else if (key == "timing") {
                cfg.timing = value.get<bool>();
            } else if (key == "out") {
                cfg.output_path = value.get<std::string>();
            } else if (key == "jitter") {
                cfg.jitter.allow_repair = value.get<bool>();
            } else if (key == "refine") {
                cfg.search.refine = value.get<bool>();
            } else {
                fail(ErrorKind::Parse, "unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("config JSON: ") + e.what());
    }
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) fail(ErrorKind::InvalidData, "quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<MethodSummary> summarize(const std::vector<TrialRecord>& records, const std::vector<Method>& methods) {
    std::vector<MethodSummary> out;
    for (Method m : methods) {
        MethodSummary s;
        s.method = m;
        std::vector<double> errors;
        for (const auto& r : records) {
            if (r.method != m) continue;
            if (!r.ok) {
                ++s.failures;
                continue;
            }
            errors.push_back(r.reconstruction_error);
            if (!r.min_phase_verified) ++s.non_min_phase;
        }
        s.count = static_cast<int>(errors.size());
        if (!errors.empty()) {
            std::sort(errors.begin(), errors.end());
            s.min = errors.front();
            s.max = errors.back();
            s.q1 = quantile_sorted(errors, 0.25);
            s.median = quantile_sorted(errors, 0.5);
            s.q3 = quantile_sorted(errors, 0.75);
            const double iqr = s.q3 - s.q1;
            const double lo = s.q1 - 1.5 * iqr;
            const double hi = s.q3 + 1.5 * iqr;
            s.outliers = static_cast<int>(std::count_if(errors.begin(), errors.end(),
                                                        [&](double e) { return e < lo || e > hi; }));
        }
        out.push_back(s);
    }
    return out;
}

TrialOutcome run_methods(const TimeSeries& y, const std::vector<double>& truth, int run_index,
                         const ExperimentConfig& cfg) {
    TrialOutcome out;
    const PipelineConfig pipeline = cfg.pipeline();
    for (Method m : cfg.methods) {
        TrialRecord rec;
        rec.run_index = run_index;
        rec.method = m;
        const auto start = std::chrono::steady_clock::now();
        try {
            const EstimateResult est = estimate(m, y, pipeline);
            std::vector<double> spectrum = eval_spectrum(est.b_hat, cfg.grid_size).values;
            rec.df = est.df;
            rec.eta_hat = est.eta_hat;
            rec.min_phase_verified = est.min_phase_verified;
            rec.max_root_modulus = est.max_root_modulus;
            rec.chosen_n = est.chosen_n;
            rec.jitter = est.jitter_used;
            if (!truth.empty()) rec.reconstruction_error = reconstruction_error(spectrum, truth);
            rec.ok = true;
            out.spectra.emplace(m, std::move(spectrum));
        } catch (const Error& e) {
            rec.error = std::string(to_string(e.kind())) + ": " + e.what();
        }
        rec.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.records.push_back(std::move(rec));
    }
    return out;
}

SingleTrialResult run_single_trial(const ExperimentConfig& cfg) {
    validate(cfg);
    const ArmaModel model = reference_model();
    const TimeSeries y = generate(model, cfg.N, cfg.master_seed, cfg.burn_in);
    SingleTrialResult r;
    r.theta = frequency_grid(cfg.grid_size);
    r.truth = eval_spectrum(model, cfg.grid_size).values;
    r.outcome = run_methods(y, r.truth, 1, cfg);
    return r;
}

double MonteCarloResult::failure_fraction() const {
    return records.empty() ? 0.0 : static_cast<double>(failed_records) / static_cast<double>(records.size());
}

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<std::vector<TrialRecord>> per_trial(cfg.runs);

    auto run_one = [&](int i) {
        const int run = i + 1;
        const std::uint64_t trial_seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(run));
        std::vector<TrialRecord> records;
        try {
            const ArmaModel model =
                random_arma(mix_seed(trial_seed, 0), cfg.pole_modulus, cfg.zero_modulus, cfg.pairs, cfg.max_phase_gap);
            const TimeSeries y = generate(model, cfg.N, mix_seed(trial_seed, 1), cfg.burn_in);
            const std::vector<double> truth = eval_spectrum(model, cfg.grid_size).values;
            records = run_methods(y, truth, run, cfg).records;
        } catch (const Error& e) {
            records.clear();
            for (Method m : cfg.methods) {
                TrialRecord rec;
                rec.run_index = run;
                rec.method = m;
                rec.error = std::string(to_string(e.kind())) + ": " + e.what();
                records.push_back(std::move(rec));
            }
        }
        per_trial[i] = std::move(records);
    };

    int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.runs);
    if (workers == 1) {
        for (int i = 0; i < cfg.runs; ++i) run_one(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next++; i < cfg.runs; i = next++) run_one(i);
            });
        }
    }

    MonteCarloResult result;
    for (auto& trial : per_trial) {
        for (auto& rec : trial) {
            if (!rec.ok) ++result.failed_records;
            result.records.push_back(std::move(rec));
        }
    }
    result.summary = summarize(result.records, cfg.methods);
    return result;
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path.string() + "'");
    std::vector<double> samples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        const std::string field = line.substr(first, last - first + 1);
        if (samples.empty() && line_no == 1 && field == "y") continue;
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != field.size() || !std::isfinite(value)) {
            fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": not a finite number: '" + field + "'");
        }
        samples.push_back(value);
    }
    if (samples.empty()) fail(ErrorKind::Parse, path.string() + ": no samples");
    if (samples.size() < 2) fail(ErrorKind::Parse, path.string() + ": need at least 2 samples");
    return TimeSeries(std::move(samples));
}

FileEstimate estimate_series(const TimeSeries& y, const ExperimentConfig& cfg) {
    validate(cfg);
    const int N = static_cast<int>(y.size());
    if (N <= cfg.n) {
        fail(ErrorKind::InvalidOrder, "series has N=" + std::to_string(N) + " samples; need N > n=" + std::to_string(cfg.n));
    }
    FileEstimate out;
    out.N = N;
    out.theta = frequency_grid(cfg.grid_size);
    const PipelineConfig pipeline = cfg.pipeline();
    for (Method m : cfg.methods) {
        EstimateResult est = estimate(m, y, pipeline);
        out.spectra.emplace(m, eval_spectrum(est.b_hat, cfg.grid_size).values);
        out.estimates.push_back(std::move(est));
    }
    return out;
}

FileEstimate estimate_file(const ExperimentConfig& cfg, const std::filesystem::path& input) {
    return estimate_series(read_series_csv(input), cfg);
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidData, "cannot write '" + path.string() + "'");
    return out;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

void write_records_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& records, bool timing) {
    std::ofstream out = open_output(path);
    out << "run,method,status,reconstruction_error,df,lambda,beta,min_phase,max_root_modulus,chosen_n,jitter";
    if (timing) out << ",wall_time_ms";
    out << ",error\n";
    for (const auto& r : records) {
        out << r.run_index << ',' << to_string(r.method) << ',' << (r.ok ? "ok" : "failed") << ',';
        if (r.ok) {
            out << format_double(r.reconstruction_error) << ',' << format_double(r.df) << ',';
            if (r.eta_hat) {
                out << format_double(r.eta_hat->lambda) << ',' << format_double(r.eta_hat->beta) << ',';
            } else {
                out << ",,";
            }
            out << (r.min_phase_verified ? "true" : "false") << ',' << format_double(r.max_root_modulus) << ',';
            if (r.chosen_n) out << *r.chosen_n;
            out << ',' << format_double(r.jitter);
        } else {
            out << ",,,,,,,";
        }
        if (timing) out << ',' << format_double(r.wall_time_ms);
        out << ',' << csv_quote(r.error) << '\n';
    }
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<MethodSummary>& summary) {
    std::ofstream out = open_output(path);
    out << "method,count,failures,min,q1,median,q3,max,outliers,non_min_phase\n";
    for (const auto& s : summary) {
        out << to_string(s.method) << ',' << s.count << ',' << s.failures << ',';
        if (s.count > 0) {
            out << format_double(s.min) << ',' << format_double(s.q1) << ',' << format_double(s.median) << ','
                << format_double(s.q3) << ',' << format_double(s.max);
        } else {
            out << ",,,,";
        }
        out << ',' << s.outliers << ',' << s.non_min_phase << '\n';
    }
}

void write_spectra_csv(const std::filesystem::path& path, const std::vector<double>& theta,
                       const std::vector<double>* truth, const std::vector<Method>& methods,
                       const std::map<Method, std::vector<double>>& spectra) {
    std::vector<const std::vector<double>*> columns;
    std::ofstream out = open_output(path);
    out << "theta";
    if (truth) out << ",truth";
    for (Method m : methods) {
        auto it = spectra.find(m);
        if (it == spectra.end()) continue;
        out << ',' << to_string(m);
        columns.push_back(&it->second);
    }
    out << '\n';
    for (std::size_t k = 0; k < theta.size(); ++k) {
        out << format_double(theta[k]);
        if (truth) out << ',' << format_double((*truth)[k]);
        for (const auto* col : columns) out << ',' << format_double((*col)[k]);
        out << '\n';
    }
}

std::string estimate_to_json(const FileEstimate& result, const ExperimentConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["N"] = result.N;
    doc["n"] = cfg.n;
    doc["low_order"] = cfg.low_order;
    doc["estimates"] = nlohmann::ordered_json::array();
    for (const auto& est : result.estimates) {
        nlohmann::ordered_json e;
        e["method"] = to_string(est.method);
        e["b"] = std::vector<double>(est.b_hat.coeffs().data(), est.b_hat.coeffs().data() + est.b_hat.coeffs().size());
        if (est.eta_hat) {
            e["lambda"] = est.eta_hat->lambda;
            e["beta"] = est.eta_hat->beta;
        } else {
            e["lambda"] = nullptr;
            e["beta"] = nullptr;
        }
        e["df"] = est.df;
        e["min_phase"] = est.min_phase_verified;
        e["max_root_modulus"] = est.max_root_modulus;
        e["jitter"] = est.jitter_used;
        if (est.chosen_n) {
            e["chosen_n"] = *est.chosen_n;
        } else {
            e["chosen_n"] = nullptr;
        }
        if (est.objective_value) {
            e["neg_log_marginal"] = *est.objective_value;
        } else {
            e["neg_log_marginal"] = nullptr;
        }
        doc["estimates"].push_back(std::move(e));
    }
    return doc.dump(2) + "\n";
}

int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& input) {
    validate(cfg);
    const auto& dir = cfg.output_path;
    switch (cfg.experiment) {
        case Experiment::SingleTrial: {
            const SingleTrialResult r = run_single_trial(cfg);
            write_spectra_csv(dir / "spectra.csv", r.theta, &r.truth, cfg.methods, r.outcome.spectra);
            write_records_csv(dir / "records.csv", r.outcome.records, cfg.timing);
            return 0;
        }
        case Experiment::MonteCarlo: {
            const MonteCarloResult r = run_monte_carlo(cfg);
            write_records_csv(dir / "records.csv", r.records, cfg.timing);
            write_summary_csv(dir / "summary.csv", r.summary);
            return r.failure_fraction() > 0.1 ? 3 : 0;
        }
        case Experiment::EstimateFile: {
            const FileEstimate r = estimate_file(cfg, input);
            {
                std::ofstream out = open_output(dir / "estimate.json");
                out << estimate_to_json(r, cfg);
            }
            write_spectra_csv(dir / "spectrum.csv", r.theta, nullptr, cfg.methods, r.spectra);
            return 0;
        }
    }
    return 0;
}

}  // namespace kme
