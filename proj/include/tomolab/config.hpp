#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace tomolab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value file, '#' comments. Keys:
//   seed, sigma, p_min, p_max, sets, schedule_cap, out, strict_paper_rhs, iterate,
//   threads, trials, gates, mc_samples, input
struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    double sigma = 0.01;
    std::optional<double> p_min, p_max; // command-specific defaults when unset
    int num_gate_sets = 15;
    long long schedule_cap = 0;
    std::string output_dir = ".";
    bool strict_paper_rhs = false;
    bool iterate_unital = false;
    int threads = 0;       // 0: hardware, capped by PTM_TOMOLAB_THREADS
    int trials = 20;       // random gates per ideal in trace-variance
    int gates = 30;        // random gates in singular-values
    int mc_samples = 200;  // Monte Carlo cross-check draws for trace-variance, 0 disables
    std::string input;     // gate-set or estimates file for reconstruct

    double p_low(double fallback) const { return p_min.value_or(fallback); }
    double p_high(double fallback) const { return p_max.value_or(fallback); }
};

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

// Throws ConfigError: sigma < 0, p range empty or outside (0, 0.5), sets < 1, ...
void validate(const ExperimentConfig& cfg, double default_p_low, double default_p_high);

// Canonical key=value text of every setting that affects results (output_dir and threads excluded).
std::string canonical(const ExperimentConfig& cfg, double default_p_low, double default_p_high);
std::uint64_t config_hash(const ExperimentConfig& cfg, double default_p_low, double default_p_high);

} // namespace tomolab
