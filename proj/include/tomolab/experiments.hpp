#pragma once

#include "tomolab/bench.hpp"
#include "tomolab/config.hpp"
#include "tomolab/ptm.hpp"
#include "tomolab/rng.hpp"

#include <string>
#include <vector>

namespace tomolab {

// Default error-rate ranges.
inline constexpr double kStudyPLow = 1e-6, kStudyPHigh = 1e-2;
inline constexpr double kBenchPLow = 1e-6, kBenchPHigh = 1e-3;

// Trace-variance study over noisy versions of I, Z and S. Trial t uses one generator and one p
// for all three ideals, so the gates are compared at matched noise.
struct TraceVarianceGate {
    std::string gate; // "I", "Z", "S"
    int trial = 0;
    double p = 0.0;
    int modulus = 1;
    EigenTriple lambda{};
    long long n_opt = 0;
    double var_opt = 0.0; // Var(Lambda) at n_opt
    double mc_var = -1.0; // Monte Carlo variance at n_opt, -1 when disabled
    std::vector<std::pair<long long, double>> curve; // (n, Var)
};

struct TraceVarianceData {
    std::vector<TraceVarianceGate> gates;
    std::string csv;         // curves
    std::string summary_csv; // one row per gate
};

TraceVarianceData run_trace_variance(const ExperimentConfig& cfg);

// Sample variance of Lambda at fixed n: noisy power sums, one tracking step from the true
// eigenvalues. Draws that fail to track are discarded; the count is returned in `failures`.
double monte_carlo_trace_variance(const EigenTriple& lambda, long long n, double sigma, int samples, Rng& rng,
                                  int* failures = nullptr);

struct SingularValueGate {
    int index = 0;
    int ideal_id = 0;
    double p = 0.0;
    long long n_probe = 0;      // floor(4/p)
    double scaled_at_probe = 0; // lambda_max * p at n_probe
    std::vector<std::pair<long long, double>> curve; // (n, lambda_max)
};

struct SingularValueData {
    std::vector<SingularValueGate> gates;
    std::string csv;
};

SingularValueData run_singular_values(const ExperimentConfig& cfg);

struct BenchmarkPoint {
    int set = 0;
    int gate = 0;
    double p = 0.0;
    double D = 0.0;
    double D_r = 0.0;
};

struct BenchmarkData {
    std::vector<BenchmarkPoint> points;
    std::vector<std::pair<int, std::string>> failures; // set index, message
    bool fitted = false;
    ScalingFit fit;
    double spearman_ratio = 0.0; // Spearman(D_r / D, D)
    std::string fit_error;
    std::string csv;     // points
    std::string fit_csv; // fit line and summary
};

BenchmarkData run_benchmark(const ExperimentConfig& cfg);

struct ValidationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<ValidationCheck> run_validation(const ExperimentConfig& cfg);

} // namespace tomolab
