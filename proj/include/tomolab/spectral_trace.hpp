#pragma once

#include "tomolab/oracle.hpp"
#include "tomolab/ptm.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace tomolab {

struct TraceSchedule {
    int period = 1;
    std::vector<long long> values; // strictly increasing, each = 1 mod period
    int k_max = 0;
};

// n = m * floor(2^k / m) + 1 for k = 0..floor(log2(0.4 / p)), deduplicated; 1 is prepended for
// m = 1. A positive cap drops values above it (the first value is always kept).
TraceSchedule build_schedule(int m, double p, long long cap = 0);

// Roots of x^3 - e1 x^2 + e2 x - e3 from power sums t_n, t_2n, t_3n (Newton's identities),
// computed as companion-matrix eigenvalues.
EigenTriple power_sums_to_candidates(double tn, double t2n, double t3n);

struct TrackingAmbiguity : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TrackingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrackStep {
    long long n = 1;
    double tn = 0, t2n = 0, t3n = 0; // power sums of the unital eigenvalues (trace minus 1)
    EigenTriple mu{};
    EigenTriple lambda{};
    double Lambda = 0.0;
    double radius = 0.0; // confidence radius of lambda after this step
};

struct TrackState {
    EigenTriple current{};
    std::vector<TrackStep> history;
    double radius = 0.0; // confidence radius of `current`; 0 disables the ambiguity test
};

// Resolves the n-th root branches of mu against state.current, choosing the best of the six
// assignments, symmetrises under conjugation, and appends to the history. The symmetrisation
// residual may not exceed max(1e-6, tolerance). The new step's radius is left at 0;
// estimate_trace fills it in.
TrackState track_step(const TrackState& state, const EigenTriple& mu, long long n, double tolerance = 0.0);

enum class VarianceFormula { General, PairLimit, TripleLimit, ClusterSeries, Singular };
const char* to_string(VarianceFormula f);

struct VarianceResult {
    double variance = 0.0;
    std::array<double, 3> gradient{}; // dLambda/dt_n, dLambda/dt_2n, dLambda/dt_3n
    VarianceFormula formula = VarianceFormula::General;
    bool near_degenerate = false; // general formula with |prod of root gaps| < 1e-6
};

// Var(Lambda) = sum_l (dLambda/dt_l)^2 var_t. Closed forms by degeneracy class: general when the
// roots mu = lambda^n are separated, pair limit when exactly one pair is within 1e-6, triple
// limit when all are within 1e-6. A tight three-way cluster (all gaps below 1e-3) is evaluated
// through divided differences expanded about the cluster centre.
VarianceResult variance_model(const EigenTriple& lambda, long long n, double var_t);

// Gradient of Lambda = 1 + sum lambda through interpolation of lambda/(n mu) at the roots
// (Vandermonde solve). Reference path for the closed forms.
std::array<double, 3> interpolation_gradient(const EigenTriple& lambda, long long n);

// Standard deviation of each tracked eigenvalue at step n for unit trace noise.
std::array<double, 3> eigenvalue_std(const EigenTriple& lambda, long long n);

// Log-spaced grid of n = modulus * l + 1 values up to n_max.
std::vector<long long> log_grid(long long n_max, int points_per_decade, int modulus = 1);

// argmin of variance_model over the grid, refined on allowed values between the neighbours of
// the coarse minimum.
long long optimal_n(const EigenTriple& lambda, double var_t, const std::vector<long long>& grid,
                    int modulus = 1);

struct TraceOptions {
    long long schedule_cap = 0;
    double collision_tol = 1e-3;
    bool variance_skip = true;    // skip steps that cannot shrink the confidence radius
    bool select_min_variance = true; // report Lambda from the lowest predicted-variance step
    double confidence_sigmas = 4.0;
    int period_cap = 64;
};

struct TraceEstimate {
    double Lambda = 0.0;
    EigenTriple lambda{};
    long long n_used = 0;
    double predicted_var = 0.0;
    std::vector<TrackStep> history;
    std::vector<long long> skipped;
    long long stopped_at = 0; // step whose roots failed the conjugation check; 0 if none
    TraceSchedule schedule;
};

// Runs the schedule for the sequence `ids`, querying Tr(M^l) at l = n, 2n, 3n (one query per l).
// With noise, a step after the first whose roots fail the conjugation check ends the schedule
// (stopped_at); the earlier steps are kept.
TraceEstimate estimate_trace(MeasurementSource& src, const std::vector<int>& ids, const Ptm& ideal_product,
                             double p_hint, const TraceOptions& opt = {});

std::string trace_diagnostics_csv(const TraceEstimate& est, double var_t);

} // namespace tomolab
