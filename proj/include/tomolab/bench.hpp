#pragma once

#include "tomolab/ptm.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace tomolab {

// T = [[1, 0], [a, scale * B]]; the reconstruction is compared as T M^r T^-1.
struct GaugeTransform {
    Vec3 a = Vec3::Zero();
    Mat3 B = Mat3::Identity();
    double scale = 1.0;
    bool warn = false;               // |B - I| > 0.5, first-order fit is doubtful
    bool identity_kept = false;      // the fit did not beat T = I and was discarded
    Eigen::VectorXd singular_values; // of the first commutator system
    int rank = 0;
    Mat4 matrix() const;
};

struct GaugeFitOptions {
    int iterations = 10;
    bool strict_rhs = false; // rhs E instead of E - E^r
    bool fit_scale = true;   // fit the overall scale of B together with a
};

// Aligns reconstructed maps to the truth. B from dB E^r - E^r dB = E - E^r (repeated around the
// current B), then a and the scale from B k^r + a - B E^r B^-1 a = k. Falls back to the identity
// when that gives a smaller total distance.
GaugeTransform fit_gauge(const std::vector<Ptm>& reconstructed, const std::vector<Ptm>& truth,
                         const GaugeFitOptions& opt = {});

struct DistanceRow {
    int gate = 0;      // 1-based
    double D = 0.0;    // |M - M^i|_2
    double D_r = 0.0;  // |T M^r T^-1 - M|_2
};

std::vector<DistanceRow> distances(const std::vector<Ptm>& reconstructed, const Mat4& t, const std::vector<Ptm>& truth,
                                   const std::vector<Ptm>& ideals);

struct InsufficientSpan : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

// Least squares through (log10 D, log10 D_r). Needs at least 10 points spanning 2 decades in D;
// rows with a non-positive distance are skipped.
ScalingFit fit_scaling(const std::vector<DistanceRow>& rows);

// Spearman rank correlation, ties averaged.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

} // namespace tomolab
