#pragma once

#include "tomolab/linsys.hpp"
#include "tomolab/oracle.hpp"
#include "tomolab/ptm.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace tomolab {

struct PairPlan {
    int i = 0, j = 0;   // 1-based, i < j
    long long n = 1;    // repetitions of M_i M_j
    double p_pair = 0.0; // error rate used for sizing
};

struct DoubleMapPlan {
    std::vector<PairPlan> pairs;
};

// 21 pairs of 7 gates, n = floor(1 / (p_i + p_j)). The estimate p_hat is used unless it is not
// positive or differs from the hint sum by more than a factor 4, in which case the hints are.
// A source with recorded data dictates n.
DoubleMapPlan make_plan(const std::vector<double>& p_hat, const std::vector<double>& p_hints,
                        const MeasurementSource* src = nullptr);

// sum_{q<n} E^q by binary doubling: S(2m) = S(m) + E^m S(m).
Mat3 geometric_sum(const Mat3& e, long long n);

struct SingularTriplet {
    double value = 0.0;
    Vec3 u = Vec3::Zero(); // left
    Vec3 v = Vec3::Zero(); // right, so S = value u v^T + ...
};
SingularTriplet largest_singular_triplet(const Mat3& s);

// Stacked rows of dB X - X dB (row-major vec of dB), 9 per block.
Eigen::MatrixXd commutator_system(const std::vector<Mat3>& blocks);

struct DegenerateProbeSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AlignOptions {
    int iterations = 20;
    bool strict_rhs = false; // rhs Y instead of Y - X
    double rcond = 1e-10;
};

struct AlignResult {
    Mat3 B = Mat3::Identity();           // maps the measurement frame onto the stage-one frame
    Eigen::VectorXd singular_values;      // of the first commutator system
    int rank = 0;
    double commutator_residual = 0.0;    // max |B X B^-1 - Y| after the last pass
};

// Solves dB X - X dB = Y - X by pseudoinverse and composes B <- (I + dB) B. Later passes
// re-linearise around B X B^-1; the first pass is the plain first-order solve.
AlignResult gauge_align(const std::vector<Mat3>& measured, const std::vector<Mat3>& target,
                        const AlignOptions& opt = {});

struct NonunitalOptions {
    AlignOptions align;
    bool affine_correction = true;
    int truncate = 3;
};

struct PairData {
    PairPlan plan;
    Mat3 X = Mat3::Identity(); // measured unital block of (M_i M_j)^n
    Vec3 k_measured = Vec3::Zero();
    Vec3 k_aligned = Vec3::Zero();
    Mat3 Y = Mat3::Identity(); // (E_i E_j)^n from stage one
    SingularTriplet top;       // of the geometric sum of E_i E_j
};

struct NonunitalResult {
    std::vector<Vec3> k;
    std::vector<PairData> pairs;
    AlignResult align;
    Vec3 offset = Vec3::Zero(); // fitted frame offset removed from the aligned vectors
    SolveResult solve;
};

// Frame offset a from the aligned vectors: projected onto the weakly amplified directions of
// each geometric sum, k_aligned = (I - Y) a + (amplified part). Returns 0 if no direction is weak.
Vec3 estimate_frame_offset(const std::vector<PairData>& pairs, const std::vector<Mat3>& e_hat);

// Row for pair (i,j): v1 at gate i, v1^T E_i at gate j; rhs = u1 . k / s1.
LinearSystem build_nonunital_system(const std::vector<PairData>& pairs, const std::vector<Mat3>& e_hat);

// Measures the 21 double maps, aligns the frame, and solves for every k.
NonunitalResult reconstruct_nonunital(MeasurementSource& src, const std::vector<Mat3>& e_hat,
                                      const DoubleMapPlan& plan, const NonunitalOptions& opt = {},
                                      int threads = 1);

// "pair" rows: i, j, n, lambda_max, aligned k; "gate" rows: reconstructed k per gate.
std::string nonunital_csv(const NonunitalResult& r);

} // namespace tomolab
