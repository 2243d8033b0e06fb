#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace tomolab {

struct LinearSystem {
    Eigen::MatrixXd coefficients;
    Eigen::VectorXd rhs;
    std::vector<std::string> labels; // one per unknown
    Eigen::VectorXd singular_values; // filled by solve
};

struct Truncation {
    double relative = 1e-10; // singular values below relative * max are dropped
    int drop_smallest = 0;   // additionally drop this many of the smallest
};

struct SolveResult {
    Eigen::VectorXd x;
    Eigen::VectorXd singular_values; // descending
    int rank = 0;                    // singular values kept
    double condition = 0.0;          // max / smallest kept
    double residual = 0.0;           // |A x - b|
};

// Minimum-norm least squares via SVD. Throws std::invalid_argument on an all-zero matrix or
// mismatched sizes.
SolveResult pinv_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Truncation& t = {});
SolveResult pinv_solve(LinearSystem& sys, const Truncation& t = {});

// Count of singular values above rel * max.
int numerical_rank(const Eigen::VectorXd& singular_values, double rel);

} // namespace tomolab
