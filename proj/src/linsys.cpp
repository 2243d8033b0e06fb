#include "tomolab/linsys.hpp"

#include <Eigen/SVD>

#include <stdexcept>

namespace tomolab {

SolveResult pinv_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Truncation& t) {
    if (a.rows() != b.size()) throw std::invalid_argument("pinv_solve: row count does not match rhs");
    if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("pinv_solve: coefficient matrix is zero");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const Eigen::Index ns = s.size();
    Eigen::Index keep = 0;
    while (keep < ns && s(keep) > t.relative * s(0)) ++keep;
    keep = std::max<Eigen::Index>(0, std::min(keep, ns - t.drop_smallest));

    Eigen::VectorXd utb = svd.matrixU().leftCols(keep).transpose() * b;
    for (Eigen::Index i = 0; i < keep; ++i) utb(i) /= s(i);

    SolveResult r;
    r.x = svd.matrixV().leftCols(keep) * utb;
    r.singular_values = s;
    r.rank = int(keep);
    r.condition = keep > 0 ? s(0) / s(keep - 1) : 0.0;
    r.residual = (a * r.x - b).norm();
    return r;
}

SolveResult pinv_solve(LinearSystem& sys, const Truncation& t) {
    SolveResult r = pinv_solve(sys.coefficients, sys.rhs, t);
    sys.singular_values = r.singular_values;
    return r;
}

int numerical_rank(const Eigen::VectorXd& s, double rel) {
    if (s.size() == 0) return 0;
    int k = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel * s(0)) ++k;
    return k;
}

} // namespace tomolab
