#include "tomolab/nonunital.hpp"

#include "tomolab/csv.hpp"
#include "tomolab/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace tomolab {

DoubleMapPlan make_plan(const std::vector<double>& p_hat, const std::vector<double>& p_hints,
                        const MeasurementSource* src) {
    if (p_hat.size() != p_hints.size()) throw std::invalid_argument("make_plan: p_hat and hints differ in length");
    DoubleMapPlan plan;
    const int g = int(p_hat.size());
    for (int i = 0; i < g; ++i)
        for (int j = i + 1; j < g; ++j) {
            PairPlan pp{i + 1, j + 1, 1, 0.0};
            const double est = p_hat[i] + p_hat[j];
            const double hint = p_hints[i] + p_hints[j];
            pp.p_pair = est;
            if (!(est > 0.0) || (hint > 0.0 && (est > 4.0 * hint || 4.0 * est < hint))) pp.p_pair = hint;
            if (pp.p_pair > 0.0) pp.n = std::max<long long>(1, (long long)std::floor(1.0 / pp.p_pair));
            if (src) {
                if (auto n = src->ptm_repetitions({pp.i, pp.j})) pp.n = *n;
            }
            plan.pairs.push_back(pp);
        }
    return plan;
}

Mat3 geometric_sum(const Mat3& e, long long n) {
    if (n < 1) throw std::invalid_argument("geometric_sum: n must be at least 1");
    // Invariant: result = S(done), prefix = E^done; block_sum = S(2^b), block_pow = E^(2^b).
    Mat3 result = Mat3::Zero(), prefix = Mat3::Identity();
    Mat3 block_sum = Mat3::Identity(), block_pow = e;
    while (n) {
        if (n & 1) {
            result += prefix * block_sum;
            prefix = prefix * block_pow;
        }
        n >>= 1;
        if (n) {
            block_sum = block_sum + block_pow * block_sum;
            block_pow = block_pow * block_pow;
        }
    }
    return result;
}

SingularTriplet largest_singular_triplet(const Mat3& s) {
    Eigen::JacobiSVD<Mat3> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SingularTriplet t;
    t.value = svd.singularValues()(0);
    t.u = svd.matrixU().col(0);
    t.v = svd.matrixV().col(0);
    // Sign convention: largest |component| of v positive.
    Eigen::Index idx;
    t.v.cwiseAbs().maxCoeff(&idx);
    if (t.v(idx) < 0) {
        t.u = -t.u;
        t.v = -t.v;
    }
    return t;
}

Eigen::MatrixXd commutator_system(const std::vector<Mat3>& blocks) {
    Eigen::MatrixXd a(Eigen::Index(9 * blocks.size()), 9);
    const Mat3 id = Mat3::Identity();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Mat3& x = blocks[b];
        // vec_r(dB X) = (I kron X^T) vec_r(dB); vec_r(X dB) = (X kron I) vec_r(dB)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                for (int p = 0; p < 3; ++p)
                    for (int q = 0; q < 3; ++q)
                        a(Eigen::Index(9 * b) + 3 * r + c, 3 * p + q) = id(r, p) * x(q, c) - x(r, p) * id(q, c);
    }
    return a;
}

namespace {
Mat3 unvec(const Eigen::VectorXd& x) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = x(3 * r + c);
    return m;
}
} // namespace

AlignResult gauge_align(const std::vector<Mat3>& measured, const std::vector<Mat3>& target, const AlignOptions& opt) {
    if (measured.size() != target.size() || measured.empty())
        throw std::invalid_argument("gauge_align: need matching, non-empty block lists");
    AlignResult res;
    const int passes = std::max(1, opt.iterations);
    for (int it = 0; it < passes; ++it) {
        const Mat3 binv = res.B.inverse();
        std::vector<Mat3> xc;
        for (const auto& x : measured) xc.push_back(res.B * x * binv);
        Eigen::MatrixXd a = commutator_system(xc);
        Eigen::VectorXd rhs(a.rows());
        for (std::size_t b = 0; b < xc.size(); ++b) {
            const Mat3 d = opt.strict_rhs ? Mat3(target[b]) : Mat3(target[b] - xc[b]);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) rhs(Eigen::Index(9 * b) + 3 * r + c) = d(r, c);
        }
        const SolveResult s = pinv_solve(a, rhs, Truncation{opt.rcond, 0});
        if (it == 0) {
            res.singular_values = s.singular_values;
            res.rank = numerical_rank(s.singular_values, 1e-6);
            if (res.rank < 8) {
                std::ostringstream os;
                os << "gauge_align: commutator system rank " << res.rank << " < 8; singular values";
                for (Eigen::Index i = 0; i < s.singular_values.size(); ++i) os << " " << s.singular_values(i);
                throw DegenerateProbeSet(os.str());
            }
        }
        res.B = (Mat3::Identity() + unvec(s.x)) * res.B;
        // The strict form has no fixed point at the solution, so one pass only.
        if (opt.strict_rhs) break;
    }
    const Mat3 binv = res.B.inverse();
    for (std::size_t b = 0; b < measured.size(); ++b)
        res.commutator_residual =
            std::max(res.commutator_residual, (res.B * measured[b] * binv - target[b]).cwiseAbs().maxCoeff());
    return res;
}

Vec3 estimate_frame_offset(const std::vector<PairData>& pairs, const std::vector<Mat3>& e_hat) {
    std::vector<Eigen::Matrix3d> rows;
    std::vector<Vec3> rhs;
    for (const auto& pd : pairs) {
        const Mat3 s = geometric_sum(e_hat[pd.plan.i - 1] * e_hat[pd.plan.j - 1], pd.plan.n);
        Eigen::JacobiSVD<Mat3> svd(s, Eigen::ComputeFullU);
        const Vec3 sv = svd.singularValues();
        const double cut = std::sqrt(sv(0));
        Mat3 proj = Mat3::Zero();
        for (int c = 0; c < 3; ++c)
            if (sv(c) < cut) proj += svd.matrixU().col(c) * svd.matrixU().col(c).transpose();
        rows.push_back(proj * (Mat3::Identity() - pd.Y));
        rhs.push_back(proj * pd.k_aligned);
    }
    Eigen::MatrixXd a(Eigen::Index(3 * rows.size()), 3);
    Eigen::VectorXd b(Eigen::Index(3 * rows.size()));
    for (std::size_t p = 0; p < rows.size(); ++p) {
        a.middleRows(Eigen::Index(3 * p), 3) = rows[p];
        b.segment(Eigen::Index(3 * p), 3) = rhs[p];
    }
    if (a.cwiseAbs().maxCoeff() == 0.0) return Vec3::Zero();
    return pinv_solve(a, b, Truncation{1e-10, 0}).x;
}

LinearSystem build_nonunital_system(const std::vector<PairData>& pairs, const std::vector<Mat3>& e_hat) {
    const Eigen::Index unknowns = Eigen::Index(3 * e_hat.size());
    LinearSystem sys;
    sys.coefficients = Eigen::MatrixXd::Zero(Eigen::Index(pairs.size()), unknowns);
    sys.rhs.resize(Eigen::Index(pairs.size()));
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const auto& pd = pairs[r];
        const int i = pd.plan.i - 1, j = pd.plan.j - 1;
        const Eigen::RowVector3d v = pd.top.v.transpose();
        sys.coefficients.block(Eigen::Index(r), 3 * i, 1, 3) += v;
        sys.coefficients.block(Eigen::Index(r), 3 * j, 1, 3) += v * e_hat[std::size_t(i)];
        sys.rhs(Eigen::Index(r)) = pd.top.u.dot(pd.k_aligned) / pd.top.value;
    }
    for (std::size_t g = 0; g < e_hat.size(); ++g)
        for (int c = 0; c < 3; ++c) sys.labels.push_back("k" + std::to_string(g + 1) + "_" + std::to_string(c + 1));
    return sys;
}

NonunitalResult reconstruct_nonunital(MeasurementSource& src, const std::vector<Mat3>& e_hat,
                                      const DoubleMapPlan& plan, const NonunitalOptions& opt, int threads) {
    NonunitalResult res;
    res.pairs.resize(plan.pairs.size());
    parallel_for(plan.pairs.size(), threads, [&](std::size_t p) {
        PairData& pd = res.pairs[p];
        pd.plan = plan.pairs[p];
        const SequenceSpec seq{{pd.plan.i, pd.plan.j}, pd.plan.n};
        try {
            const Ptm m = src.measure_ptm(seq);
            pd.X = unital_block(m);
            pd.k_measured = nonunital_block(m);
        } catch (const std::exception& e) {
            throw StageError("nonunital_recon", describe(seq), e.what());
        }
        const Mat3 eij = e_hat[std::size_t(pd.plan.i - 1)] * e_hat[std::size_t(pd.plan.j - 1)];
        pd.Y = power(eij, pd.plan.n);
        pd.top = largest_singular_triplet(geometric_sum(eij, pd.plan.n));
    });

    std::vector<Mat3> xs, ys;
    for (const auto& pd : res.pairs) {
        xs.push_back(pd.X);
        ys.push_back(pd.Y);
    }
    try {
        res.align = gauge_align(xs, ys, opt.align);
    } catch (const std::exception& e) {
        throw StageError("gauge_align", "", e.what());
    }
    for (auto& pd : res.pairs) pd.k_aligned = res.align.B * pd.k_measured;
    if (opt.affine_correction) {
        res.offset = estimate_frame_offset(res.pairs, e_hat);
        for (auto& pd : res.pairs) pd.k_aligned -= (Mat3::Identity() - pd.Y) * res.offset;
    }

    LinearSystem sys = build_nonunital_system(res.pairs, e_hat);
    res.solve = pinv_solve(sys, Truncation{1e-14, opt.truncate});
    const Eigen::VectorXd& s = res.solve.singular_values;
    const Eigen::Index keep = s.size() - opt.truncate;
    if (keep <= 0 || s(keep - 1) <= 1e-8 * s(0)) {
        std::ostringstream os;
        os << "fewer than " << keep << " well-separated singular values:";
        for (Eigen::Index i = 0; i < s.size(); ++i) os << " " << s(i);
        throw StageError("nonunital_recon", "", os.str());
    }
    for (std::size_t g = 0; g < e_hat.size(); ++g) res.k.push_back(res.solve.x.segment<3>(Eigen::Index(3 * g)));
    return res;
}

std::string nonunital_csv(const NonunitalResult& r) {
    CsvWriter w;
    w.header({"kind", "i", "j", "n", "lambda_max", "kx", "ky", "kz"});
    for (const auto& pd : r.pairs)
        w.row({"pair", fmt((long long)pd.plan.i), fmt((long long)pd.plan.j), fmt(pd.plan.n), fmt(pd.top.value),
               fmt(pd.k_aligned(0)), fmt(pd.k_aligned(1)), fmt(pd.k_aligned(2))});
    for (std::size_t g = 0; g < r.k.size(); ++g)
        w.row({"gate", fmt((long long)g + 1), "", "", "", fmt(r.k[g](0)), fmt(r.k[g](1)), fmt(r.k[g](2))});
    return w.str();
}

} // namespace tomolab
