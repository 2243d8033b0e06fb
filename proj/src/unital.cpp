#include "tomolab/unital.hpp"

#include "tomolab/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace tomolab {

namespace {
#include "quadruples.inc"

std::string quad_name(const Quadruple& q) {
    std::ostringstream os;
    os << "(" << q[0] << "," << q[1] << "," << q[2] << "," << q[3] << ")";
    return os.str();
}

Mat3 block_product(const std::vector<Mat3>& blocks, const Quadruple& q) {
    return blocks[q[0] - 1] * blocks[q[1] - 1] * blocks[q[2] - 1] * blocks[q[3] - 1];
}
} // namespace

const std::vector<Quadruple>& quadruple_list() {
    static const std::vector<Quadruple> list = [] {
        std::vector<Quadruple> v;
        for (const auto& row : kQuadrupleData) v.push_back({row[0], row[1], row[2], row[3]});
        return v;
    }();
    return list;
}

std::string QuadrupleCheck::summary() const {
    std::ostringstream os;
    os << "rank " << rank << ", gap " << gap;
    const auto& q = quadruple_list();
    for (auto [a, b] : duplicates)
        os << "; entries " << a + 1 << " and " << b + 1 << " repeat " << quad_name(q[std::size_t(a)]);
    for (int i : not_distinct) os << "; entry " << i + 1 << " " << quad_name(q[std::size_t(i)]) << " has a repeated eigenvalue";
    return os.str();
}

QuadrupleCheck check_quadruples(const std::vector<Ptm>& ideals, const std::vector<Quadruple>& quads) {
    QuadrupleCheck c;
    for (std::size_t i = 0; i < quads.size(); ++i)
        for (std::size_t j = i + 1; j < quads.size(); ++j)
            if (quads[i] == quads[j]) c.duplicates.emplace_back(int(i), int(j));
    std::vector<Mat3> blocks;
    for (const auto& m : ideals) blocks.push_back(unital_block(m));
    for (std::size_t i = 0; i < quads.size(); ++i) {
        const EigenTriple l = unital_eigenvalues(block_product(blocks, quads[i]));
        const double gap = std::min({std::abs(l[0] - l[1]), std::abs(l[0] - l[2]), std::abs(l[1] - l[2])});
        if (gap < 1e-6) c.not_distinct.push_back(int(i));
    }
    Eigen::MatrixXd a(quads.size(), 9 * blocks.size());
    for (std::size_t i = 0; i < quads.size(); ++i) a.row(Eigen::Index(i)) = quadruple_row(blocks, quads[i]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const Eigen::VectorXd s = svd.singularValues();
    c.rank = numerical_rank(s, 1e-6);
    if (c.rank > 0 && c.rank < s.size()) c.gap = s(c.rank - 1) / std::max(s(c.rank), 1e-300);
    return c;
}

Eigen::RowVectorXd quadruple_row(const std::vector<Mat3>& ref, const Quadruple& q) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(Eigen::Index(9 * ref.size()));
    for (int pos = 0; pos < 4; ++pos) {
        const Mat3 qm = ref[q[(pos + 1) % 4] - 1] * ref[q[(pos + 2) % 4] - 1] * ref[q[(pos + 3) % 4] - 1];
        const int g = q[pos] - 1;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) row(9 * g + 3 * a + b) += qm(b, a);
    }
    return row;
}

LinearSystem build_quadruple_system(const std::vector<Mat3>& ref, const std::vector<Quadruple>& quads,
                                    const std::vector<double>& traces) {
    if (traces.size() != quads.size())
        throw std::invalid_argument("build_quadruple_system: " + std::to_string(quads.size() - std::min(quads.size(), traces.size())) +
                                    " quadruple trace(s) missing");
    LinearSystem sys;
    sys.coefficients.resize(Eigen::Index(quads.size()), Eigen::Index(9 * ref.size()));
    sys.rhs.resize(Eigen::Index(quads.size()));
    for (std::size_t i = 0; i < quads.size(); ++i) {
        sys.coefficients.row(Eigen::Index(i)) = quadruple_row(ref, quads[i]);
        sys.rhs(Eigen::Index(i)) = traces[i] - (1.0 + block_product(ref, quads[i]).trace());
    }
    for (std::size_t g = 0; g < ref.size(); ++g)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                sys.labels.push_back("dE" + std::to_string(g + 1) + "_" + std::to_string(a + 1) + std::to_string(b + 1));
    return sys;
}

double trace_residual(const std::vector<Mat3>& blocks, const std::vector<Quadruple>& quads,
                      const std::vector<double>& traces) {
    double r = 0.0;
    for (std::size_t i = 0; i < quads.size(); ++i)
        r = std::max(r, std::abs(traces[i] - (1.0 + block_product(blocks, quads[i]).trace())));
    return r;
}

namespace {
std::vector<Mat3> apply_update(const std::vector<Mat3>& ref, const Eigen::VectorXd& x) {
    std::vector<Mat3> out = ref;
    for (std::size_t g = 0; g < ref.size(); ++g)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) out[g](a, b) += x(Eigen::Index(9 * g + 3 * a + b));
    return out;
}
} // namespace

UnitalResult reconstruct_unital(MeasurementSource& src, const std::vector<Ptm>& ideals,
                                const std::vector<double>& p_hints, const UnitalOptions& opt,
                                const std::vector<Quadruple>& quads, int threads) {
    if (p_hints.size() != ideals.size()) throw std::invalid_argument("reconstruct_unital: one p hint per gate required");
    UnitalResult res;
    std::map<Quadruple, int> distinct;
    std::vector<Quadruple> order;
    for (const auto& q : quads) {
        auto [it, fresh] = distinct.emplace(q, int(order.size()));
        if (fresh) order.push_back(q);
        res.estimate_index.push_back(it->second);
    }
    res.estimates.resize(order.size());
    parallel_for(order.size(), threads, [&](std::size_t i) {
        const Quadruple& q = order[i];
        const std::vector<int> ids(q.begin(), q.end());
        Ptm ideal = Ptm::Identity();
        double hint = 0.0;
        for (int g : q) {
            ideal = ideal * ideals[std::size_t(g - 1)];
            hint += p_hints[std::size_t(g - 1)];
        }
        hint = std::min(hint, 0.49);
        try {
            res.estimates[i] = estimate_trace(src, ids, ideal, hint, opt.trace);
        } catch (const std::exception& e) {
            throw StageError("spectral_trace", quad_name(q), e.what());
        }
    });
    for (int idx : res.estimate_index) res.traces.push_back(res.estimates[std::size_t(idx)].Lambda);

    std::vector<Mat3> ref;
    for (const auto& m : ideals) ref.push_back(unital_block(m));
    LinearSystem sys = build_quadruple_system(ref, quads, res.traces);
    res.solve = pinv_solve(sys, Truncation{opt.rcond, 0});
    res.E = apply_update(ref, res.solve.x);
    if (opt.iterate) {
        for (int it = 0; it < opt.max_iterations; ++it) {
            UnitalResult next = iterate_refinement(res, quads, opt.rcond);
            if (next.iteration_diverged) {
                res.iteration_diverged = true;
                break;
            }
            const double step = [&] {
                double s = 0.0;
                for (std::size_t g = 0; g < res.E.size(); ++g) s = std::max(s, (next.E[g] - res.E[g]).cwiseAbs().maxCoeff());
                return s;
            }();
            res = std::move(next);
            if (step < 1e-15) break;
        }
    }
    return res;
}

UnitalResult iterate_refinement(const UnitalResult& prev, const std::vector<Quadruple>& quads, double rcond) {
    UnitalResult out = prev;
    LinearSystem sys = build_quadruple_system(prev.E, quads, prev.traces);
    const SolveResult s = pinv_solve(sys, Truncation{rcond, 0});
    std::vector<Mat3> next = apply_update(prev.E, s.x);
    const double before = trace_residual(prev.E, quads, prev.traces);
    const double after = trace_residual(next, quads, prev.traces);
    if (after > before && after > 1e-14) {
        out.iteration_diverged = true;
        return out;
    }
    out.E = std::move(next);
    out.solve = s;
    out.iterations = prev.iterations + 1;
    return out;
}

Mat3 external_unital(const std::vector<Mat3>& probes, const std::vector<double>& traces) {
    if (probes.size() != traces.size()) throw std::invalid_argument("external_unital: one trace per probe required");
    if (probes.size() < 9) throw ProbeRankError("external_unital: at least nine probes are needed");
    Eigen::MatrixXd a(Eigen::Index(probes.size()), 9);
    Eigen::VectorXd b(Eigen::Index(probes.size()));
    for (std::size_t j = 0; j < probes.size(); ++j) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(Eigen::Index(j), 3 * r + c) = probes[j](c, r);
        b(Eigen::Index(j)) = traces[j] - 1.0;
    }
    // Greedy rank scan names the first probe that adds nothing.
    Eigen::MatrixXd acc(0, 9);
    std::vector<int> kept;
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
        Eigen::MatrixXd trial(acc.rows() + 1, 9);
        trial << acc, a.row(j);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(trial);
        if (numerical_rank(svd.singularValues(), 1e-9) == trial.rows()) {
            acc = trial;
            kept.push_back(int(j));
        } else if (acc.rows() < 9) {
            std::ostringstream os;
            os << "external_unital: probe " << j + 1 << " is linearly dependent on probes";
            for (int k : kept) os << " " << k + 1;
            throw ProbeRankError(os.str());
        }
        if (acc.rows() == 9) break;
    }
    if (acc.rows() < 9) throw ProbeRankError("external_unital: probe set has rank " + std::to_string(acc.rows()) + " < 9");
    const SolveResult s = pinv_solve(a, b, Truncation{1e-12, 0});
    Mat3 e;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) e(r, c) = s.x(3 * r + c);
    return e;
}

} // namespace tomolab
