#include "tomolab/bench.hpp"

#include "tomolab/linsys.hpp"
#include "tomolab/nonunital.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tomolab {

Mat4 GaugeTransform::matrix() const { return assemble(scale * B, a); }

namespace {
double total_distance(const std::vector<Ptm>& rec, const Mat4& t, const std::vector<Ptm>& truth) {
    const Mat4 ti = t.inverse();
    double s = 0.0;
    for (std::size_t j = 0; j < rec.size(); ++j) s += spectral_distance(t * rec[j] * ti, truth[j]);
    return s;
}
} // namespace

GaugeTransform fit_gauge(const std::vector<Ptm>& rec, const std::vector<Ptm>& truth, const GaugeFitOptions& opt) {
    if (rec.size() != truth.size() || rec.empty()) throw std::invalid_argument("fit_gauge: need matching gate lists");
    std::vector<Mat3> er, et;
    for (std::size_t j = 0; j < rec.size(); ++j) {
        er.push_back(unital_block(rec[j]));
        et.push_back(unital_block(truth[j]));
    }
    AlignOptions ao;
    ao.iterations = opt.iterations;
    ao.strict_rhs = opt.strict_rhs;
    AlignResult al;
    GaugeTransform g;
    try {
        al = gauge_align(er, et, ao);
    } catch (const DegenerateProbeSet&) {
        // Rank anomaly: report through rank, keep B = I.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(commutator_system(er));
        g.singular_values = svd.singularValues();
        g.rank = numerical_rank(g.singular_values, 1e-6);
        al.B = Mat3::Identity();
    }
    if (al.singular_values.size()) {
        g.singular_values = al.singular_values;
        g.rank = al.rank;
    }
    g.B = al.B;
    g.warn = (g.B - Mat3::Identity()).norm() > 0.5;

    const Mat3 binv = g.B.inverse();
    const int cols = opt.fit_scale ? 4 : 3;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(Eigen::Index(3 * rec.size()), cols);
    Eigen::VectorXd b(Eigen::Index(3 * rec.size()));
    for (std::size_t j = 0; j < rec.size(); ++j) {
        const Vec3 bk = g.B * nonunital_block(rec[j]);
        a.block(Eigen::Index(3 * j), 0, 3, 3) = Mat3::Identity() - g.B * er[j] * binv;
        if (opt.fit_scale) a.block(Eigen::Index(3 * j), 3, 3, 1) = bk;
        b.segment(Eigen::Index(3 * j), 3) = nonunital_block(truth[j]) - bk;
    }
    if (a.cwiseAbs().maxCoeff() > 0.0) {
        const SolveResult s = pinv_solve(a, b, Truncation{1e-10, 0});
        g.a = s.x.head<3>();
        if (opt.fit_scale) g.scale = 1.0 + s.x(3);
    }
    if (total_distance(rec, g.matrix(), truth) > total_distance(rec, Mat4::Identity(), truth)) {
        g.a = Vec3::Zero();
        g.B = Mat3::Identity();
        g.scale = 1.0;
        g.identity_kept = true;
    }
    return g;
}

std::vector<DistanceRow> distances(const std::vector<Ptm>& rec, const Mat4& t, const std::vector<Ptm>& truth,
                                   const std::vector<Ptm>& ideals) {
    if (rec.size() != truth.size() || truth.size() != ideals.size())
        throw std::invalid_argument("distances: gate lists differ in length");
    const Mat4 ti = t.inverse();
    std::vector<DistanceRow> out;
    for (std::size_t j = 0; j < rec.size(); ++j)
        out.push_back({int(j) + 1, spectral_distance(truth[j], ideals[j]), spectral_distance(t * rec[j] * ti, truth[j])});
    return out;
}

ScalingFit fit_scaling(const std::vector<DistanceRow>& rows) {
    std::vector<double> x, y;
    for (const auto& r : rows)
        if (r.D > 0.0 && r.D_r > 0.0) {
            x.push_back(std::log10(r.D));
            y.push_back(std::log10(r.D_r));
        }
    if (x.size() < 10) throw InsufficientSpan("fit_scaling: " + std::to_string(x.size()) + " usable points, need 10");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*hi - *lo < 2.0) throw InsufficientSpan("fit_scaling: D spans " + std::to_string(*hi - *lo) + " decades, need 2");
    Eigen::MatrixXd a(Eigen::Index(x.size()), 2);
    Eigen::VectorXd b(Eigen::Index(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        a(Eigen::Index(i), 0) = x[i];
        a(Eigen::Index(i), 1) = 1.0;
        b(Eigen::Index(i)) = y[i];
    }
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
    return {c(0), c(1), int(x.size())};
}

namespace {
std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}
} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double n = double(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace tomolab
