#include "tomolab/ptm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tomolab {

const std::array<Mat2c, 4>& pauli() {
    static const std::array<Mat2c, 4> p = [] {
        const cplx i(0.0, 1.0);
        std::array<Mat2c, 4> out;
        out[0] << 1, 0, 0, 1;
        out[1] << 0, 1, 1, 0;
        out[2] << 0, -i, i, 0;
        out[3] << 1, 0, 0, -1;
        return out;
    }();
    return p;
}

Ptm ptm_from_unitary(const Mat2c& u) {
    const double dev = (u.adjoint() * u - Mat2c::Identity()).norm();
    if (!(dev <= 1e-10)) {
        throw std::invalid_argument("ptm_from_unitary: input is not unitary (|U^dag U - I| = " +
                                    std::to_string(dev) + ")");
    }
    const auto& p = pauli();
    Ptm m;
    for (int s = 0; s < 4; ++s) {
        for (int t = 0; t < 4; ++t) {
            m(s, t) = 0.5 * (p[s] * u * p[t] * u.adjoint()).trace().real();
        }
    }
    // Exact trace-preserving row; roundoff would otherwise leave ~1e-17 entries.
    m.row(0) << 1.0, 0.0, 0.0, 0.0;
    m.block<3, 1>(1, 0).setZero();
    return m;
}

Ptm compose(const Ptm& a, const Ptm& b) { return a * b; }

namespace {
template <class M>
M power_impl(const M& a, long long n) {
    if (n < 0) throw std::invalid_argument("power: negative exponent");
    M result = M::Identity();
    M base = a;
    bool first = true;
    while (n > 0) {
        if (n & 1) {
            result = first ? base : M(result * base);
            first = false;
        }
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return result;
}
} // namespace

Ptm power(const Ptm& a, long long n) { return power_impl(a, n); }
Mat3 power(const Mat3& e, long long n) { return power_impl(e, n); }

Mat3 unital_block(const Ptm& m) { return m.block<3, 3>(1, 1); }
Vec3 nonunital_block(const Ptm& m) { return m.block<3, 1>(1, 0); }

Ptm assemble(const Mat3& e, const Vec3& k) {
    Ptm m = Ptm::Zero();
    m(0, 0) = 1.0;
    m.block<3, 1>(1, 0) = k;
    m.block<3, 3>(1, 1) = e;
    return m;
}

double trace(const Ptm& m) { return m.trace(); }

EigenTriple unital_eigenvalues(const Mat3& e) {
    Eigen::EigenSolver<Mat3> es(e, false);
    const auto ev = es.eigenvalues();
    EigenTriple out{ev(0), ev(1), ev(2)};
    std::sort(out.begin(), out.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

double cp_bound_margin(const Mat3& e, const Vec3& k) {
    const EigenTriple l = unital_eigenvalues(e);
    const cplx prod = l[0] * l[1] * l[2];
    if (std::abs(prod.imag()) > 1e-10 * std::max(1.0, std::abs(prod))) {
        throw std::runtime_error("cp_bound_margin: eigenvalue product is not real");
    }
    double s = 0.0;
    for (const auto& x : l) s += std::norm(x);
    return (1.0 - s + 2.0 * prod.real()) - k.squaredNorm();
}

Eigen::Matrix4cd choi_matrix(const Ptm& m) {
    // J = 1/4 sum_{s,t} m(s,t) P_t^T (x) P_s
    const auto& p = pauli();
    Eigen::Matrix4cd j = Eigen::Matrix4cd::Zero();
    for (int s = 0; s < 4; ++s) {
        for (int t = 0; t < 4; ++t) {
            if (m(s, t) == 0.0) continue;
            const Mat2c a = p[t].transpose();
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    j.block<2, 2>(2 * r, 2 * c) += 0.25 * m(s, t) * a(r, c) * p[s];
        }
    }
    return j;
}

double choi_min_eigenvalue(const Ptm& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(choi_matrix(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double error_rate(const Ptm& noisy, const Ptm& ideal) {
    const double fpro = (ideal.transpose() * noisy).trace() / 4.0;
    return 1.0 - (2.0 * fpro + 1.0) / 3.0;
}

double spectral_norm(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()(0);
}

double spectral_distance(const Ptm& a, const Ptm& b) { return spectral_norm(a - b); }

int period(const Ptm& a, int cap) {
    Ptm acc = a;
    for (int m = 1; m <= cap; ++m) {
        if ((acc - Ptm::Identity()).cwiseAbs().maxCoeff() <= 1e-9) return m;
        acc = acc * a;
    }
    return 0;
}

GateRecord make_ideal_record(int id, const Mat2c& u) {
    GateRecord g;
    g.id = id;
    g.ideal_unitary = u;
    g.ideal_ptm = ptm_from_unitary(u);
    g.noisy_ptm = g.ideal_ptm;
    g.error_rate = 0.0;
    g.period = period(g.ideal_ptm);
    return g;
}

} // namespace tomolab
