#include "tomolab/noise.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace tomolab {

namespace {

Mat2c apply_lindblad(const Vec3& c, const Eigen::Matrix3cd& h, const Mat2c& rho) {
    const auto& p = pauli();
    const cplx i(0.0, 1.0);
    const Mat2c hmat = c(0) * p[1] + c(1) * p[2] + c(2) * p[3];
    Mat2c out = -i * (hmat * rho - rho * hmat);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            if (h(a, b) == cplx(0.0)) continue;
            const Mat2c& sa = p[a + 1];
            const Mat2c& sb = p[b + 1];
            out += h(a, b) * (sa * rho * sb - 0.5 * (sb * sa * rho + rho * sb * sa));
        }
    }
    return out;
}

} // namespace

Mat4 generator_ptm(const LindbladGenerator& g) {
    const auto& p = pauli();
    Mat4 m;
    for (int t = 0; t < 4; ++t) {
        const Mat2c lt = apply_lindblad(g.hamiltonian, g.dissipator, p[t]);
        for (int s = 0; s < 4; ++s) m(s, t) = 0.5 * (p[s] * lt).trace().real();
    }
    m.row(0).setZero();
    return m;
}

LindbladGenerator random_generator(Rng& rng) {
    LindbladGenerator g;
    for (int a = 0; a < 3; ++a) g.hamiltonian(a) = standard_normal(rng);
    Eigen::Matrix3cd G;
    const double r = 1.0 / std::sqrt(2.0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double re = standard_normal(rng);
            const double im = standard_normal(rng);
            G(a, b) = cplx(re * r, im * r);
        }
    g.dissipator = G * G.adjoint();
    const double s = spectral_norm(generator_ptm(g));
    g.hamiltonian /= s;
    g.dissipator /= s;
    // Exact hermiticity after scaling.
    g.dissipator = 0.5 * (g.dissipator + g.dissipator.adjoint()).eval();
    return g;
}

Mat4 expm(const Mat4& a) { return a.exp(); }

Ptm apply_noise(const LindbladGenerator& g, double t, const Ptm& ideal) {
    Ptm m = expm(generator_ptm(g) * t) * ideal;
    m.row(0) << 1.0, 0.0, 0.0, 0.0;
    return m;
}

NoisyGate calibrate(const LindbladGenerator& g, const Ptm& ideal, double p) {
    if (!(p > 0.0 && p < 0.5)) throw CalibrationError("calibrate: target error rate must lie in (0, 0.5)");
    const Mat4 gen = generator_ptm(g);
    auto rate = [&](double t) {
        Ptm m = expm(gen * t) * ideal;
        return error_rate(m, ideal);
    };
    double lo = 0.0, hi = 1.0;
    int doublings = 0;
    while (rate(hi) < p) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 20) {
            std::ostringstream os;
            os << "calibrate: no bracket for p=" << p << " up to t=" << hi << " (rate there "
               << rate(hi) << ", generator norm " << spectral_norm(gen) << ", |c|="
               << g.hamiltonian.norm() << ", tr h=" << g.dissipator.trace().real() << ")";
            throw CalibrationError(os.str());
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (rate(mid) < p) lo = mid;
        else hi = mid;
    }
    // Pick the bracket end closer to the target.
    const double rlo = rate(lo), rhi = rate(hi);
    const double t = std::abs(rlo - p) < std::abs(rhi - p) ? lo : hi;
    NoisyGate out;
    out.generator = g;
    out.t = t;
    out.ptm = apply_noise(g, t, ideal);
    out.achieved_error_rate = error_rate(out.ptm, ideal);
    if (!(std::abs(out.achieved_error_rate - p) <= 1e-3 * p)) {
        std::ostringstream os;
        os << "calibrate: achieved error rate " << out.achieved_error_rate << " misses target " << p;
        throw CalibrationError(os.str());
    }
    return out;
}

NoisyGate noisy_gate(const Ptm& ideal, double p, Rng& rng) {
    const LindbladGenerator g = random_generator(rng);
    return calibrate(g, ideal, p);
}

NoisyGate noisy_gate(const GateRecord& ideal, const NoiseSpec& spec) {
    Rng rng = make_rng(spec.rng_seed);
    return noisy_gate(ideal.ideal_ptm, spec.target_error_rate, rng);
}

NoisyGate random_gauge_transform(Rng& rng, double p) {
    return noisy_gate(Ptm::Identity(), p, rng);
}

} // namespace tomolab
