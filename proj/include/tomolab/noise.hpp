#pragma once

#include "tomolab/ptm.hpp"
#include "tomolab/rng.hpp"

#include <stdexcept>
#include <string>

namespace tomolab {

// L(rho) = -i[H, rho] + sum_ab h_ab (s_a rho s_b - {s_b s_a, rho}/2), H = sum_a c_a s_a.
struct LindbladGenerator {
    Vec3 hamiltonian = Vec3::Zero();
    Eigen::Matrix3cd dissipator = Eigen::Matrix3cd::Zero();
};

struct NoiseSpec {
    double target_error_rate = 1e-3;
    std::uint64_t rng_seed = 0;
};

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// c ~ N(0,1)^3, h = G G^dagger with standard complex normal G; (c, h) jointly scaled so the
// generator PTM has unit spectral norm.
LindbladGenerator random_generator(Rng& rng);

// Entry (s,t) = Tr[P_s L(P_t)] / 2.
Mat4 generator_ptm(const LindbladGenerator& g);

// Matrix exponential (Pade scaling and squaring).
Mat4 expm(const Mat4& a);

struct NoisyGate {
    LindbladGenerator generator;
    double t = 0.0;
    double achieved_error_rate = 0.0;
    Ptm ptm = Ptm::Identity();
};

// Finds t with error_rate(exp(G t) ideal, ideal) = p by bisection on [0, 1], doubling the upper
// end as needed (up to 2^20).
NoisyGate calibrate(const LindbladGenerator& g, const Ptm& ideal, double p);

NoisyGate noisy_gate(const Ptm& ideal, double p, Rng& rng);
NoisyGate noisy_gate(const GateRecord& ideal, const NoiseSpec& spec);

// Regenerates exp(G t) ideal from stored parameters.
Ptm apply_noise(const LindbladGenerator& g, double t, const Ptm& ideal);

// Hidden frame transform: PTM of exp(L t) calibrated to error rate 0.1 against the identity.
NoisyGate random_gauge_transform(Rng& rng, double p = 0.1);

} // namespace tomolab
