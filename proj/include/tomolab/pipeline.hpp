#pragma once

#include "tomolab/noise.hpp"
#include "tomolab/nonunital.hpp"
#include "tomolab/oracle.hpp"
#include "tomolab/ptm.hpp"
#include "tomolab/unital.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tomolab {

// One simulated gate set: the seven reference gates with calibrated noise, the hidden frame
// transform and the oracle seed. Everything derives from `seed`.
struct GateSet {
    std::uint64_t seed = 0;
    double p = 0.0; // target error rate shared by all gates
    std::vector<GateRecord> gates;
    std::vector<NoisyGate> noise;
    NoisyGate gauge;
    std::uint64_t oracle_seed = 0;

    std::vector<Ptm> noisy() const;
    std::vector<Ptm> ideals() const;
};

// Seed of set `index` under a master seed.
std::uint64_t derive_set_seed(std::uint64_t master, std::uint64_t index);

// Draws p log-uniformly in [p_lo, p_hi] and calibrates every gate to it. Throws CalibrationError
// naming the gate on failure.
GateSet generate_gate_set(std::uint64_t seed, double p_lo, double p_hi);
// Same with a fixed p.
GateSet generate_gate_set_at(std::uint64_t seed, double p);

// JSON gate-set file; numbers round-trip exactly.
std::string gate_set_to_json(const GateSet& g);
// Parses and checks the stored PTMs against the stored generators. Throws std::runtime_error.
GateSet gate_set_from_json(const std::string& text);

struct PipelineOptions {
    TraceOptions trace;
    bool strict_rhs = false;
    bool iterate_unital = false;
    bool affine_correction = true;
    int threads = 1;
};

struct Reconstruction {
    std::vector<Ptm> M;
    std::vector<double> p_hat;
    UnitalResult unital;
    DoubleMapPlan plan;
    NonunitalResult nonunital;
};

// spectral traces -> unital blocks -> frame alignment -> non-unital vectors.
Reconstruction reconstruct(MeasurementSource& src, const std::vector<Ptm>& ideals, const std::vector<double>& p_hints,
                           const PipelineOptions& opt = {});

// gate, then the 16 PTM entries row-major.
std::string reconstruction_csv(const Reconstruction& r);
// Per quadruple: entry, ids, Lambda, n_used, predicted variance, skipped steps.
std::string unital_diagnostics_csv(const Reconstruction& r, const std::vector<Quadruple>& quads = quadruple_list());

} // namespace tomolab
