#pragma once

#include "tomolab/linsys.hpp"
#include "tomolab/oracle.hpp"
#include "tomolab/ptm.hpp"
#include "tomolab/spectral_trace.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace tomolab {

using Quadruple = std::array<int, 4>; // gate ids, 1-based

// The 100 quadruple maps shipped in data/quadruples.csv.
const std::vector<Quadruple>& quadruple_list();

struct QuadrupleCheck {
    std::vector<std::pair<int, int>> duplicates; // index pairs (0-based) of repeated entries
    std::vector<int> not_distinct;               // entries whose ideal eigenvalues are not all distinct
    int rank = 0;
    double gap = 0.0; // ratio of the 55th to the 56th singular value
    std::string summary() const;
};

// Startup audit of the list against the ideal gates: duplicates, eigenvalue distinctness, rank.
QuadrupleCheck check_quadruples(const std::vector<Ptm>& ideals, const std::vector<Quadruple>& quads);

// Row for quadruple (i,j,k,l): sum over cyclic positions of Tr(Q delta_E_g), Q the product of the
// other three reference blocks, i.e. Q^T flattened row-major at columns 9(g-1).. of the gate.
Eigen::RowVectorXd quadruple_row(const std::vector<Mat3>& reference, const Quadruple& q);

// rhs = measured trace - Tr(reference product), reference maps taken unital (k = 0).
LinearSystem build_quadruple_system(const std::vector<Mat3>& reference, const std::vector<Quadruple>& quads,
                                    const std::vector<double>& measured_traces);

struct UnitalOptions {
    TraceOptions trace;
    double rcond = 1e-10;
    bool iterate = false;
    int max_iterations = 5;
};

struct UnitalResult {
    std::vector<Mat3> E;                 // reconstructed unital blocks, gate order
    std::vector<double> traces;          // measured Lambda per quadruple
    std::vector<TraceEstimate> estimates; // per distinct quadruple (see estimate_index)
    std::vector<int> estimate_index;     // quadruple -> estimates entry
    SolveResult solve;
    int iterations = 0;
    bool iteration_diverged = false;
};

// Measures every quadruple trace (duplicates measured once) and solves the first-order system
// around the ideal blocks. p_hints are per-gate error-rate hints for schedule sizing.
UnitalResult reconstruct_unital(MeasurementSource& src, const std::vector<Ptm>& ideals,
                                const std::vector<double>& p_hints, const UnitalOptions& opt = {},
                                const std::vector<Quadruple>& quads = quadruple_list(), int threads = 1);

// Re-linearises around the current blocks and re-solves with the same traces. Keeps the previous
// solution (and sets iteration_diverged) if the trace residual grows.
UnitalResult iterate_refinement(const UnitalResult& previous, const std::vector<Quadruple>& quads,
                                double rcond = 1e-10);

// Trace residual max_q |measured - (1 + Tr(product of blocks))|.
double trace_residual(const std::vector<Mat3>& blocks, const std::vector<Quadruple>& quads,
                      const std::vector<double>& traces);

struct ProbeRankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unital block of an external map from Tr(M_j M') = Tr(E_j E') + 1 over nine probes.
Mat3 external_unital(const std::vector<Mat3>& probe_blocks, const std::vector<double>& traces);

} // namespace tomolab
