#pragma once

#include "tomolab/ptm.hpp"

#include <vector>

namespace tomolab {

// exp(i * angle * (n . sigma)) with n normalised.
Mat2c axis_rotation(double angle, const Eigen::Vector3d& axis);

// The seven-gate reference set used throughout (ids 1..7, stored at index id-1).
const std::vector<Mat2c>& reference_unitaries();
std::vector<GateRecord> reference_gate_records();
std::vector<Ptm> reference_ideal_ptms();

Mat2c unitary_identity();
Mat2c unitary_pauli_z();
Mat2c unitary_phase_s();

} // namespace tomolab
