#include "tomolab/gateset.hpp"

#include <cmath>
#include <numbers>

namespace tomolab {

Mat2c axis_rotation(double angle, const Eigen::Vector3d& axis) {
    const Eigen::Vector3d n = axis.normalized();
    const auto& p = pauli();
    const Mat2c ns = n(0) * p[1] + n(1) * p[2] + n(2) * p[3];
    return std::cos(angle) * Mat2c::Identity() + cplx(0.0, std::sin(angle)) * ns;
}

const std::vector<Mat2c>& reference_unitaries() {
    static const std::vector<Mat2c> u = [] {
        constexpr double pi = std::numbers::pi;
        const Eigen::Vector3d a(1, 1, -1), b(1, 1, 1), c(1, -1, 1);
        return std::vector<Mat2c>{
            axis_rotation(pi / 6, Eigen::Vector3d(0, 0, 1)),
            axis_rotation(-pi / 3, a),
            axis_rotation(-2 * pi / 3, a),
            axis_rotation(-pi / 3, b),
            axis_rotation(-2 * pi / 3, b),
            axis_rotation(-pi / 3, c),
            axis_rotation(-2 * pi / 3, c),
        };
    }();
    return u;
}

std::vector<GateRecord> reference_gate_records() {
    std::vector<GateRecord> out;
    const auto& u = reference_unitaries();
    for (std::size_t i = 0; i < u.size(); ++i) out.push_back(make_ideal_record(int(i) + 1, u[i]));
    return out;
}

std::vector<Ptm> reference_ideal_ptms() {
    std::vector<Ptm> out;
    for (const auto& u : reference_unitaries()) out.push_back(ptm_from_unitary(u));
    return out;
}

Mat2c unitary_identity() { return Mat2c::Identity(); }

Mat2c unitary_pauli_z() { return pauli()[3]; }

Mat2c unitary_phase_s() {
    Mat2c s;
    s << 1, 0, 0, cplx(0, 1);
    return s;
}

} // namespace tomolab
