#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace tomolab {

using cplx = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;

// 4x4 Pauli transfer matrix; index 0 is the identity Pauli, 1..3 are X, Y, Z.
using Ptm = Mat4;

// Three eigenvalues of a unital block, closed under conjugation.
using EigenTriple = std::array<cplx, 3>;

// I, X, Y, Z.
const std::array<Mat2c, 4>& pauli();

// Entry (s,t) = Tr[P_s U P_t U^dagger] / 2. Throws std::invalid_argument if U is not unitary.
Ptm ptm_from_unitary(const Mat2c& u);

Ptm compose(const Ptm& a, const Ptm& b);

// Exponentiation by squaring. n = 0 gives the identity.
Ptm power(const Ptm& a, long long n);
Mat3 power(const Mat3& e, long long n);

Mat3 unital_block(const Ptm& m);
Vec3 nonunital_block(const Ptm& m);
Ptm assemble(const Mat3& e, const Vec3& k);

double trace(const Ptm& m);

// Sorted by descending real part, then descending imaginary part.
EigenTriple unital_eigenvalues(const Mat3& e);

// (1 - sum |l|^2 + 2 l1 l2 l3) - |k|^2; non-negative for completely positive maps.
double cp_bound_margin(const Mat3& e, const Vec3& k);

// Smallest eigenvalue of the trace-normalised Choi operator.
double choi_min_eigenvalue(const Ptm& m);
Eigen::Matrix4cd choi_matrix(const Ptm& m);

// p = 1 - F with F = (2 F_pro + 1) / 3, F_pro = Tr[ideal^T noisy] / 4.
double error_rate(const Ptm& noisy, const Ptm& ideal);

double spectral_norm(const Eigen::MatrixXd& a);
double spectral_distance(const Ptm& a, const Ptm& b);

// Smallest m in [1, cap] with a^m = identity (entrywise 1e-9), or 0 if none.
int period(const Ptm& a, int cap = 64);

struct GateRecord {
    int id = 0;
    Mat2c ideal_unitary = Mat2c::Identity();
    Ptm ideal_ptm = Ptm::Identity();
    Ptm noisy_ptm = Ptm::Identity();
    double error_rate = 0.0;
    int period = 1;
};

GateRecord make_ideal_record(int id, const Mat2c& u);

} // namespace tomolab
