#include "tomolab/linsys.hpp"
#include "tomolab/rng.hpp"

#include <doctest.h>

using namespace tomolab;

namespace {
Eigen::MatrixXd random_matrix(Rng& rng, int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = standard_normal(rng);
    return m;
}
} // namespace

TEST_CASE("full column rank: pseudoinverse equals the normal equations") {
    Rng rng = make_rng(31);
    const Eigen::MatrixXd a = random_matrix(rng, 30, 8);
    const Eigen::VectorXd b = random_matrix(rng, 30, 1);
    const SolveResult r = pinv_solve(a, b);
    const Eigen::VectorXd ne = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    CHECK((r.x - ne).norm() < 1e-12);
    CHECK(r.rank == 8);
    CHECK(r.residual == doctest::Approx((a * ne - b).norm()).epsilon(1e-10));
    for (int i = 1; i < r.singular_values.size(); ++i) CHECK(r.singular_values(i - 1) >= r.singular_values(i));
}

TEST_CASE("rank-deficient system: minimum-norm solution") {
    Rng rng = make_rng(32);
    // 20 x 6 of rank 4.
    const Eigen::MatrixXd a = random_matrix(rng, 20, 4) * random_matrix(rng, 4, 6);
    const Eigen::VectorXd b = random_matrix(rng, 20, 1);
    const SolveResult r = pinv_solve(a, b);
    CHECK(r.rank == 4);
    const Eigen::VectorXd want = a.completeOrthogonalDecomposition().pseudoInverse() * b;
    CHECK((r.x - want).norm() < 1e-10);
    // Orthogonal to the null space.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    CHECK((svd.matrixV().rightCols(2).transpose() * r.x).norm() < 1e-10);
}

TEST_CASE("drop_smallest removes trailing singular directions") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    a.diagonal() << 4, 3, 2, 1;
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
    Truncation t;
    t.drop_smallest = 2;
    const SolveResult r = pinv_solve(a, b, t);
    CHECK(r.rank == 2);
    CHECK(r.x(0) == doctest::Approx(0.25));
    CHECK(r.x(1) == doctest::Approx(1.0 / 3.0));
    CHECK(r.x(2) == 0.0);
    CHECK(r.x(3) == 0.0);
    CHECK(r.condition == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("LinearSystem overload records singular values") {
    LinearSystem sys;
    sys.coefficients = Eigen::MatrixXd::Identity(3, 3) * 2.0;
    sys.rhs = Eigen::VectorXd::Ones(3);
    sys.labels = {"a", "b", "c"};
    const SolveResult r = pinv_solve(sys);
    CHECK(sys.singular_values.size() == 3);
    CHECK(r.x.isApprox(Eigen::VectorXd::Constant(3, 0.5)));
}

TEST_CASE("degenerate inputs throw") {
    CHECK_THROWS_AS(pinv_solve(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Ones(3)), std::invalid_argument);
    CHECK_THROWS_AS(pinv_solve(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(4)), std::invalid_argument);
}

TEST_CASE("numerical rank") {
    Eigen::VectorXd s(4);
    s << 1.0, 1e-3, 1e-9, 1e-12;
    CHECK(numerical_rank(s, 1e-10) == 3);
    CHECK(numerical_rank(s, 1e-6) == 2);
    CHECK(numerical_rank(s, 0.5) == 1);
}

TEST_CASE("small pseudoinverse examples") {
    const SolveResult a = pinv_solve(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1, 2, 3));
    CHECK((a.x - Eigen::Vector3d(1, 2, 3)).norm() < 1e-15);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
    s(0, 0) = 1.0;
    const SolveResult b = pinv_solve(s, Eigen::Vector2d(1, 1));
    CHECK((b.x - Eigen::Vector2d(1, 0)).norm() < 1e-15);
    CHECK(b.rank == 1);
}

TEST_CASE("consistent rank-55 system of the unital size") {
    Rng rng = make_rng(35);
    const Eigen::MatrixXd a = random_matrix(rng, 100, 55) * random_matrix(rng, 55, 63);
    const Eigen::VectorXd b = a * random_matrix(rng, 63, 1);
    const SolveResult r = pinv_solve(a, b);
    CHECK(r.rank == 55);
    CHECK(r.residual <= 1e-9);
}
