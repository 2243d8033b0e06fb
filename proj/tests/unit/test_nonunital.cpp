#include "oracles.hpp"

#include "tomolab/gateset.hpp"
#include "tomolab/noise.hpp"
#include "tomolab/nonunital.hpp"
#include "tomolab/oracle.hpp"
#include "tomolab/pipeline.hpp"

#include <doctest.h>

using namespace tomolab;

namespace {

std::vector<Mat3> reference_blocks() {
    std::vector<Mat3> b;
    for (const auto& m : reference_ideal_ptms()) b.push_back(unital_block(m));
    return b;
}

std::vector<Mat3> pair_products(const std::vector<Mat3>& e) {
    std::vector<Mat3> out;
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = i + 1; j < e.size(); ++j) out.push_back(e[i] * e[j]);
    return out;
}

Mat3 random_block(Rng& rng, double scale) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = scale * standard_normal(rng);
    return m;
}

// Exact pair data for blocks e, vectors k and repetitions n, in the stage-one frame.
std::vector<PairData> exact_pairs(const std::vector<Mat3>& e, const std::vector<Vec3>& k, long long n) {
    std::vector<PairData> out;
    for (int i = 1; i <= 7; ++i)
        for (int j = i + 1; j <= 7; ++j) {
            PairData pd;
            pd.plan = {i, j, n, 0.0};
            const Mat3 p = e[std::size_t(i - 1)] * e[std::size_t(j - 1)];
            const Mat3 s = oracle::direct_geometric_sum(p, n);
            pd.Y = power(p, n);
            pd.X = pd.Y;
            pd.k_measured = s * (k[std::size_t(i - 1)] + e[std::size_t(i - 1)] * k[std::size_t(j - 1)]);
            pd.k_aligned = pd.k_measured;
            pd.top = largest_singular_triplet(s);
            out.push_back(pd);
        }
    return out;
}

} // namespace

TEST_CASE("geometric sum examples") {
    const Mat3 e = 0.99 * Mat3::Identity();
    CHECK(geometric_sum(e, 100)(0, 0) == doctest::Approx(63.39676587).epsilon(1e-9));
    CHECK((geometric_sum(Mat3::Identity(), 50) - 50.0 * Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
    // sum (1 - g)^q -> 1/g
    const double g = 1e-3;
    CHECK(geometric_sum((1 - g) * Mat3::Identity(), 1LL << 24)(1, 1) == doctest::Approx(1.0 / g).epsilon(1e-10));
    CHECK_THROWS_AS(geometric_sum(e, 0), std::invalid_argument);
}

TEST_CASE("geometric sum agrees with plain accumulation") {
    Rng rng = make_rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat3 e = reference_blocks()[std::size_t(trial % 7)] * 0.999 + random_block(rng, 1e-3);
        for (long long n = 1; n <= 64; ++n)
            CHECK((geometric_sum(e, n) - oracle::direct_geometric_sum(e, n)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("largest singular triplet") {
    Rng rng = make_rng(62);
    const Mat3 s = random_block(rng, 1.0);
    const SingularTriplet t = largest_singular_triplet(s);
    CHECK((s * t.v - t.value * t.u).norm() < 1e-12);
    CHECK((s.transpose() * t.u - t.value * t.v).norm() < 1e-12);
    Eigen::Index idx;
    t.v.cwiseAbs().maxCoeff(&idx);
    CHECK(t.v(idx) > 0);
}

TEST_CASE("commutator system matches the matrix product") {
    Rng rng = make_rng(63);
    const auto xs = pair_products(reference_blocks());
    const Eigen::MatrixXd a = commutator_system(xs);
    CHECK(a.rows() == 9 * 21);
    const Mat3 db = random_block(rng, 1.0);
    Eigen::VectorXd v(9);
    for (int i = 0; i < 9; ++i) v(i) = db(i / 3, i % 3);
    const Eigen::VectorXd got = a * v;
    for (std::size_t b = 0; b < xs.size(); ++b) {
        const Mat3 want = db * xs[b] - xs[b] * db;
        for (int i = 0; i < 9; ++i) CHECK(std::abs(got(Eigen::Index(9 * b) + i) - want(i / 3, i % 3)) < 1e-13);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    CHECK(numerical_rank(svd.singularValues(), 1e-6) == 8);
}

TEST_CASE("frame alignment recovers a known similarity") {
    Rng rng = make_rng(64);
    const auto ys = pair_products(reference_blocks());
    for (double scale : {1e-4, 1e-2, 0.1}) {
        const Mat3 b0 = Mat3::Identity() + random_block(rng, scale);
        std::vector<Mat3> xs;
        for (const auto& y : ys) xs.push_back(b0.inverse() * y * b0);
        const AlignResult r = gauge_align(xs, ys);
        CHECK(r.rank == 8);
        CHECK(r.commutator_residual < 1e-8);
        // B is fixed up to a scalar.
        const Mat3 ratio = r.B * b0.inverse();
        CHECK((ratio / ratio(0, 0) - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-8);
    }
    // Aligned input: nothing to do.
    const AlignResult same = gauge_align(ys, ys);
    CHECK((same.B - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    // Commuting probes cannot fix the frame.
    const std::vector<Mat3> diag(3, Mat3(Vec3(0.9, 0.8, 0.7).asDiagonal()));
    CHECK_THROWS_AS(gauge_align(diag, diag), DegenerateProbeSet);
}

TEST_CASE("zero non-unital vectors reconstruct to zero") {
    const auto e = reference_blocks();
    const auto pairs = exact_pairs(e, std::vector<Vec3>(7, Vec3::Zero()), 500);
    LinearSystem sys = build_nonunital_system(pairs, e);
    CHECK(sys.labels.front() == "k1_1");
    CHECK(sys.coefficients.rows() == 21);
    const SolveResult s = pinv_solve(sys, Truncation{1e-14, 3});
    CHECK(s.x.cwiseAbs().maxCoeff() == 0.0);
    CHECK(estimate_frame_offset(pairs, e).norm() == 0.0);
}

TEST_CASE("projection identity: u1 . S w / s1 = v1 . w") {
    Rng rng = make_rng(65);
    const auto e = reference_blocks();
    for (int trial = 0; trial < 20; ++trial) {
        const Mat3 p = e[std::size_t(trial % 7)] * e[std::size_t((trial + 3) % 7)] * 0.9999;
        const Mat3 s = geometric_sum(p, 1000 + trial);
        const SingularTriplet t = largest_singular_triplet(s);
        const Vec3 w(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        CHECK(std::abs(t.u.dot(s * w) / t.value - t.v.dot(w)) < 1e-10 * w.norm());
    }
}

TEST_CASE("ideal blocks: 18 informative directions and a 3-dimensional frame family") {
    const auto e = reference_blocks();
    Rng rng = make_rng(66);
    std::vector<Vec3> k;
    for (int g = 0; g < 7; ++g) k.push_back(Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng)) * 1e-3);
    const auto pairs = exact_pairs(e, k, 2000);
    LinearSystem sys = build_nonunital_system(pairs, e);
    const SolveResult s = pinv_solve(sys, Truncation{1e-14, 3});
    REQUIRE(s.singular_values.size() == 21);
    CHECK(s.singular_values(17) >= 1e2 * s.singular_values(18));
    CHECK(s.rank == 18);
    // Recovered up to k_g -> k_g + (I - E_g) a: fit a and compare.
    Eigen::MatrixXd fam(21, 3);
    Eigen::VectorXd diff(21);
    for (int g = 0; g < 7; ++g) {
        fam.middleRows(3 * g, 3) = Mat3::Identity() - e[std::size_t(g)];
        diff.segment<3>(3 * g) = k[std::size_t(g)] - s.x.segment<3>(3 * g);
    }
    const Eigen::VectorXd a = fam.colPivHouseholderQr().solve(diff);
    CHECK((fam * a - diff).cwiseAbs().maxCoeff() < 1e-8 * 1e-3);
}

TEST_CASE("noisy blocks keep a clear 18 + 3 split") {
    const GateSet gs = generate_gate_set_at(derive_set_seed(8, 0), 1e-4);
    std::vector<Mat3> e;
    std::vector<Vec3> k;
    for (const auto& m : gs.noisy()) {
        e.push_back(unital_block(m));
        k.push_back(nonunital_block(m));
    }
    const auto pairs = exact_pairs(e, k, (long long)std::floor(1.0 / (2 * gs.p)));
    LinearSystem sys = build_nonunital_system(pairs, e);
    const SolveResult s = pinv_solve(sys, Truncation{1e-14, 3});
    MESSAGE("s18 / s19 = " << s.singular_values(17) / s.singular_values(18));
    CHECK(s.singular_values(17) >= 1e2 * s.singular_values(18));
}

TEST_CASE("plan sizes pairs from the error rates") {
    const std::vector<double> p(7, 1e-4), hints(7, 1e-4);
    const DoubleMapPlan plan = make_plan(p, hints);
    CHECK(plan.pairs.size() == 21);
    CHECK(plan.pairs.front().n == 5000);
    CHECK(plan.pairs.back().i == 6);
    CHECK(plan.pairs.back().j == 7);
    // An estimate far from the hint falls back to the hint.
    std::vector<double> off = p;
    off[0] = 1e-2;
    CHECK(make_plan(off, hints).pairs.front().n == 5000);
    off[0] = -1.0;
    CHECK(make_plan(off, hints).pairs.front().n == 5000);
    CHECK_THROWS_AS(make_plan(p, std::vector<double>(6, 1e-4)), std::invalid_argument);
}

namespace {
// rms k error over 20 noise seeds, modulo the frame family the solve cannot see.
double k_noise_rms(double p, double sigma) {
    const GateSet gs = generate_gate_set_at(derive_set_seed(9, 0), p);
    std::vector<Mat3> e;
    for (const auto& m : gs.noisy()) e.push_back(unital_block(m));
    const DoubleMapPlan plan = make_plan(std::vector<double>(7, gs.p), std::vector<double>(7, gs.p));
    double acc = 0.0;
    int count = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        GstContext ctx(gs.noisy(), Mat4::Identity(), sigma, 100 + seed);
        const NonunitalResult r = reconstruct_nonunital(ctx, e, plan);
        Eigen::MatrixXd fam(21, 3);
        Eigen::VectorXd diff(21);
        for (int g = 0; g < 7; ++g) {
            fam.middleRows(3 * g, 3) = Mat3::Identity() - e[std::size_t(g)];
            diff.segment<3>(3 * g) = nonunital_block(gs.noisy()[std::size_t(g)]) - r.k[std::size_t(g)];
        }
        const Eigen::VectorXd a = fam.colPivHouseholderQr().solve(diff);
        acc += (diff - fam * a).squaredNorm();
        count += 21;
    }
    return std::sqrt(acc / count);
}
} // namespace

TEST_CASE("noise on the double maps is suppressed by the geometric sum") {
    // With exact unital blocks and T = I, the k error is about sigma / lambda_max ~ sigma * p_pair.
    for (double p : {1e-4, 1e-3}) {
        const double sigma = 0.01, rms = k_noise_rms(p, sigma), scale = sigma * 2 * p;
        MESSAGE("p " << p << ": rms k error " << rms << ", sigma * p_pair " << scale);
        CHECK(rms <= 3.0 * scale);
        CHECK(rms >= scale / 3.0);
    }
}

TEST_CASE("largest singular value saturates near 1/p") {
    Rng rng = make_rng(61);
    const double p = 1e-3;
    const auto ideals = reference_ideal_ptms();
    for (int g = 0; g < 7; ++g) {
        const Mat3 e = unital_block(noisy_gate(ideals[std::size_t(g)], p, rng).ptm);
        const double s = largest_singular_triplet(geometric_sum(e, 4000)).value;
        CHECK(s >= 0.3 / p);
        CHECK(s <= 3.0 / p);
    }
}

TEST_CASE("the trace part of the frame change is invisible to the commutator system") {
    const Eigen::MatrixXd c = commutator_system(reference_blocks());
    Eigen::VectorXd id = Eigen::VectorXd::Zero(9);
    id(0) = id(4) = id(8) = 1.0;
    CHECK((c * id).norm() < 1e-12);
}

TEST_CASE("non-unital report lists pairs then gates") {
    const auto ideals = reference_ideal_ptms();
    GstContext ctx(ideals, Mat4::Identity(), 0.0, 1);
    std::vector<Mat3> e;
    for (const auto& m : ideals) e.push_back(unital_block(m));
    const NonunitalResult r = reconstruct_nonunital(ctx, e, make_plan(std::vector<double>(7, 1e-3), std::vector<double>(7, 1e-3)));
    for (const auto& k : r.k) CHECK(k.norm() < 1e-12);
    const std::string csv = nonunital_csv(r);
    CHECK(csv.rfind("kind,i,j,n,lambda_max,kx,ky,kz\n", 0) == 0);
    CHECK(csv.find("pair,1,2,500,") != std::string::npos);
    CHECK(csv.find("gate,7,") != std::string::npos);
}
