#include "tomolab/gateset.hpp"
#include "tomolab/noise.hpp"
#include "tomolab/oracle.hpp"
#include "tomolab/pipeline.hpp"

#include <doctest.h>

using namespace tomolab;

namespace {
GateSet small_set() { return generate_gate_set_at(derive_set_seed(5, 0), 1e-3); }
} // namespace

TEST_CASE("noiseless oracle returns exact traces and frame-conjugated products") {
    const GateSet gs = small_set();
    GstContext ctx(gs.noisy(), gs.gauge.ptm, 0.0, 1);
    const SequenceSpec s{{1, 4, 6}, 7};
    Ptm prod = power(Ptm(gs.noisy()[0] * gs.noisy()[3] * gs.noisy()[5]), 7);
    CHECK(ctx.measure_trace(s) == doctest::Approx(prod.trace()).epsilon(1e-13));
    const Ptm want = gs.gauge.ptm * prod * gs.gauge.ptm.inverse();
    CHECK((ctx.measure_ptm(s) - want).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("noise touches rows 1-3 only and has the requested size") {
    const GateSet gs = small_set();
    GstContext ctx(gs.noisy(), gs.gauge.ptm, 0.01, 77);
    double acc = 0.0;
    int count = 0;
    for (long long n = 1; n <= 200; ++n) {
        const SequenceSpec s{{2, 3}, n};
        const Ptm m = ctx.measure_ptm(s);
        CHECK(m.row(0) == Eigen::RowVector4d(1, 0, 0, 0));
        const Ptm t = gs.gauge.ptm * power(Ptm(gs.noisy()[1] * gs.noisy()[2]), n) * gs.gauge.ptm.inverse();
        const Ptm d = m - t;
        acc += d.bottomRows<3>().squaredNorm();
        count += 12;
        const double dt = ctx.measure_trace(s) - ctx.true_trace(s);
        acc += dt * dt;
        ++count;
    }
    const double sd = std::sqrt(acc / count);
    CHECK(sd == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("oracle noise does not depend on query order") {
    const GateSet gs = small_set();
    const SequenceSpec a{{1, 2}, 3}, b{{5}, 9};
    GstContext x(gs.noisy(), gs.gauge.ptm, 0.01, 42), y(gs.noisy(), gs.gauge.ptm, 0.01, 42);
    const double xa = x.measure_trace(a), xb = x.measure_trace(b);
    const double yb = y.measure_trace(b), ya = y.measure_trace(a);
    CHECK(xa == ya);
    CHECK(xb == yb);
    // Repeated queries draw fresh noise.
    CHECK(x.measure_trace(a) != xa);
    GstContext z(gs.noisy(), gs.gauge.ptm, 0.01, 43);
    CHECK(z.measure_trace(a) != xa);
}

TEST_CASE("oracle rejects bad sequences and frames") {
    const GateSet gs = small_set();
    GstContext ctx(gs.noisy(), gs.gauge.ptm, 0.0, 1);
    CHECK_THROWS_AS(ctx.measure_trace({{}, 1}), std::invalid_argument);
    CHECK_THROWS_AS(ctx.measure_trace({{8}, 1}), std::invalid_argument);
    CHECK_THROWS_AS(ctx.measure_trace({{1}, 0}), std::invalid_argument);
    CHECK_THROWS_AS(GstContext(gs.noisy(), gs.gauge.ptm, -1.0, 1), std::invalid_argument);
    Mat4 bad = Mat4::Identity();
    bad(0, 1) = 0.1;
    CHECK_THROWS_AS(GstContext(gs.noisy(), bad, 0.0, 1), std::invalid_argument);
}

TEST_CASE("estimates file round-trips exactly") {
    const GateSet gs = small_set();
    GstContext ctx(gs.noisy(), gs.gauge.ptm, 0.01, 9);
    ctx.enable_recording();
    ctx.measure_trace({{1, 2, 3, 4}, 17});
    ctx.measure_trace({{7}, 1});
    ctx.measure_ptm({{2, 5}, 300});
    const std::string text = format_estimates(ctx.recorded(), 0.01, {{1, 1e-3}, {2, 2.5e-4}});
    EstimateSet e = parse_estimates(text);
    CHECK(e.sigma() == 0.01);
    CHECK(e.hints().at(2) == 2.5e-4);
    CHECK(e.records().size() == 3);
    for (const Record& r : ctx.recorded()) {
        if (r.kind == Record::Trace)
            CHECK(e.measure_trace(r.seq) == r.trace);
        else
            CHECK(e.measure_ptm(r.seq) == r.ptm);
    }
    CHECK(e.ptm_repetitions({2, 5}) == 300);
    CHECK_FALSE(e.ptm_repetitions({2, 6}).has_value());
    CHECK(format_estimates(e.records(), e.sigma(), e.hints()) == text);
}

TEST_CASE("estimates parser errors") {
    CHECK_THROWS_AS(EstimateSet({{Record::Trace, {{1}, 1}, 1.0, Ptm::Zero()}, {Record::Trace, {{1}, 1}, 2.0, Ptm::Zero()}}),
                    std::invalid_argument);
    auto message = [](const std::string& text) {
        try {
            parse_estimates(text);
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("TRACE 1 2 1 3.5\nTRACE 1 x 1 2\n").find("line 2") != std::string::npos);
    CHECK(message("# c\n\nBOGUS 1\n").find("line 3") != std::string::npos);
    CHECK(message("TRACE 1 0 3\n").find("n must be") != std::string::npos);
    CHECK(message("TRACE 0 1 3\n").find("gate ids") != std::string::npos);
    CHECK(message("PTM 1 1 1 2 3\n").find("too few") != std::string::npos);
    CHECK(message("SIGMA -1\n").find("SIGMA") != std::string::npos);
    CHECK(message("TRACE 1 1 2 # comment\n").empty());

    EstimateSet empty;
    CHECK_THROWS_AS(empty.measure_trace({{1}, 1}), MissingEstimate);
    CHECK_THROWS_AS(empty.measure_ptm({{1}, 1}), MissingEstimate);
}

TEST_CASE("recorded estimates replay to the same reconstruction") {
    const GateSet gs = generate_gate_set_at(derive_set_seed(3, 2), 2e-4);
    GstContext ctx(gs.noisy(), gs.gauge.ptm, 0.01, gs.oracle_seed);
    ctx.enable_recording();
    const std::vector<double> hints(7, gs.p);
    const Reconstruction live = reconstruct(ctx, gs.ideals(), hints);

    std::map<int, double> h;
    for (int g = 1; g <= 7; ++g) h[g] = gs.p;
    EstimateSet replay = parse_estimates(format_estimates(ctx.recorded(), 0.01, h));
    const Reconstruction again = reconstruct(replay, gs.ideals(), hints);
    for (std::size_t j = 0; j < 7; ++j) CHECK(again.M[j] == live.M[j]);
}

TEST_CASE("trace samples have the requested mean and spread") {
    GstContext z({ptm_from_unitary(unitary_pauli_z())}, Mat4::Identity(), 0.0, 1);
    CHECK(z.measure_trace({{1}, 1}) == doctest::Approx(0.0).epsilon(1e-15));

    const GateSet gs = small_set();
    GstContext ctx(gs.noisy(), gs.gauge.ptm, 0.01, 31);
    const SequenceSpec s{{1, 2}, 5};
    const double truth = ctx.true_trace(s);
    double sum = 0, sq = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double d = ctx.measure_trace(s) - truth;
        sum += d;
        sq += d * d;
    }
    const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) < 4e-4);
    CHECK(sd == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("trace outputs do not depend on the hidden frame") {
    const GateSet gs = small_set();
    Rng rng = make_rng(44);
    GstContext a(gs.noisy(), gs.gauge.ptm, 0.01, 9), b(gs.noisy(), random_gauge_transform(rng).ptm, 0.01, 9);
    for (long long n : {1LL, 3LL, 17LL, 129LL}) {
        const SequenceSpec s{{3, 5, 1}, n};
        CHECK(std::abs(a.measure_trace(s) - b.measure_trace(s)) < 1e-12);
    }
}
