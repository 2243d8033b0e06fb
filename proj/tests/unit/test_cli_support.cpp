#include "tomolab/config.hpp"
#include "tomolab/csv.hpp"
#include "tomolab/experiments.hpp"
#include "tomolab/parallel.hpp"
#include "tomolab/pipeline.hpp"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <limits>

using namespace tomolab;

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config("# comment\nseed = 42\nsigma=0.02 # trailing\n\np_min=1e-5\nsets=3\niterate=yes\n");
    CHECK(c.master_seed == 42);
    CHECK(c.sigma == 0.02);
    CHECK(c.p_min == 1e-5);
    CHECK_FALSE(c.p_max.has_value());
    CHECK(c.num_gate_sets == 3);
    CHECK(c.iterate_unital);

    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("seed=1\nbogus=2\n").find("line 2") != std::string::npos);
    CHECK(message("seed=1\nbogus=2\n").find("unknown key") != std::string::npos);
    CHECK(message("sigma=abc\n").find("sigma") != std::string::npos);
    CHECK(message("seed=-4\n").find("line 1") != std::string::npos);
    CHECK(message("iterate=maybe\n").find("boolean") != std::string::npos);
    CHECK(message("just words\n").find("key=value") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), ConfigError);
}

TEST_CASE("config validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(validate(c, 1e-6, 1e-3));
    c.sigma = -1;
    CHECK_THROWS_AS(validate(c, 1e-6, 1e-3), ConfigError);
    c = {};
    c.p_min = 1e-2;
    c.p_max = 1e-3;
    CHECK_THROWS_AS(validate(c, 1e-6, 1e-3), ConfigError);
    c = {};
    c.p_max = 0.6;
    CHECK_THROWS_AS(validate(c, 1e-6, 1e-3), ConfigError);
    c = {};
    c.num_gate_sets = 0;
    CHECK_THROWS_AS(validate(c, 1e-6, 1e-3), ConfigError);
}

TEST_CASE("config hash ignores output location and threads") {
    ExperimentConfig a, b;
    b.output_dir = "/tmp/elsewhere";
    b.threads = 8;
    CHECK(config_hash(a, 1e-6, 1e-3) == config_hash(b, 1e-6, 1e-3));
    b.sigma = 0.02;
    CHECK(config_hash(a, 1e-6, 1e-3) != config_hash(b, 1e-6, 1e-3));
    // Pinned so that a silent change in the canonical text shows up.
    CHECK(canonical(a, 1e-6, 1e-3).rfind("seed=1\nsigma=0.01\np_min=1e-06\np_max=0.001\n", 0) == 0);
}

TEST_CASE("number formatting round-trips") {
    CHECK(fmt(0.1) == "0.1");
    CHECK(fmt(1e-6) == "1e-06");
    CHECK(fmt(42LL) == "42");
    Rng rng = make_rng(81);
    for (int i = 0; i < 1000; ++i) {
        const double v = standard_normal(rng) * std::pow(10.0, double(int(rng() % 40)) - 20.0);
        CHECK(parse_double(fmt(v), "v") == v);
    }
    CHECK(parse_double(fmt(std::numeric_limits<double>::infinity()), "v") == std::numeric_limits<double>::infinity());
    CHECK(std::isnan(parse_double(fmt(std::nan("")), "v")));
    CHECK_THROWS_AS(parse_double("1.5x", "v"), std::invalid_argument);
    CHECK_THROWS_AS(parse_int("1.5", "v"), std::invalid_argument);
    CHECK(parse_int("-7", "v") == -7);
}

TEST_CASE("CSV writer puts metadata first") {
    CsvWriter w;
    w.meta("seed", "1");
    w.header({"a", "b"});
    w.row({"1", "2"});
    w.row({"3", "4"});
    CHECK(w.str() == "# seed=1\na,b\n1,2\n3,4\n");
}

TEST_CASE("gate-set JSON round-trips and is reproducible") {
    const GateSet a = generate_gate_set(derive_set_seed(1, 0), 1e-6, 1e-3);
    const std::string text = gate_set_to_json(a);
    const GateSet b = gate_set_from_json(text);
    CHECK(b.seed == a.seed);
    CHECK(b.p == a.p);
    CHECK(b.oracle_seed == a.oracle_seed);
    for (std::size_t g = 0; g < 7; ++g) {
        CHECK(b.noisy()[g] == a.noisy()[g]);
        CHECK(b.ideals()[g] == a.ideals()[g]);
    }
    CHECK(b.gauge.ptm == a.gauge.ptm);
    CHECK(gate_set_to_json(b) == text);
    CHECK(gate_set_to_json(generate_gate_set(derive_set_seed(1, 0), 1e-6, 1e-3)) == text);
    CHECK(gate_set_to_json(generate_gate_set(derive_set_seed(1, 1), 1e-6, 1e-3)) != text);
    CHECK(a.p >= 1e-6);
    CHECK(a.p <= 1e-3);

    CHECK_THROWS(gate_set_from_json("{"));
    CHECK_THROWS(gate_set_from_json("{\"format\": \"other\"}"));
    // A tampered PTM no longer matches its generator.
    std::string bad = text;
    const auto pos = bad.find("\"ptm\"");
    REQUIRE(pos != std::string::npos);
    const auto digit = bad.find_first_of("123456789", bad.find('[', pos) + 3);
    bad[digit] = bad[digit] == '9' ? '8' : char(bad[digit] + 1);
    CHECK_THROWS(gate_set_from_json(bad));
}

TEST_CASE("parallel_for runs every index and rethrows the lowest failure") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 8, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 7 || i == 31 || i == 44) throw std::runtime_error("index " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "index 7");
    }
}

TEST_CASE("thread count honours the environment cap") {
    setenv("PTM_TOMOLAB_THREADS", "2", 1);
    CHECK(resolve_threads(8) == 2);
    CHECK(resolve_threads(1) == 1);
    CHECK(resolve_threads(0) <= 2);
    setenv("PTM_TOMOLAB_THREADS", "junk", 1);
    CHECK(resolve_threads(3) == 3);
    unsetenv("PTM_TOMOLAB_THREADS");
    CHECK(resolve_threads(5) == 5);
    CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("trace variance scales with sigma squared") {
    ExperimentConfig c;
    c.trials = 4;
    c.mc_samples = 0;
    c.sigma = 0.01;
    const TraceVarianceData a = run_trace_variance(c);
    c.sigma = 0.04;
    const TraceVarianceData b = run_trace_variance(c);
    REQUIRE(a.gates.size() == 12);
    for (std::size_t i = 0; i < a.gates.size(); ++i) {
        CHECK(b.gates[i].n_opt == a.gates[i].n_opt);
        CHECK(b.gates[i].var_opt == doctest::Approx(16.0 * a.gates[i].var_opt).epsilon(1e-12));
    }
    CHECK(a.summary_csv.find("# command=trace-variance") == 0);
}

TEST_CASE("singular-value curves start at 1 and grow") {
    ExperimentConfig c;
    c.gates = 7;
    const SingularValueData d = run_singular_values(c);
    for (const auto& g : d.gates) {
        REQUIRE(!g.curve.empty());
        CHECK(g.curve.front().first == 1);
        CHECK(g.curve.front().second == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.curve.back().second > g.curve.front().second);
        CHECK(g.scaled_at_probe > 0.0);
    }
}

TEST_CASE("self-checks pass") {
    for (const auto& c : run_validation(ExperimentConfig{})) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.pass);
    }
}
