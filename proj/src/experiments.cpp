#include "tomolab/experiments.hpp"

#include "tomolab/csv.hpp"
#include "tomolab/gateset.hpp"
#include "tomolab/noise.hpp"
#include "tomolab/nonunital.hpp"
#include "tomolab/oracle.hpp"
#include "tomolab/parallel.hpp"
#include "tomolab/pipeline.hpp"
#include "tomolab/spectral_trace.hpp"
#include "tomolab/unital.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tomolab {

namespace {
void stamp(CsvWriter& w, const ExperimentConfig& cfg, const std::string& command, double lo, double hi) {
    w.meta("command", command);
    w.meta("config_hash", std::to_string(config_hash(cfg, lo, hi)));
    w.meta("seed", std::to_string(cfg.master_seed));
    w.meta("sigma", fmt(cfg.sigma));
    w.meta("p_min", fmt(cfg.p_low(lo)));
    w.meta("p_max", fmt(cfg.p_high(hi)));
}

std::string fmt_i(long long v) { return fmt(v); }
} // namespace

double monte_carlo_trace_variance(const EigenTriple& lambda, long long n, double sigma, int samples, Rng& rng,
                                  int* failures) {
    auto power_sum = [&](long long l) {
        double s = 0.0;
        for (const auto& z : lambda) s += std::pow(z, double(l)).real();
        return s;
    };
    const double t1 = power_sum(n), t2 = power_sum(2 * n), t3 = power_sum(3 * n);
    const double truth = 1.0 + lambda[0].real() + lambda[1].real() + lambda[2].real();
    double acc = 0.0;
    int ok = 0, bad = 0;
    TrackState start;
    start.current = lambda;
    for (int s = 0; s < samples; ++s) {
        const double a = t1 + sigma * standard_normal(rng);
        const double b = t2 + sigma * standard_normal(rng);
        const double c = t3 + sigma * standard_normal(rng);
        try {
            const TrackState st = track_step(start, power_sums_to_candidates(a, b, c), n);
            const double d = st.history.back().Lambda - truth;
            acc += d * d;
            ++ok;
        } catch (const std::runtime_error&) {
            ++bad;
        }
    }
    if (failures) *failures = bad;
    return ok ? acc / ok : std::nan("");
}

TraceVarianceData run_trace_variance(const ExperimentConfig& cfg) {
    validate(cfg, kStudyPLow, kStudyPHigh);
    const double lo = cfg.p_low(kStudyPLow), hi = cfg.p_high(kStudyPHigh);
    const std::vector<std::pair<std::string, Mat2c>> ideals{
        {"I", unitary_identity()}, {"Z", unitary_pauli_z()}, {"S", unitary_phase_s()}};
    const double var_t = cfg.sigma * cfg.sigma;
    TraceVarianceData out;
    out.gates.resize(ideals.size() * std::size_t(cfg.trials));
    parallel_for(std::size_t(cfg.trials), resolve_threads(cfg.threads), [&](std::size_t t) {
        Rng rng = make_rng(cfg.master_seed, {0x7a, t});
        const double p = log_uniform(rng, lo, hi);
        const LindbladGenerator g = random_generator(rng);
        for (std::size_t k = 0; k < ideals.size(); ++k) {
            TraceVarianceGate& r = out.gates[k * std::size_t(cfg.trials) + t];
            const Ptm ideal = ptm_from_unitary(ideals[k].second);
            const NoisyGate ng = calibrate(g, ideal, p);
            r.gate = ideals[k].first;
            r.trial = int(t);
            r.p = ng.achieved_error_rate;
            r.modulus = std::max(1, period(ideal));
            r.lambda = unital_eigenvalues(unital_block(ng.ptm));
            const long long n_max = (long long)std::ceil(20.0 / p);
            const auto grid = log_grid(n_max, 10, r.modulus);
            for (long long n : grid) r.curve.emplace_back(n, variance_model(r.lambda, n, var_t).variance);
            r.n_opt = optimal_n(r.lambda, 1.0, grid, r.modulus);
            r.var_opt = variance_model(r.lambda, r.n_opt, var_t).variance;
            if (cfg.mc_samples > 0 && cfg.sigma > 0.0) {
                Rng mc = make_rng(cfg.master_seed, {0x7b, t, k});
                r.mc_var = monte_carlo_trace_variance(r.lambda, r.n_opt, cfg.sigma, cfg.mc_samples, mc);
            }
        }
    });

    CsvWriter w, s;
    stamp(w, cfg, "trace-variance", kStudyPLow, kStudyPHigh);
    stamp(s, cfg, "trace-variance", kStudyPLow, kStudyPHigh);
    w.header({"gate", "trial", "p", "n", "var_Lambda", "n_opt"});
    s.header({"gate", "trial", "p", "n_opt", "n_opt_p", "var_at_n_opt", "mc_var_at_n_opt"});
    for (const auto& r : out.gates) {
        for (const auto& [n, v] : r.curve) w.row({r.gate, fmt_i(r.trial), fmt(r.p), fmt(n), fmt(v), fmt(r.n_opt)});
        s.row({r.gate, fmt_i(r.trial), fmt(r.p), fmt(r.n_opt), fmt(double(r.n_opt) * r.p), fmt(r.var_opt),
               r.mc_var < 0 ? "" : fmt(r.mc_var)});
    }
    out.csv = w.str();
    out.summary_csv = s.str();
    return out;
}

SingularValueData run_singular_values(const ExperimentConfig& cfg) {
    validate(cfg, kStudyPLow, kStudyPHigh);
    const double lo = cfg.p_low(kStudyPLow), hi = cfg.p_high(kStudyPHigh);
    const std::vector<Ptm> ideals = reference_ideal_ptms();
    SingularValueData out;
    out.gates.resize(std::size_t(cfg.gates));
    parallel_for(out.gates.size(), resolve_threads(cfg.threads), [&](std::size_t g) {
        Rng rng = make_rng(cfg.master_seed, {0x5f, g});
        SingularValueGate& r = out.gates[g];
        r.index = int(g);
        r.ideal_id = int(g % ideals.size()) + 1;
        const double p = log_uniform(rng, lo, hi);
        const NoisyGate ng = noisy_gate(ideals[std::size_t(r.ideal_id - 1)], p, rng);
        r.p = ng.achieved_error_rate;
        const Mat3 e = unital_block(ng.ptm);
        r.n_probe = std::max<long long>(1, (long long)std::floor(4.0 / p));
        std::vector<long long> grid = log_grid((long long)std::ceil(100.0 / p), 10, 1);
        grid.push_back(r.n_probe);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (long long n : grid) {
            const double s = largest_singular_triplet(geometric_sum(e, n)).value;
            r.curve.emplace_back(n, s);
            if (n == r.n_probe) r.scaled_at_probe = s * r.p;
        }
    });
    CsvWriter w;
    stamp(w, cfg, "singular-values", kStudyPLow, kStudyPHigh);
    w.header({"gate", "ideal", "p", "n", "lambda_max", "lambda_max_p"});
    for (const auto& r : out.gates)
        for (const auto& [n, s] : r.curve)
            w.row({fmt_i(r.index), fmt_i(r.ideal_id), fmt(r.p), fmt(n), fmt(s), fmt(s * r.p)});
    out.csv = w.str();
    return out;
}

BenchmarkData run_benchmark(const ExperimentConfig& cfg) {
    validate(cfg, kBenchPLow, kBenchPHigh);
    const double lo = cfg.p_low(kBenchPLow), hi = cfg.p_high(kBenchPHigh);
    struct SetOut {
        std::vector<BenchmarkPoint> points;
        std::string error;
    };
    std::vector<SetOut> sets(std::size_t(cfg.num_gate_sets));
    parallel_for(sets.size(), resolve_threads(cfg.threads), [&](std::size_t s) {
        try {
            const GateSet gs = generate_gate_set(derive_set_seed(cfg.master_seed, s), lo, hi);
            GstContext ctx(gs.noisy(), gs.gauge.ptm, cfg.sigma, gs.oracle_seed);
            PipelineOptions po;
            po.trace.schedule_cap = cfg.schedule_cap;
            po.strict_rhs = cfg.strict_paper_rhs;
            po.iterate_unital = cfg.iterate_unital;
            const std::vector<double> hints(gs.gates.size(), gs.p);
            const Reconstruction rec = reconstruct(ctx, gs.ideals(), hints, po);
            GaugeFitOptions go;
            go.strict_rhs = cfg.strict_paper_rhs;
            const GaugeTransform t = fit_gauge(rec.M, gs.noisy(), go);
            for (const auto& d : distances(rec.M, t.matrix(), gs.noisy(), gs.ideals()))
                sets[s].points.push_back({int(s), d.gate, gs.p, d.D, d.D_r});
        } catch (const std::exception& e) {
            sets[s].error = e.what();
        }
    });

    BenchmarkData out;
    for (std::size_t s = 0; s < sets.size(); ++s) {
        if (!sets[s].error.empty()) out.failures.emplace_back(int(s), sets[s].error);
        out.points.insert(out.points.end(), sets[s].points.begin(), sets[s].points.end());
    }
    std::vector<DistanceRow> rows;
    std::vector<double> d, ratio;
    for (const auto& p : out.points) {
        rows.push_back({p.gate, p.D, p.D_r});
        if (p.D > 0.0) {
            d.push_back(p.D);
            ratio.push_back(p.D_r / p.D);
        }
    }
    try {
        out.fit = fit_scaling(rows);
        out.fitted = true;
    } catch (const InsufficientSpan& e) {
        out.fit_error = e.what();
    }
    if (d.size() >= 2) out.spearman_ratio = spearman(ratio, d);

    CsvWriter w, f;
    stamp(w, cfg, "benchmark", kBenchPLow, kBenchPHigh);
    w.meta("sets", std::to_string(cfg.num_gate_sets));
    w.meta("failed_sets", std::to_string(out.failures.size()));
    for (const auto& [s, msg] : out.failures) w.meta("failure_set_" + std::to_string(s), msg);
    w.header({"set", "gate", "p", "D", "D_r"});
    for (const auto& p : out.points) w.row({fmt_i(p.set), fmt_i(p.gate), fmt(p.p), fmt(p.D), fmt(p.D_r)});
    stamp(f, cfg, "benchmark", kBenchPLow, kBenchPHigh);
    if (!out.fitted) f.meta("fit_error", out.fit_error);
    f.header({"sigma", "slope", "intercept", "points", "spearman_ratio_vs_D", "failed_sets"});
    f.row({fmt(cfg.sigma), out.fitted ? fmt(out.fit.slope) : "", out.fitted ? fmt(out.fit.intercept) : "",
           fmt_i(out.fitted ? out.fit.points : 0), fmt(out.spearman_ratio), fmt_i((long long)out.failures.size())});
    out.csv = w.str();
    out.fit_csv = f.str();
    return out;
}

std::vector<ValidationCheck> run_validation(const ExperimentConfig& cfg) {
    validate(cfg, kStudyPLow, kStudyPHigh);
    std::vector<ValidationCheck> out;
    const std::vector<Ptm> ideals = reference_ideal_ptms();
    auto run = [&](const std::string& name, auto&& body) {
        ValidationCheck c{name, false, ""};
        try {
            body(c);
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        out.push_back(c);
    };

    run("noiseless trace estimates are exact", [&](ValidationCheck& c) {
        double worst = 0.0;
        for (int g = 0; g < 14; ++g) {
            Rng rng = make_rng(cfg.master_seed, {0x11, std::uint64_t(g)});
            const double p = log_uniform(rng, kStudyPLow, kStudyPHigh);
            const Ptm ideal = ideals[std::size_t(g % 7)];
            const NoisyGate ng = noisy_gate(ideal, p, rng);
            GstContext ctx({ng.ptm}, Mat4::Identity(), 0.0, 1);
            const TraceEstimate e = estimate_trace(ctx, {1}, ideal, p);
            worst = std::max(worst, std::abs(e.Lambda - trace(ng.ptm)));
        }
        c.pass = worst <= 1e-8;
        c.detail = "max error " + fmt(worst);
    });
    run("quadruple system rank", [&](ValidationCheck& c) {
        const QuadrupleCheck q = check_quadruples(ideals, quadruple_list());
        c.pass = q.rank == 55 && q.gap >= 1e6;
        c.detail = q.summary();
    });
    run("generated gates are physical", [&](ValidationCheck& c) {
        const GateSet gs = generate_gate_set(derive_set_seed(cfg.master_seed, 0), kBenchPLow, kBenchPHigh);
        double margin = 1.0, choi = 1.0;
        bool tp = true;
        for (const auto& g : gs.gates) {
            tp = tp && g.noisy_ptm.row(0) == Eigen::RowVector4d(1, 0, 0, 0);
            margin = std::min(margin, cp_bound_margin(unital_block(g.noisy_ptm), nonunital_block(g.noisy_ptm)));
            choi = std::min(choi, choi_min_eigenvalue(g.noisy_ptm));
        }
        c.pass = tp && margin >= -1e-9 && choi >= -1e-9;
        c.detail = "min CP margin " + fmt(margin) + ", min Choi eigenvalue " + fmt(choi);
    });
    run("ideal gates reconstruct exactly", [&](ValidationCheck& c) {
        GstContext ctx(ideals, Mat4::Identity(), 0.0, 1);
        const Reconstruction r = reconstruct(ctx, ideals, std::vector<double>(7, 1e-4));
        double worst = 0.0;
        for (std::size_t j = 0; j < ideals.size(); ++j) worst = std::max(worst, (r.M[j] - ideals[j]).cwiseAbs().maxCoeff());
        c.pass = worst <= 1e-9;
        c.detail = "max entry error " + fmt(worst);
    });
    run("noiseless reconstruction beats the gate error", [&](ValidationCheck& c) {
        const GateSet gs = generate_gate_set_at(derive_set_seed(cfg.master_seed, 1), 1e-4);
        GstContext ctx(gs.noisy(), gs.gauge.ptm, 0.0, gs.oracle_seed);
        const Reconstruction r = reconstruct(ctx, gs.ideals(), std::vector<double>(7, gs.p));
        const GaugeTransform t = fit_gauge(r.M, gs.noisy());
        double worst = 0.0;
        for (const auto& d : distances(r.M, t.matrix(), gs.noisy(), gs.ideals())) worst = std::max(worst, d.D_r / d.D);
        c.pass = worst < 1.0;
        c.detail = "max D_r/D " + fmt(worst);
    });
    return out;
}

} // namespace tomolab
