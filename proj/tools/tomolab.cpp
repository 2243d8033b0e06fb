// ptm-tomolab: gate-set generation, two-stage reconstruction and the figure/benchmark studies.

#include "tomolab/bench.hpp"
#include "tomolab/config.hpp"
#include "tomolab/csv.hpp"
#include "tomolab/experiments.hpp"
#include "tomolab/gateset.hpp"
#include "tomolab/oracle.hpp"
#include "tomolab/parallel.hpp"
#include "tomolab/pipeline.hpp"
#include "tomolab/unital.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace tomolab;

namespace {

constexpr int kOk = 0, kConfigError = 2, kPipelineError = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
}

void emit(const ExperimentConfig& cfg, const std::string& name, const std::string& content) {
    const std::string path = out_path(cfg, name);
    write_file(path, content);
    std::cout << "wrote " << path << "\n";
}

int cmd_gen_gateset(const ExperimentConfig& cfg) {
    validate(cfg, kBenchPLow, kBenchPHigh);
    GateSet gs;
    try {
        gs = generate_gate_set(derive_set_seed(cfg.master_seed, 0), cfg.p_low(kBenchPLow), cfg.p_high(kBenchPHigh));
    } catch (const CalibrationError& e) {
        throw StageError("noise_model", "", e.what());
    }
    emit(cfg, "gateset.json", gate_set_to_json(gs));
    return kOk;
}

int cmd_trace_variance(const ExperimentConfig& cfg) {
    const TraceVarianceData d = run_trace_variance(cfg);
    emit(cfg, "trace_variance.csv", d.csv);
    emit(cfg, "trace_variance_summary.csv", d.summary_csv);
    return kOk;
}

int cmd_singular_values(const ExperimentConfig& cfg) {
    const SingularValueData d = run_singular_values(cfg);
    emit(cfg, "singular_values.csv", d.csv);
    return kOk;
}

int cmd_reconstruct(const ExperimentConfig& cfg, const std::string& export_path) {
    validate(cfg, kBenchPLow, kBenchPHigh);
    if (cfg.input.empty()) throw ConfigError("reconstruct: --input is required");
    std::string text;
    try {
        text = read_file(cfg.input);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    const auto first = text.find_first_not_of(" \t\r\n");
    const bool is_gate_set = first != std::string::npos && text[first] == '{';

    PipelineOptions po;
    po.trace.schedule_cap = cfg.schedule_cap;
    po.strict_rhs = cfg.strict_paper_rhs;
    po.iterate_unital = cfg.iterate_unital;
    po.threads = resolve_threads(cfg.threads);
    const std::vector<Ptm> ideals = reference_ideal_ptms();

    const QuadrupleCheck qc = check_quadruples(ideals, quadruple_list());
    std::cerr << "quadruple list: " << qc.summary() << "\n";

    if (is_gate_set) {
        GateSet gs;
        try {
            gs = gate_set_from_json(text);
        } catch (const std::exception& e) {
            throw InputError(e.what());
        }
        GstContext ctx(gs.noisy(), gs.gauge.ptm, cfg.sigma, gs.oracle_seed);
        ctx.enable_recording(!export_path.empty());
        std::vector<double> hints;
        for (const auto& n : gs.noise) hints.push_back(n.achieved_error_rate);
        const Reconstruction r = reconstruct(ctx, gs.ideals(), hints, po);
        GaugeFitOptions go;
        go.strict_rhs = cfg.strict_paper_rhs;
        const GaugeTransform t = fit_gauge(r.M, gs.noisy(), go);
        CsvWriter w;
        w.meta("gauge_warn", t.warn ? "1" : "0");
        w.header({"gate", "D", "D_r"});
        for (const auto& d : distances(r.M, t.matrix(), gs.noisy(), gs.ideals()))
            w.row({fmt((long long)d.gate), fmt(d.D), fmt(d.D_r)});
        emit(cfg, "reconstruction.csv", reconstruction_csv(r));
        emit(cfg, "unital_diagnostics.csv", unital_diagnostics_csv(r));
        emit(cfg, "nonunital.csv", nonunital_csv(r.nonunital));
        emit(cfg, "distances.csv", w.str());
        if (!export_path.empty()) {
            std::map<int, double> h;
            for (std::size_t j = 0; j < hints.size(); ++j) h[int(j) + 1] = hints[j];
            write_file(export_path, format_estimates(ctx.recorded(), cfg.sigma, h));
            std::cout << "wrote " << export_path << "\n";
        }
        return kOk;
    }

    EstimateSet est;
    try {
        est = parse_estimates(text);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    std::vector<double> hints;
    for (int g = 1; g <= 7; ++g) {
        const auto it = est.hints().find(g);
        if (it == est.hints().end())
            throw InputError("estimates file has no HINT record for gate " + std::to_string(g));
        hints.push_back(it->second);
    }
    const Reconstruction r = reconstruct(est, ideals, hints, po);
    emit(cfg, "reconstruction.csv", reconstruction_csv(r));
    emit(cfg, "unital_diagnostics.csv", unital_diagnostics_csv(r));
    emit(cfg, "nonunital.csv", nonunital_csv(r.nonunital));
    return kOk;
}

int cmd_benchmark(const ExperimentConfig& cfg) {
    const BenchmarkData d = run_benchmark(cfg);
    emit(cfg, "benchmark.csv", d.csv);
    emit(cfg, "benchmark_fit.csv", d.fit_csv);
    if (d.fitted)
        std::cout << "log10 D_r = " << d.fit.slope << " log10 D + " << d.fit.intercept << " (" << d.fit.points
                  << " points), Spearman(D_r/D, D) = " << d.spearman_ratio << "\n";
    else
        std::cout << "no fit: " << d.fit_error << "\n";
    for (const auto& [s, msg] : d.failures) std::cerr << "set " << s << " failed: " << msg << "\n";
    return d.failures.empty() ? kOk : kPipelineError;
}

int cmd_validate(const ExperimentConfig& cfg) {
    bool all = true;
    for (const auto& c : run_validation(cfg)) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        all = all && c.pass;
    }
    return all ? kOk : kPipelineError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage Pauli transfer matrix tomography simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, seed, sigma, p_min, p_max, sets, out, threads, input, schedule_cap, export_path;
    bool strict = false, iterate = false;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--seed", seed, "master seed (unsigned 64-bit)");
    app.add_option("--sigma", sigma, "standard deviation of each estimate");
    app.add_option("--p-min", p_min, "lower end of the error-rate range");
    app.add_option("--p-max", p_max, "upper end of the error-rate range");
    app.add_option("--sets", sets, "number of gate sets (benchmark)");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads (0: all cores)");
    app.add_option("--schedule-cap", schedule_cap, "largest repetition count in the trace schedule");
    app.add_flag("--strict-paper-rhs", strict, "use Y and E as alignment right-hand sides");
    app.add_flag("--iterate", iterate, "iterate the unital solve around the current estimate");

    auto* gen = app.add_subcommand("gen-gateset", "write a calibrated noisy gate set");
    auto* tv = app.add_subcommand("trace-variance", "variance of the trace estimate vs n (I, Z, S)");
    auto* sv = app.add_subcommand("singular-values", "largest singular value of the geometric sum vs n");
    auto* rc = app.add_subcommand("reconstruct", "run the reconstruction on a gate set or estimates file");
    rc->add_option("--input", input, "gate-set JSON or estimates file")->required();
    rc->add_option("--export-estimates", export_path, "write the simulated estimates (gate-set input only)");
    auto* bm = app.add_subcommand("benchmark", "reconstruct random gate sets and fit D_r against D");
    auto* va = app.add_subcommand("validate", "quick self-checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc_code = app.exit(e);
        return rc_code == 0 ? kOk : kConfigError;
    }

    ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
        const std::pair<const char*, std::string*> overrides[] = {
            {"seed", &seed},   {"sigma", &sigma}, {"p_min", &p_min},     {"p_max", &p_max},
            {"sets", &sets},   {"out", &out},     {"threads", &threads}, {"schedule_cap", &schedule_cap},
            {"input", &input}};
        for (const auto& [key, value] : overrides)
            if (!value->empty()) apply_setting(cfg, key, *value);
        if (strict) cfg.strict_paper_rhs = true;
        if (iterate) cfg.iterate_unital = true;
        fs::create_directories(cfg.output_dir);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (*gen) return cmd_gen_gateset(cfg);
        if (*tv) return cmd_trace_variance(cfg);
        if (*sv) return cmd_singular_values(cfg);
        if (*rc) return cmd_reconstruct(cfg, export_path);
        if (*bm) return cmd_benchmark(cfg);
        if (*va) return cmd_validate(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kPipelineError;
    }
    return kConfigError;
}
