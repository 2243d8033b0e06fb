#include "tomolab/pipeline.hpp"

#include "tomolab/csv.hpp"
#include "tomolab/gateset.hpp"
#include "tomolab/parallel.hpp"
#include "tomolab/rng.hpp"

#include <json.hpp>

#include <sstream>

namespace tomolab {

using nlohmann::json;

std::vector<Ptm> GateSet::noisy() const {
    std::vector<Ptm> out;
    for (const auto& g : gates) out.push_back(g.noisy_ptm);
    return out;
}

std::vector<Ptm> GateSet::ideals() const {
    std::vector<Ptm> out;
    for (const auto& g : gates) out.push_back(g.ideal_ptm);
    return out;
}

std::uint64_t derive_set_seed(std::uint64_t master, std::uint64_t index) {
    Rng r = make_rng(master, {0x5e7, index});
    return r();
}

GateSet generate_gate_set_at(std::uint64_t seed, double p) {
    GateSet s;
    s.seed = seed;
    s.p = p;
    s.gates = reference_gate_records();
    for (std::size_t j = 0; j < s.gates.size(); ++j) {
        Rng rng = make_rng(seed, {1, j});
        try {
            s.noise.push_back(noisy_gate(s.gates[j].ideal_ptm, p, rng));
        } catch (const CalibrationError& e) {
            throw CalibrationError("gate " + std::to_string(j + 1) + ": " + e.what());
        }
        s.gates[j].noisy_ptm = s.noise.back().ptm;
        s.gates[j].error_rate = s.noise.back().achieved_error_rate;
    }
    Rng grng = make_rng(seed, {2});
    try {
        s.gauge = random_gauge_transform(grng);
    } catch (const CalibrationError& e) {
        throw CalibrationError(std::string("frame transform: ") + e.what());
    }
    s.oracle_seed = make_rng(seed, {3})();
    return s;
}

GateSet generate_gate_set(std::uint64_t seed, double p_lo, double p_hi) {
    Rng rng = make_rng(seed, {0});
    return generate_gate_set_at(seed, log_uniform(rng, p_lo, p_hi));
}

namespace {
json mat_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
    return a;
}

json cmat_json(const Eigen::MatrixXcd& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            a.push_back(m(r, c).real());
            a.push_back(m(r, c).imag());
        }
    return a;
}

template <class M>
M mat_from(const json& a) {
    M m;
    if (!a.is_array() || a.size() != std::size_t(m.size())) throw std::runtime_error("gate set: matrix has wrong size");
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = a.at(i++).get<double>();
    return m;
}

template <class M>
M cmat_from(const json& a) {
    M m;
    if (!a.is_array() || a.size() != 2 * std::size_t(m.size())) throw std::runtime_error("gate set: matrix has wrong size");
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double re = a.at(i++).get<double>();
            m(r, c) = cplx(re, a.at(i++).get<double>());
        }
    return m;
}

json noise_json(const NoisyGate& g) {
    return json{{"hamiltonian", mat_json(g.generator.hamiltonian)},
                {"dissipator", cmat_json(g.generator.dissipator)},
                {"t", g.t},
                {"achieved_p", g.achieved_error_rate},
                {"ptm", mat_json(g.ptm)}};
}

NoisyGate noise_from(const json& j, const Ptm& ideal, const std::string& what) {
    NoisyGate g;
    g.generator.hamiltonian = mat_from<Vec3>(j.at("hamiltonian"));
    g.generator.dissipator = cmat_from<Eigen::Matrix3cd>(j.at("dissipator"));
    g.t = j.at("t").get<double>();
    g.achieved_error_rate = j.at("achieved_p").get<double>();
    g.ptm = mat_from<Ptm>(j.at("ptm"));
    const Ptm again = apply_noise(g.generator, g.t, ideal);
    if ((again - g.ptm).cwiseAbs().maxCoeff() > 1e-12)
        throw std::runtime_error("gate set: " + what + " PTM does not match its generator");
    return g;
}
} // namespace

std::string gate_set_to_json(const GateSet& s) {
    json gates = json::array();
    for (std::size_t j = 0; j < s.gates.size(); ++j) {
        json g = noise_json(s.noise[j]);
        g["id"] = s.gates[j].id;
        g["ideal_unitary"] = cmat_json(s.gates[j].ideal_unitary);
        gates.push_back(g);
    }
    json doc{{"format", "ptm-tomolab-gateset/1"},
             {"seed", s.seed},
             {"p", s.p},
             {"oracle_seed", s.oracle_seed},
             {"gates", gates},
             {"frame_transform", noise_json(s.gauge)}};
    return doc.dump(1) + "\n";
}

GateSet gate_set_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("gate set: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "ptm-tomolab-gateset/1")
            throw std::runtime_error("gate set: unknown format");
        GateSet s;
        s.seed = doc.at("seed").get<std::uint64_t>();
        s.p = doc.at("p").get<double>();
        s.oracle_seed = doc.at("oracle_seed").get<std::uint64_t>();
        for (const auto& g : doc.at("gates")) {
            const int id = g.at("id").get<int>();
            GateRecord rec = make_ideal_record(id, cmat_from<Mat2c>(g.at("ideal_unitary")));
            s.noise.push_back(noise_from(g, rec.ideal_ptm, "gate " + std::to_string(id)));
            rec.noisy_ptm = s.noise.back().ptm;
            rec.error_rate = s.noise.back().achieved_error_rate;
            s.gates.push_back(rec);
        }
        if (s.gates.size() != 7) throw std::runtime_error("gate set: expected 7 gates");
        s.gauge = noise_from(doc.at("frame_transform"), Ptm::Identity(), "frame transform");
        return s;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("gate set: ") + e.what());
    }
}

Reconstruction reconstruct(MeasurementSource& src, const std::vector<Ptm>& ideals, const std::vector<double>& p_hints,
                           const PipelineOptions& opt) {
    Reconstruction r;
    UnitalOptions uo;
    uo.trace = opt.trace;
    uo.iterate = opt.iterate_unital;
    r.unital = reconstruct_unital(src, ideals, p_hints, uo, quadruple_list(), opt.threads);
    for (std::size_t j = 0; j < ideals.size(); ++j)
        r.p_hat.push_back(error_rate(assemble(r.unital.E[j], Vec3::Zero()), ideals[j]));
    r.plan = make_plan(r.p_hat, p_hints, &src);
    NonunitalOptions no;
    no.align.strict_rhs = opt.strict_rhs;
    no.affine_correction = opt.affine_correction;
    r.nonunital = reconstruct_nonunital(src, r.unital.E, r.plan, no, opt.threads);
    for (std::size_t j = 0; j < ideals.size(); ++j) r.M.push_back(assemble(r.unital.E[j], r.nonunital.k[j]));
    return r;
}

std::string reconstruction_csv(const Reconstruction& r) {
    CsvWriter w;
    std::vector<std::string> cols{"gate"};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) cols.push_back("m" + std::to_string(a) + std::to_string(b));
    cols.push_back("p_hat");
    w.header(cols);
    for (std::size_t j = 0; j < r.M.size(); ++j) {
        std::vector<std::string> row{fmt((long long)j + 1)};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) row.push_back(fmt(r.M[j](a, b)));
        row.push_back(fmt(r.p_hat[j]));
        w.row(row);
    }
    return w.str();
}

std::string unital_diagnostics_csv(const Reconstruction& r, const std::vector<Quadruple>& quads) {
    CsvWriter w;
    w.header({"entry", "i", "j", "k", "l", "Lambda", "n_used", "predicted_var", "steps", "skipped"});
    for (std::size_t q = 0; q < quads.size(); ++q) {
        const TraceEstimate& e = r.unital.estimates[std::size_t(r.unital.estimate_index[q])];
        std::string skipped;
        for (auto n : e.skipped) skipped += (skipped.empty() ? "" : " ") + std::to_string(n);
        w.row({fmt((long long)q + 1), fmt((long long)quads[q][0]), fmt((long long)quads[q][1]), fmt((long long)quads[q][2]),
               fmt((long long)quads[q][3]), fmt(e.Lambda), fmt(e.n_used), fmt(e.predicted_var),
               fmt((long long)e.history.size()), skipped});
    }
    return w.str();
}

} // namespace tomolab
