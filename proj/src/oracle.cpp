#include "tomolab/oracle.hpp"

#include "tomolab/csv.hpp"
#include "tomolab/rng.hpp"

#include <algorithm>
#include <sstream>

namespace tomolab {

std::string describe(const SequenceSpec& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.gate_ids.size(); ++i) os << (i ? "," : "") << s.gate_ids[i];
    os << ")^" << s.repetitions;
    return os.str();
}

namespace {
void check_seq(const SequenceSpec& seq, std::size_t ngates) {
    if (seq.gate_ids.empty()) throw std::invalid_argument("empty gate sequence");
    if (seq.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1 in " + describe(seq));
    for (int id : seq.gate_ids)
        if (id < 1 || std::size_t(id) > ngates)
            throw std::invalid_argument("gate id out of range in " + describe(seq));
}
} // namespace

GstContext::GstContext(std::vector<Ptm> gates, Mat4 gauge, double sigma, std::uint64_t seed)
    : gates_(std::move(gates)), gauge_(gauge), gauge_inv_(gauge.inverse()), sigma_(sigma), seed_(seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    if ((gauge.row(0) - Eigen::RowVector4d(1, 0, 0, 0)).cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("gauge transform must have row 0 = (1,0,0,0)");
}

Ptm GstContext::true_product(const std::vector<int>& ids) const {
    Ptm m = Ptm::Identity();
    for (int id : ids) m = m * gates_[std::size_t(id - 1)];
    return m;
}

double GstContext::true_trace(const SequenceSpec& seq) const {
    check_seq(seq, gates_.size());
    return power(true_product(seq.gate_ids), seq.repetitions).trace();
}

std::uint64_t GstContext::key(char kind, const SequenceSpec& seq) const {
    std::uint64_t h = fnv1a(&kind, 1);
    for (int id : seq.gate_ids) h = fnv1a(&id, sizeof id, h);
    return fnv1a(&seq.repetitions, sizeof seq.repetitions, h);
}

std::uint64_t GstContext::next_count(char kind, const SequenceSpec& seq) {
    std::lock_guard<std::mutex> lock(mu_);
    return counts_[key(kind, seq)]++;
}

double GstContext::measure_trace(const SequenceSpec& seq) {
    double t = true_trace(seq);
    if (sigma_ > 0.0) {
        Rng rng = make_rng(seed_, {'T', key('T', seq), next_count('T', seq)});
        t += sigma_ * standard_normal(rng);
    }
    if (recording_) {
        std::lock_guard<std::mutex> lock(mu_);
        records_.push_back({Record::Trace, seq, t, Ptm::Zero()});
    }
    return t;
}

Ptm GstContext::measure_ptm(const SequenceSpec& seq) {
    check_seq(seq, gates_.size());
    Ptm m = gauge_ * power(true_product(seq.gate_ids), seq.repetitions) * gauge_inv_;
    m.row(0) << 1.0, 0.0, 0.0, 0.0;
    if (sigma_ > 0.0) {
        Rng rng = make_rng(seed_, {'P', key('P', seq), next_count('P', seq)});
        for (int r = 1; r < 4; ++r)
            for (int c = 0; c < 4; ++c) m(r, c) += sigma_ * standard_normal(rng);
    }
    if (recording_) {
        std::lock_guard<std::mutex> lock(mu_);
        records_.push_back({Record::Matrix, seq, 0.0, m});
    }
    return m;
}

std::vector<Record> GstContext::recorded() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<Record> out = records_;
    std::stable_sort(out.begin(), out.end(), [](const Record& a, const Record& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.seq < b.seq;
    });
    return out;
}

EstimateSet::EstimateSet(std::vector<Record> records, double sigma) : records_(std::move(records)), sigma_(sigma) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const Record& r = records_[i];
        const bool dup = r.kind == Record::Trace ? !traces_.emplace(r.seq, r.trace).second
                                                 : !ptms_.emplace(r.seq, r.ptm).second;
        if (dup)
            throw std::invalid_argument("record " + std::to_string(i + 1) + ": duplicate estimate for " +
                                        describe(r.seq));
    }
}

double EstimateSet::measure_trace(const SequenceSpec& seq) {
    auto it = traces_.find(seq);
    if (it == traces_.end()) throw MissingEstimate("missing TRACE estimate for " + describe(seq));
    return it->second;
}

Ptm EstimateSet::measure_ptm(const SequenceSpec& seq) {
    auto it = ptms_.find(seq);
    if (it == ptms_.end()) throw MissingEstimate("missing PTM estimate for " + describe(seq));
    return it->second;
}

std::optional<long long> EstimateSet::ptm_repetitions(const std::vector<int>& ids) const {
    auto it = ptms_.lower_bound(SequenceSpec{ids, 0});
    if (it != ptms_.end() && it->first.gate_ids == ids) return it->first.repetitions;
    return std::nullopt;
}

bool EstimateSet::has_ptm_for(const std::vector<int>& ids) const { return ptm_repetitions(ids).has_value(); }

EstimateSet parse_estimates(const std::string& text) {
    std::vector<Record> records;
    std::map<int, double> hints;
    double sigma = 0.0;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + " (record " +
                                  std::to_string(records.size() + 1) + ")";
        const std::string& kw = tok[0];
        if (kw == "SIGMA") {
            if (tok.size() != 2) throw std::invalid_argument(where + ": SIGMA takes one value");
            sigma = parse_double(tok[1], where);
            if (!(sigma >= 0.0)) throw std::invalid_argument(where + ": SIGMA must be >= 0");
        } else if (kw == "HINT") {
            if (tok.size() != 3) throw std::invalid_argument(where + ": HINT takes a gate id and a rate");
            hints[int(parse_int(tok[1], where))] = parse_double(tok[2], where);
        } else if (kw == "TRACE" || kw == "PTM") {
            const bool is_trace = kw == "TRACE";
            const std::size_t nvals = is_trace ? 1 : 16;
            if (tok.size() < 2 + 1 + nvals)
                throw std::invalid_argument(where + ": too few fields for " + kw);
            const std::size_t nids = tok.size() - 1 - 1 - nvals;
            if (nids > 16) throw std::invalid_argument(where + ": too many gate ids");
            Record r;
            r.kind = is_trace ? Record::Trace : Record::Matrix;
            for (std::size_t i = 0; i < nids; ++i) {
                const long long id = parse_int(tok[1 + i], where);
                if (id < 1) throw std::invalid_argument(where + ": gate ids start at 1");
                r.seq.gate_ids.push_back(int(id));
            }
            r.seq.repetitions = parse_int(tok[1 + nids], where);
            if (r.seq.repetitions < 1) throw std::invalid_argument(where + ": n must be >= 1");
            if (is_trace) {
                r.trace = parse_double(tok.back(), where);
            } else {
                for (int k = 0; k < 16; ++k) r.ptm(k / 4, k % 4) = parse_double(tok[2 + nids + k], where);
            }
            records.push_back(std::move(r));
        } else {
            throw std::invalid_argument(where + ": unknown record type '" + kw + "'");
        }
    }
    EstimateSet set(std::move(records), sigma);
    for (auto [g, p] : hints) set.set_hint(g, p);
    return set;
}

EstimateSet load_estimates(const std::string& path) { return parse_estimates(read_file(path)); }

std::string format_estimates(const std::vector<Record>& records, double sigma, const std::map<int, double>& hints) {
    std::string out = "# measurement estimates\nSIGMA " + fmt(sigma) + "\n";
    for (auto [g, p] : hints) out += "HINT " + std::to_string(g) + " " + fmt(p) + "\n";
    for (const Record& r : records) {
        out += r.kind == Record::Trace ? "TRACE" : "PTM";
        for (int id : r.seq.gate_ids) out += " " + std::to_string(id);
        out += " " + std::to_string(r.seq.repetitions);
        if (r.kind == Record::Trace) {
            out += " " + fmt(r.trace);
        } else {
            for (int k = 0; k < 16; ++k) out += " " + fmt(r.ptm(k / 4, k % 4));
        }
        out += "\n";
    }
    return out;
}

} // namespace tomolab
