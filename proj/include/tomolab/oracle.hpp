#pragma once

#include "tomolab/ptm.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tomolab {

struct SequenceSpec {
    std::vector<int> gate_ids; // 1-based
    long long repetitions = 1;
    bool operator<(const SequenceSpec& o) const {
        if (gate_ids != o.gate_ids) return gate_ids < o.gate_ids;
        return repetitions < o.repetitions;
    }
    bool operator==(const SequenceSpec& o) const = default;
};

std::string describe(const SequenceSpec& s);

struct MissingEstimate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Anything that can answer trace and PTM queries: the simulator or a file of estimates.
class MeasurementSource {
public:
    virtual ~MeasurementSource() = default;
    // Tr(M_seq^n), M_seq = M_{ids[0]} M_{ids[1]} ...
    virtual double measure_trace(const SequenceSpec& seq) = 0;
    // Estimate of M_seq^n in the measurement frame.
    virtual Ptm measure_ptm(const SequenceSpec& seq) = 0;
    // Standard deviation of a single trace estimate.
    virtual double sigma() const = 0;
    // A source may dictate the repetition count for a PTM query (recorded data does).
    virtual std::optional<long long> ptm_repetitions(const std::vector<int>& /*ids*/) const {
        return std::nullopt;
    }
};

struct Record {
    enum Kind { Trace, Matrix } kind = Trace;
    SequenceSpec seq;
    double trace = 0.0;
    Ptm ptm = Ptm::Zero();
};

// Hidden truth: noisy gates, frame transform T, noise level. Each call draws fresh noise from a
// stream keyed by (seed, sequence, call count of that sequence), so results do not depend on
// which thread asks first as long as a sequence is owned by one task.
class GstContext : public MeasurementSource {
public:
    GstContext(std::vector<Ptm> gates, Mat4 gauge, double sigma, std::uint64_t seed);

    double measure_trace(const SequenceSpec& seq) override;
    Ptm measure_ptm(const SequenceSpec& seq) override;
    double sigma() const override { return sigma_; }

    // Noise-free values (for tests and benchmarking only).
    double true_trace(const SequenceSpec& seq) const;
    Ptm true_product(const std::vector<int>& ids) const;

    const std::vector<Ptm>& gates() const { return gates_; }
    const Mat4& gauge() const { return gauge_; }

    void enable_recording(bool on = true) { recording_ = on; }
    // Sorted by kind, then sequence.
    std::vector<Record> recorded() const;

private:
    std::uint64_t next_count(char kind, const SequenceSpec& seq);
    std::uint64_t key(char kind, const SequenceSpec& seq) const;

    std::vector<Ptm> gates_;
    Mat4 gauge_;
    Mat4 gauge_inv_;
    double sigma_;
    std::uint64_t seed_;
    bool recording_ = false;
    mutable std::mutex mu_;
    std::map<std::uint64_t, std::uint64_t> counts_;
    std::vector<Record> records_;
};

// Externally supplied estimates, one value per (sequence, n).
class EstimateSet : public MeasurementSource {
public:
    EstimateSet() = default;
    explicit EstimateSet(std::vector<Record> records, double sigma = 0.0);

    double measure_trace(const SequenceSpec& seq) override;
    Ptm measure_ptm(const SequenceSpec& seq) override;
    double sigma() const override { return sigma_; }
    std::optional<long long> ptm_repetitions(const std::vector<int>& ids) const override;

    const std::vector<Record>& records() const { return records_; }
    const std::map<int, double>& hints() const { return hints_; }
    void set_hint(int gate, double p) { hints_[gate] = p; }
    void set_sigma(double s) { sigma_ = s; }

    bool has_trace(const SequenceSpec& seq) const { return traces_.count(seq) != 0; }
    bool has_ptm_for(const std::vector<int>& ids) const;

private:
    std::vector<Record> records_;
    std::map<SequenceSpec, double> traces_;
    std::map<SequenceSpec, Ptm> ptms_;
    std::map<int, double> hints_;
    double sigma_ = 0.0;
};

// Line format, '#' starts a comment:
//   TRACE id id ... n value
//   PTM id id ... n v00 v01 ... v33
//   SIGMA value
//   HINT id p
// Gate ids and n are integers; a record holds at most 16 gate ids.
EstimateSet parse_estimates(const std::string& text);
EstimateSet load_estimates(const std::string& path);
std::string format_estimates(const std::vector<Record>& records, double sigma,
                             const std::map<int, double>& hints);

} // namespace tomolab
