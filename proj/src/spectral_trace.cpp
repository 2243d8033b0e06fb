#include "tomolab/spectral_trace.hpp"

#include "tomolab/csv.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace tomolab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double min_pair_gap(const EigenTriple& z) {
    return std::min({std::abs(z[0] - z[1]), std::abs(z[0] - z[2]), std::abs(z[1] - z[2])});
}

double max_pair_gap(const EigenTriple& z) {
    return std::max({std::abs(z[0] - z[1]), std::abs(z[0] - z[2]), std::abs(z[1] - z[2])});
}

EigenTriple powers(const EigenTriple& l, long long n) {
    EigenTriple out;
    for (int a = 0; a < 3; ++a) out[a] = std::pow(l[a], double(n));
    return out;
}

// min over matchings of the largest matched distance
double multiset_distance(const EigenTriple& a, const EigenTriple& b) {
    std::array<int, 3> p{0, 1, 2};
    double best = kInf;
    do {
        double m = 0.0;
        for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(a[i] - b[p[i]]));
        best = std::min(best, m);
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}
} // namespace

TraceSchedule build_schedule(int m, double p, long long cap) {
    if (m < 1) throw std::invalid_argument("build_schedule: period must be >= 1");
    if (!(p > 0.0 && p < 0.5)) throw std::invalid_argument("build_schedule: p must lie in (0, 0.5)");
    TraceSchedule s;
    s.period = m;
    s.k_max = std::max(0, int(std::floor(std::log2(0.4 / p))));
    std::vector<long long> v;
    if (m == 1) v.push_back(1);
    for (int k = 0; k <= s.k_max; ++k) v.push_back(m * ((1LL << k) / m) + 1);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (cap > 0) {
        std::vector<long long> kept;
        for (long long n : v)
            if (kept.empty() || n <= cap) kept.push_back(n);
        v = std::move(kept);
    }
    s.values = std::move(v);
    return s;
}

EigenTriple power_sums_to_candidates(double tn, double t2n, double t3n) {
    const double e1 = tn;
    const double e2 = (tn * tn - t2n) / 2.0;
    const double e3 = (tn * tn * tn - 3.0 * tn * t2n + 2.0 * t3n) / 6.0;
    Mat3 c;
    c << e1, -e2, e3, 1, 0, 0, 0, 1, 0;
    Eigen::EigenSolver<Mat3> es(c, false);
    const auto ev = es.eigenvalues();
    EigenTriple out{ev(0), ev(1), ev(2)};
    std::sort(out.begin(), out.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

TrackState track_step(const TrackState& state, const EigenTriple& mu, long long n, double tolerance) {
    if (n < 1) throw std::invalid_argument("track_step: n must be >= 1");
    struct Cand {
        double cost = 0.0;
        double maxdev = 0.0;
        EigenTriple lam{};
    };
    const EigenTriple& prev = state.current;
    std::vector<Cand> cands;
    std::array<int, 3> perm{0, 1, 2};
    do {
        Cand c;
        for (int a = 0; a < 3; ++a) {
            const cplx m = mu[perm[a]];
            const cplx pv = prev[a];
            const double am = std::arg(m);
            const double j = n == 1 ? 0.0 : std::round((double(n) * std::arg(pv) - am) / (2.0 * kPi));
            c.lam[a] = std::polar(std::pow(std::abs(m), 1.0 / double(n)), (am + 2.0 * kPi * j) / double(n));
            const double dev = std::abs(c.lam[a] - pv);
            c.cost += dev;
            c.maxdev = std::max(c.maxdev, dev);
        }
        cands.push_back(c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.cost < b.cost; });
    const Cand& best = cands.front();

    if (state.radius > 0.0) {
        const double spacing = kPi / (2.0 * double(n));
        for (std::size_t i = 1; i < cands.size(); ++i) {
            if (multiset_distance(cands[i].lam, best.lam) <= spacing) continue;
            const Cand& alt = cands[i];
            if (alt.cost < 1.1 * best.cost && alt.maxdev <= state.radius && best.maxdev <= state.radius) {
                std::ostringstream os;
                os << "ambiguous branch at n=" << n << ": best cost " << best.cost << ", alternative " << alt.cost
                   << ", confidence radius " << state.radius;
                throw TrackingAmbiguity(os.str());
            }
            break;
        }
    }

    // Conjugation symmetrisation.
    std::array<int, 3> p{0, 1, 2}, bp{0, 1, 2};
    double resid = kInf;
    do {
        double m = 0.0;
        for (int a = 0; a < 3; ++a) m = std::max(m, std::abs(best.lam[a] - std::conj(best.lam[p[a]])));
        if (m < resid) {
            resid = m;
            bp = p;
        }
    } while (std::next_permutation(p.begin(), p.end()));
    double scale = 1.0;
    for (const auto& z : best.lam) scale = std::max(scale, std::abs(z));
    if (!(resid <= std::max(1e-6 * scale, tolerance))) {
        std::ostringstream os;
        os << "eigenvalue estimate at n=" << n << " is not conjugation-closed (residual " << resid
           << ", tolerance " << std::max(1e-6 * scale, tolerance) << ")";
        throw TrackingError(os.str());
    }
    TrackStep step;
    step.n = n;
    step.mu = mu;
    for (int a = 0; a < 3; ++a) step.lambda[a] = 0.5 * (best.lam[a] + std::conj(best.lam[bp[a]]));
    step.Lambda = 1.0 + step.lambda[0].real() + step.lambda[1].real() + step.lambda[2].real();

    TrackState out = state;
    out.current = step.lambda;
    out.history.push_back(step);
    return out;
}

const char* to_string(VarianceFormula f) {
    switch (f) {
    case VarianceFormula::General: return "general";
    case VarianceFormula::PairLimit: return "pair-limit";
    case VarianceFormula::TripleLimit: return "triple-limit";
    case VarianceFormula::ClusterSeries: return "cluster-series";
    case VarianceFormula::Singular: return "singular";
    }
    return "?";
}

namespace {

std::array<cplx, 3> general_gradient(const EigenTriple& l, long long nn, double* denom_out) {
    const double n = double(nn);
    const cplx l1 = l[0], l2 = l[1], l3 = l[2];
    const cplx a = std::pow(l1, n), b = std::pow(l2, n), c = std::pow(l3, n);
    const cplx pre = 1.0 / (a * b * c);
    const cplx den = (a - b) * (a - c) * (b - c) * n;
    if (denom_out) *denom_out = std::abs((a - b) * (a - c) * (b - c));
    std::array<cplx, 3> g;
    g[0] = pre * (l1 * b * b * c * c * (b - c) + a * a * a * (b * b * l3 - l2 * c * c) + a * a * (-b * b * b * l3 + l2 * c * c * c)) / den;
    g[1] = pre * (a * a * a * (-b * l3 + l2 * c) + a * (b * b * b * l3 - l2 * c * c * c) + l1 * (-b * b * b * c + b * c * c * c)) / (2.0 * den);
    g[2] = pre * (l1 * b * c * (b - c) + a * a * (b * l3 - l2 * c) + a * (-b * b * l3 + l2 * c * c)) / (3.0 * den);
    return g;
}

// l1 simple, l3 double.
std::array<cplx, 3> pair_limit_gradient(cplx l1, cplx l3, long long nn) {
    const double n = double(nn);
    const cplx a = std::pow(l1, n), c = std::pow(l3, n);
    const cplx d2 = (a - c) * (a - c) * n * n;
    std::array<cplx, 3> g;
    g[0] = (a * a * l3 * c * (1.0 - 3.0 * n) + l1 * c * c * c * n + a * a * a * l3 * (2.0 * n - 1.0)) / (a * c * d2);
    g[1] = (-a * a * a * l3 * (n - 1.0) + a * l3 * c * c * (3.0 * n - 1.0) - 2.0 * l1 * c * c * c * n) / (a * c * c * 2.0 * d2);
    g[2] = (a * l3 * c * (1.0 - 2.0 * n) + a * a * l3 * (n - 1.0) + l1 * c * c * n) / (a * c * c * 3.0 * d2);
    return g;
}

std::array<cplx, 3> triple_limit_gradient(cplx l, long long nn) {
    const double n = double(nn);
    const double n3 = n * n * n;
    std::array<cplx, 3> g;
    g[0] = std::pow(l, 1.0 - n) * (1.0 - 5.0 * n + 6.0 * n * n) / (2.0 * n3);
    g[1] = -std::pow(l, 1.0 - 2.0 * n) * (1.0 - 4.0 * n + 3.0 * n * n) / (2.0 * n3);
    g[2] = std::pow(l, 1.0 - 3.0 * n) * (n - 1.0) * (2.0 * n - 1.0) / (6.0 * n3);
    return g;
}

// Interpolating polynomial P(x) = c0 + c1 x + c2 x^2 of phi(mu) = lambda / (n mu) at three tightly
// clustered roots; divided differences from the Taylor series of phi about the centre.
std::array<cplx, 3> cluster_series_gradient(const EigenTriple& l, long long nn) {
    const double n = double(nn);
    const EigenTriple mu = powers(l, nn);
    const cplx c = (mu[0] + mu[1] + mu[2]) / 3.0;
    const cplx lc = l[0] * std::pow(c / mu[0], 1.0 / n);
    const cplx phic = lc / (n * c);
    constexpr int J = 24;
    std::array<cplx, J + 1> a;
    const double alpha = 1.0 / n - 1.0;
    double binom = 1.0;
    cplx cpow = 1.0;
    for (int j = 0; j <= J; ++j) {
        if (j > 0) {
            binom *= (alpha - double(j) + 1.0) / double(j);
            cpow /= c;
        }
        a[j] = phic * binom * cpow;
    }
    const cplx d1 = mu[0] - c, d2 = mu[1] - c, d3 = mu[2] - c;
    std::array<cplx, J + 1> h1, h2, h3;
    for (int k = 0; k <= J; ++k) {
        h1[k] = k == 0 ? cplx(1.0) : h1[k - 1] * d1;
        h2[k] = h1[k] + (k ? d2 * h2[k - 1] : cplx(0.0));
        h3[k] = h2[k] + (k ? d3 * h3[k - 1] : cplx(0.0));
    }
    cplx f1 = 0.0, f12 = 0.0, f123 = 0.0;
    for (int j = 0; j <= J; ++j) {
        f1 += a[j] * h1[j];
        if (j >= 1) f12 += a[j] * h2[j - 1];
        if (j >= 2) f123 += a[j] * h3[j - 2];
    }
    const cplx c2 = f123;
    const cplx c1 = f12 - f123 * (mu[0] + mu[1]);
    const cplx c0 = f1 - f12 * mu[0] + f123 * mu[0] * mu[1];
    return {c0, c1 / 2.0, c2 / 3.0};
}

} // namespace

VarianceResult variance_model(const EigenTriple& l, long long n, double var_t) {
    if (n < 1) throw std::invalid_argument("variance_model: n must be >= 1");
    for (const auto& z : l)
        if (!(std::abs(z) > 0.0)) throw std::invalid_argument("variance_model: zero eigenvalue");
    VarianceResult r;
    const EigenTriple mu = powers(l, n);
    const double branch = kPi / double(n);
    const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    int close = 0;
    int ci = -1;
    for (int k = 0; k < 3; ++k) {
        auto [i, j] = pairs[k];
        if (std::abs(mu[i] - mu[j]) < 1e-6) {
            ++close;
            ci = k;
        }
    }
    auto same_branch = [&](int i, int j) { return std::abs(l[i] - l[j]) < branch; };
    std::array<cplx, 3> g{};
    const double maxgap = max_pair_gap(mu);
    if (close > 0) {
        // Coinciding roots are only benign when they come from coinciding eigenvalues.
        for (int k = 0; k < 3; ++k) {
            auto [i, j] = pairs[k];
            if (std::abs(mu[i] - mu[j]) < 1e-6 && !same_branch(i, j)) {
                r.formula = VarianceFormula::Singular;
                r.variance = kInf;
                r.gradient = {kInf, kInf, kInf};
                return r;
            }
        }
    }
    if (maxgap < 1e-6) {
        r.formula = VarianceFormula::TripleLimit;
        g = triple_limit_gradient((l[0] + l[1] + l[2]) / 3.0, n);
    } else if (close == 1) {
        r.formula = VarianceFormula::PairLimit;
        auto [i, j] = pairs[ci];
        const int o = 3 - i - j;
        g = pair_limit_gradient(l[o], 0.5 * (l[i] + l[j]), n);
    } else if (maxgap < 1e-3 && same_branch(0, 1) && same_branch(0, 2) && same_branch(1, 2)) {
        r.formula = VarianceFormula::ClusterSeries;
        g = cluster_series_gradient(l, n);
    } else {
        r.formula = VarianceFormula::General;
        double den = 0.0;
        g = general_gradient(l, n, &den);
        r.near_degenerate = den < 1e-6;
    }
    double v = 0.0;
    for (int k = 0; k < 3; ++k) {
        r.gradient[k] = g[k].real();
        v += r.gradient[k] * r.gradient[k];
    }
    r.variance = v * var_t;
    return r;
}

std::array<double, 3> interpolation_gradient(const EigenTriple& l, long long n) {
    const EigenTriple mu = powers(l, n);
    Eigen::Matrix3cd v;
    Eigen::Vector3cd phi;
    for (int a = 0; a < 3; ++a) {
        v(a, 0) = 1.0;
        v(a, 1) = mu[a];
        v(a, 2) = mu[a] * mu[a];
        phi(a) = l[a] / (double(n) * mu[a]);
    }
    const Eigen::Vector3cd c = v.fullPivLu().solve(phi);
    return {c(0).real(), c(1).real() / 2.0, c(2).real() / 3.0};
}

std::array<double, 3> eigenvalue_std(const EigenTriple& l, long long n) {
    const EigenTriple mu = powers(l, n);
    Eigen::Matrix3cd j;
    for (int a = 0; a < 3; ++a) {
        j(0, a) = 1.0;
        j(1, a) = 2.0 * mu[a];
        j(2, a) = 3.0 * mu[a] * mu[a];
    }
    Eigen::FullPivLU<Eigen::Matrix3cd> lu(j);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) return {kInf, kInf, kInf};
    const Eigen::Matrix3cd ji = lu.inverse();
    std::array<double, 3> s;
    for (int a = 0; a < 3; ++a) s[a] = std::abs(l[a] / (double(n) * mu[a])) * ji.row(a).norm();
    return s;
}

std::vector<long long> log_grid(long long n_max, int ppd, int modulus) {
    std::vector<long long> v{1};
    if (n_max < 1) return v;
    const int steps = int(std::ceil(std::log10(double(n_max)) * ppd));
    for (int k = 1; k <= steps; ++k) {
        const double x = std::pow(10.0, double(k) / ppd);
        long long n = modulus * (long long)std::llround((x - 1.0) / modulus) + 1;
        if (n > n_max) n = modulus * ((n_max - 1) / modulus) + 1;
        v.push_back(n);
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

long long optimal_n(const EigenTriple& l, double var_t, const std::vector<long long>& grid, int modulus) {
    if (grid.empty()) throw std::invalid_argument("optimal_n: empty grid");
    auto var = [&](long long n) {
        const double v = variance_model(l, n, var_t).variance;
        return std::isfinite(v) ? v : kInf;
    };
    std::size_t bi = 0;
    double bv = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = var(grid[i]);
        if (v < bv) {
            bv = v;
            bi = i;
        }
    }
    const long long lo = grid[bi > 0 ? bi - 1 : 0];
    const long long hi = grid[bi + 1 < grid.size() ? bi + 1 : bi];
    const long long count = (hi - lo) / modulus;
    const long long stride = std::max<long long>(1, (count + 1999) / 2000) * modulus;
    long long best = grid[bi];
    for (long long n = lo; n <= hi; n += stride) {
        const double v = var(n);
        if (v < bv || (v == bv && n < best)) {
            bv = v;
            best = n;
        }
    }
    return best;
}

TraceEstimate estimate_trace(MeasurementSource& src, const std::vector<int>& ids, const Ptm& ideal_product,
                             double p_hint, const TraceOptions& opt) {
    TraceEstimate est;
    int m = period(ideal_product, opt.period_cap);
    if (m == 0) m = 1;
    est.schedule = build_schedule(m, p_hint, opt.schedule_cap);
    const double sigma = src.sigma();
    const double var_t = sigma * sigma;

    std::map<long long, double> cache;
    auto t = [&](long long l) {
        auto it = cache.find(l);
        if (it != cache.end()) return it->second;
        const double v = src.measure_trace(SequenceSpec{ids, l}) - 1.0;
        cache.emplace(l, v);
        return v;
    };
    auto radius_of = [&](const EigenTriple& lam, long long n) {
        if (!(sigma > 0.0)) return 0.0;
        const auto s = eigenvalue_std(lam, n);
        const double r = opt.confidence_sigmas * sigma * std::max({s[0], s[1], s[2]});
        return std::isfinite(r) ? r : kInf;
    };

    TrackState state;
    state.current = unital_eigenvalues(unital_block(ideal_product));
    state.radius = kInf;
    for (long long n : est.schedule.values) {
        if (!state.history.empty()) {
            const EigenTriple pred = powers(state.current, n);
            if (min_pair_gap(pred) < opt.collision_tol && min_pair_gap(state.current) > 1e-6) {
                est.skipped.push_back(n);
                continue;
            }
            if (opt.variance_skip && sigma > 0.0 && !(radius_of(state.current, n) < state.radius)) {
                est.skipped.push_back(n);
                continue;
            }
        }
        const double t1 = t(n), t2 = t(2 * n), t3 = t(3 * n);
        const EigenTriple mu = power_sums_to_candidates(t1, t2, t3);
        // Noise can split a conjugate pair into two real roots. The residual compares two
        // estimates, each inside the confidence radius, so up to twice the radius is sampling error.
        const double tol = sigma > 0.0 ? 2.0 * radius_of(state.current, n) : 0.0;
        try {
            state = track_step(state, mu, n, std::isfinite(tol) ? tol : 0.0);
        } catch (const TrackingError&) {
            // Near-coinciding roots spread wider than the radius assumes. Larger n would only
            // compound that, so keep what was tracked so far.
            if (!(sigma > 0.0) || state.history.empty()) throw;
            est.stopped_at = n;
            break;
        }
        TrackStep& s = state.history.back();
        s.tn = t1;
        s.t2n = t2;
        s.t3n = t3;
        s.radius = radius_of(s.lambda, n);
        state.radius = s.radius;
    }

    std::size_t pick = state.history.size() - 1;
    double pv = variance_model(state.current, state.history[pick].n, 1.0).variance;
    if (opt.select_min_variance) {
        for (std::size_t i = 0; i < state.history.size(); ++i) {
            const double v = variance_model(state.current, state.history[i].n, 1.0).variance;
            if (std::isfinite(v) && (!std::isfinite(pv) || v <= pv)) {
                pv = v;
                pick = i;
            }
        }
    }
    est.history = state.history;
    est.lambda = state.current;
    est.Lambda = state.history[pick].Lambda;
    est.n_used = state.history[pick].n;
    est.predicted_var = pv * var_t;
    return est;
}

std::string trace_diagnostics_csv(const TraceEstimate& est, double var_t) {
    CsvWriter w;
    w.meta("period", std::to_string(est.schedule.period));
    w.meta("n_used", std::to_string(est.n_used));
    std::string sk;
    for (std::size_t i = 0; i < est.skipped.size(); ++i) sk += (i ? " " : "") + std::to_string(est.skipped[i]);
    w.meta("skipped", sk);
    if (est.stopped_at) w.meta("stopped_at", std::to_string(est.stopped_at));
    w.header({"n", "t_n", "t_2n", "t_3n", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "lambda3_re",
              "lambda3_im", "Lambda", "predicted_var"});
    for (const auto& s : est.history) {
        const double v = variance_model(est.lambda, s.n, var_t).variance;
        w.row({fmt(s.n), fmt(s.tn), fmt(s.t2n), fmt(s.t3n), fmt(s.lambda[0].real()), fmt(s.lambda[0].imag()),
               fmt(s.lambda[1].real()), fmt(s.lambda[1].imag()), fmt(s.lambda[2].real()), fmt(s.lambda[2].imag()),
               fmt(s.Lambda), fmt(v)});
    }
    return w.str();
}

} // namespace tomolab
