#pragma once

/// Orchestration of particle-count sweeps: run the same initial densities at
/// every N in a list, measure cross-N Wasserstein distances of the
/// reconstructed densities (self-convergence), check the empirical-vs-
/// piecewise coupling bound, tabulate the collision census, and write the
/// whole study to a directory of CSV files.

#include <cmath>
#include <filesystem>
#include <future>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "diagnostics.hpp"
#include "engine.hpp"
#include "measures.hpp"

namespace twospecies {

/// Inputs of a convergence study or census sweep.
struct StudyConfig {
    InitialDensity rho0 = InitialDensity::uniform(0.0, 1.0);
    InitialDensity eta0 = InitialDensity::uniform(0.0, 1.0);
    /// Human-readable origin of the densities, echoed into the study config
    /// file (the CLI stores its preset strings here).
    std::string rho_label = "custom";
    std::string eta_label = "custom";
    std::vector<int> n_list;
    double T = 1.0;
    std::vector<double> eval_times;
    double p = 1.0;
    bool parallel = false;

    void validate() const {
        if (n_list.empty()) throw std::invalid_argument("study: empty N list");
        for (std::size_t k = 0; k < n_list.size(); ++k) {
            if (n_list[k] < 1) throw std::invalid_argument("study: N must be positive");
            if (k > 0 && n_list[k] <= n_list[k - 1])
                throw std::invalid_argument("study: N list must be strictly increasing");
        }
        if (!(T >= 0.0)) throw std::invalid_argument("study: horizon must be non-negative");
        if (!(p >= 1.0)) throw std::invalid_argument("study: Wasserstein order must be >= 1");
        for (std::size_t k = 0; k < eval_times.size(); ++k) {
            if (eval_times[k] < 0.0 || eval_times[k] > T)
                throw std::invalid_argument("study: evaluation time outside [0, T]");
            if (k > 0 && eval_times[k] < eval_times[k - 1])
                throw std::invalid_argument("study: evaluation times must be sorted");
        }
    }
};

/// One cross-N comparison: distances between the reconstructions at N and at
/// the next list entry, evaluated at time t.  The empirical order compares
/// consecutive pairs and is NaN on the first pair of the list.
struct RateRow {
    double t = 0.0;
    int n = 0;
    double wp_rho = 0.0;
    double wp_eta = 0.0;
    double order_rho = std::numeric_limits<double>::quiet_NaN();
    double order_eta = std::numeric_limits<double>::quiet_NaN();
};

/// Distance of the empirical measure to the unit-mass piecewise
/// reconstruction of one species, against its hull/(2N) coupling bound.
struct CouplingRow {
    double t = 0.0;
    int n = 0;
    double w1_rho = 0.0;
    double bound_rho = 0.0;
    double w1_eta = 0.0;
    double bound_eta = 0.0;
};

/// Event totals of one run.  `events` counts resolved contact sites;
/// `t_stationary` is NaN when the horizon cut the run short.
struct CensusRow {
    int n = 0;
    long events = 0;
    long crossings = 0;
    long sticks = 0;
    double t_stationary = 0.0;
};

struct StudyResult {
    std::vector<int> n_list;
    std::vector<SimulationRecord> records;
    std::vector<RateRow> rates;
    std::vector<CouplingRow> coupling;
};

namespace detail {

/// Discretize both densities at size n and run to the horizon.
inline SimulationRecord run_discretized(const StudyConfig& cfg, int n) {
    return run(make_state(discretize(cfg.rho0, n), discretize(cfg.eta0, n)), cfg.T);
}

inline std::vector<SimulationRecord> run_all(const StudyConfig& cfg) {
    std::vector<SimulationRecord> records;
    records.reserve(cfg.n_list.size());
    if (cfg.parallel && cfg.n_list.size() > 1) {
        std::vector<std::future<SimulationRecord>> jobs;
        jobs.reserve(cfg.n_list.size());
        for (int n : cfg.n_list)
            jobs.push_back(std::async(std::launch::async,
                                      [&cfg, n] { return run_discretized(cfg, n); }));
        for (auto& job : jobs) records.push_back(job.get());
    } else {
        for (int n : cfg.n_list) records.push_back(run_discretized(cfg, n));
    }
    return records;
}

/// Rate exponent r with W ~ C N^(-r), from two consecutive pairs; for a
/// doubling list this is the plain log2 of the distance ratio.
inline double empirical_order(double w_prev, double w_cur, int n_prev, int n_cur) {
    if (!(w_prev > 0.0) || !(w_cur > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(w_prev / w_cur) / std::log(static_cast<double>(n_cur) / n_prev);
}

}  // namespace detail

/// Unit-mass reconstruction of one species at time t of a finished run.
inline QuantileFunction reconstructed_quantile(const SimulationRecord& rec, double t,
                                               Species species) {
    ParticleState s = rec.state_at(t);
    const std::vector<double>& z = (species == Species::x) ? s.x : s.y;
    return pseudo_inverse(cdf(piecewise_from_state_unit(z)));
}

/// W_1 between the empirical measure of `positions` and its unit-mass
/// piecewise reconstruction, with the hull/(2N) transport bound.
inline std::pair<double, double> coupling_distance(const std::vector<double>& positions) {
    EmpiricalMeasure emp{positions};
    double w1 = w1_via_cdf(cdf(emp), cdf(piecewise_from_state_unit(positions)));
    double bound = (positions.back() - positions.front()) /
                   (2.0 * static_cast<double>(positions.size()));
    return {w1, bound};
}

inline CensusRow census_row(int n, const SimulationRecord& rec) {
    CensusRow row;
    row.n = n;
    for (const auto& ev : rec.events) detail::count_event(ev, row.crossings, row.sticks);
    for (const auto& ev : rec.events) row.events += static_cast<long>(ev.sites.size());
    row.t_stationary = rec.t_stationary;
    return row;
}

/// Run every N in the list and tabulate event counts.
inline std::vector<CensusRow> collision_census(const StudyConfig& cfg) {
    cfg.validate();
    auto records = detail::run_all(cfg);
    std::vector<CensusRow> rows;
    rows.reserve(records.size());
    for (std::size_t k = 0; k < records.size(); ++k)
        rows.push_back(census_row(cfg.n_list[k], records[k]));
    return rows;
}

/// Run every N, then compare reconstructions of consecutive N at each
/// evaluation time and check the coupling bound for every run and time.
inline StudyResult convergence_study(const StudyConfig& cfg) {
    cfg.validate();
    StudyResult result;
    result.n_list = cfg.n_list;
    result.records = detail::run_all(cfg);

    for (std::size_t k = 0; k < result.records.size(); ++k)
        for (double t : cfg.eval_times) {
            CouplingRow row;
            row.t = t;
            row.n = cfg.n_list[k];
            ParticleState s = result.records[k].state_at(t);
            auto [wx, bx] = coupling_distance(s.x);
            auto [wy, by] = coupling_distance(s.y);
            row.w1_rho = wx;
            row.bound_rho = bx;
            row.w1_eta = wy;
            row.bound_eta = by;
            result.coupling.push_back(row);
        }

    for (double t : cfg.eval_times) {
        double prev_rho = 0.0, prev_eta = 0.0;
        for (std::size_t k = 0; k + 1 < result.records.size(); ++k) {
            RateRow row;
            row.t = t;
            row.n = cfg.n_list[k];
            row.wp_rho = wasserstein_p(reconstructed_quantile(result.records[k], t, Species::x),
                                       reconstructed_quantile(result.records[k + 1], t, Species::x),
                                       cfg.p);
            row.wp_eta = wasserstein_p(reconstructed_quantile(result.records[k], t, Species::y),
                                       reconstructed_quantile(result.records[k + 1], t, Species::y),
                                       cfg.p);
            if (k > 0) {
                row.order_rho = detail::empirical_order(prev_rho, row.wp_rho, cfg.n_list[k - 1],
                                                        cfg.n_list[k]);
                row.order_eta = detail::empirical_order(prev_eta, row.wp_eta, cfg.n_list[k - 1],
                                                        cfg.n_list[k]);
            }
            prev_rho = row.wp_rho;
            prev_eta = row.wp_eta;
            result.rates.push_back(row);
        }
    }
    return result;
}

namespace detail {

/// Durations always carry a decimal point (or are "nan"), so integer-valued
/// stationarity times read as times, e.g. "5" prints as "5.0".
inline std::string format_duration(double t) {
    std::string s = format_double(t);
    if (s.find_first_of(".einfa") == std::string::npos) s += ".0";
    return s;
}

}  // namespace detail

inline std::string rates_csv(const std::vector<RateRow>& rows) {
    std::string out = "t,N,Wp_rho,Wp_eta,order_rho,order_eta\n";
    for (const auto& r : rows) {
        out += format_double(r.t);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += format_double(r.wp_rho);
        out += ',';
        out += format_double(r.wp_eta);
        out += ',';
        out += format_double(r.order_rho);
        out += ',';
        out += format_double(r.order_eta);
        out += '\n';
    }
    return out;
}

inline std::string census_csv(const std::vector<CensusRow>& rows) {
    std::string out = "N,events,crossings,sticks,t_stationary\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.events);
        out += ',';
        out += std::to_string(r.crossings);
        out += ',';
        out += std::to_string(r.sticks);
        out += ',';
        out += detail::format_duration(r.t_stationary);
        out += '\n';
    }
    return out;
}

inline std::string config_echo(const StudyConfig& cfg) {
    std::string out;
    out += "rho0=" + cfg.rho_label + '\n';
    out += "eta0=" + cfg.eta_label + '\n';
    out += "n_list=";
    for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
        if (k > 0) out += ',';
        out += std::to_string(cfg.n_list[k]);
    }
    out += '\n';
    out += "T=" + format_double(cfg.T) + '\n';
    out += "eval_times=";
    for (std::size_t k = 0; k < cfg.eval_times.size(); ++k) {
        if (k > 0) out += ',';
        out += format_double(cfg.eval_times[k]);
    }
    out += '\n';
    out += "p=" + format_double(cfg.p) + '\n';
    out += std::string("parallel=") + (cfg.parallel ? "true" : "false") + '\n';
    return out;
}

/// Write config echo, one diagnostics trace per N, rates.csv and census.csv
/// into `dir`.  Every file lands atomically.
inline void write_study(const StudyConfig& cfg, const StudyResult& result,
                        const std::filesystem::path& dir) {
    atomic_write(dir / "config", config_echo(cfg));
    std::vector<CensusRow> census;
    census.reserve(result.records.size());
    for (std::size_t k = 0; k < result.records.size(); ++k) {
        const int n = result.n_list[k];
        census.push_back(census_row(n, result.records[k]));
        atomic_write(dir / ("trace_N" + std::to_string(n) + ".csv"),
                     trace_csv(diagnostics_trace(result.records[k])));
    }
    atomic_write(dir / "rates.csv", rates_csv(result.rates));
    atomic_write(dir / "census.csv", census_csv(census));
}

}  // namespace twospecies
