#pragma once

/// Observables along a simulation: interaction energy, height norms of the
/// reconstructed densities, support hull, and the assembled per-event trace.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "common.hpp"
#include "engine.hpp"
#include "measures.hpp"

namespace twospecies {

/// Interaction energy split into its three parts:
///   self(z)  = -(1/N^2) sum_{i<k} (z_k - z_i)        (repulsive, per species)
///   cross    =  (1/N^2) sum_{i,j} |x_i - y_j|        (attractive)
/// The total decreases along every trajectory at rate sum(v^2)/N.
struct EnergyValue {
    double self_x = 0.0;
    double self_y = 0.0;
    double cross = 0.0;

    [[nodiscard]] double total() const { return self_x + self_y + cross; }
};

namespace detail {

/// sum_{i<k} (z_k - z_i) for sorted z, via the rank-weight identity.
inline double pairwise_spread(const std::vector<double>& z) {
    const double n = static_cast<double>(z.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k)
        acc += (2.0 * static_cast<double>(k + 1) - 1.0 - n) * z[k];
    return acc;
}

/// sum_{i,j} |x_i - y_j| for sorted inputs, by prefix sums and a merge walk.
inline double pairwise_cross_distance(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    double acc = 0.0;
    std::size_t m = 0;
    for (double yj : y) {
        while (m < n && x[m] <= yj) ++m;
        const double dm = static_cast<double>(m);
        acc += (dm * yj - prefix[m]) + (prefix[n] - prefix[m]) - (static_cast<double>(n) - dm) * yj;
    }
    return acc;
}

}  // namespace detail

inline EnergyValue energy(const ParticleState& s) {
    const double n2 = static_cast<double>(s.n()) * static_cast<double>(s.n());
    EnergyValue e;
    e.self_x = -detail::pairwise_spread(s.x) / n2;
    e.self_y = -detail::pairwise_spread(s.y) / n2;
    e.cross = detail::pairwise_cross_distance(s.x, s.y) / n2;
    return e;
}

/// Energy dissipation rate sum(v^2)/N; equals -dF/dt between collisions.
inline double weighted_speed_square(const VelocityAssignment& va) {
    double acc = 0.0;
    for (double v : va.vx) acc += v * v;
    for (double v : va.vy) acc += v * v;
    return acc / static_cast<double>(va.vx.size());
}

/// sum_i d_i^m * cell_i, the m-th power of the L^m norm (finite m >= 1).
inline double lm_power_sum(const PiecewiseDensity& d, double m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.cells(); ++i)
        acc += std::pow(d.heights[i], m) * (d.breakpoints[i + 1] - d.breakpoints[i]);
    return acc;
}

/// L^m norm of a piecewise-constant density; m may be infinity.  Finite
/// orders must exceed one: at m = 1 the value is just the total mass.
inline double lm_norm(const PiecewiseDensity& d, double m) {
    if (std::isinf(m)) {
        double top = 0.0;
        for (double h : d.heights) top = std::max(top, h);
        return top;
    }
    if (!(m > 1.0)) throw std::invalid_argument("lm_norm: order must exceed 1 or be infinity");
    return std::pow(lm_power_sum(d, m), 1.0 / m);
}

/// Convex hull of both species: [min of all positions, max of all positions].
inline std::pair<double, double> support(const ParticleState& s) {
    return {std::min(s.x.front(), s.y.front()), std::max(s.x.back(), s.y.back())};
}

/// One sampled row of the diagnostics trace.  l2 and l3 hold the sum over
/// both species of the m-th power of the reconstructed height norm, the
/// quantities that decay in time.  linf holds their m -> infinity limit,
/// which is the LARGER of the two sup-norms, not their sum: the plain sum
/// can rise transiently when the tightest gap of one species shrinks while
/// squeezed between particles of the other, whereas the globally tightest
/// gap never has two opposite particles inside it (they would bound a still
/// tighter gap) and therefore never shrinks.  Event counts are cumulative.
struct TraceRow {
    double t = 0.0;
    EnergyValue F;
    double l2 = 0.0;
    double l3 = 0.0;
    double linf = 0.0;
    double a = 0.0;
    double b = 0.0;
    long events_cross = 0;
    long events_stick = 0;
};

namespace detail {

inline void count_event(const Event& ev, long& crossings, long& sticks) {
    for (const auto& site : ev.sites) {
        switch (site.kind) {
            case EventKind::cross: ++crossings; break;
            case EventKind::stick: ++sticks; break;
            case EventKind::cluster: sticks += site.newly_matched; break;
        }
    }
}

inline TraceRow trace_row(const ParticleState& s, long crossings, long sticks) {
    TraceRow row;
    row.t = s.t;
    row.F = energy(s);
    // Height norms need two distinct positions; a species collapsed onto a
    // single point (n = 1, or fully coincident input) contributes zero.
    auto add_norms = [&row, &s](const std::vector<double>& z) {
        if (z.front() == z.back()) return;
        PiecewiseDensity d = piecewise_from_state(z, s.n());
        row.l2 += lm_power_sum(d, 2.0);
        row.l3 += lm_power_sum(d, 3.0);
        row.linf = std::max(row.linf, lm_norm(d, std::numeric_limits<double>::infinity()));
    };
    add_norms(s.x);
    add_norms(s.y);
    auto [a, b] = support(s);
    row.a = a;
    row.b = b;
    row.events_cross = crossings;
    row.events_stick = sticks;
    return row;
}

}  // namespace detail

/// Rows at the initial time, at every event, and at the final time.
inline std::vector<TraceRow> diagnostics_trace(const SimulationRecord& rec) {
    std::vector<TraceRow> rows;
    long crossings = 0, sticks = 0;
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
        if (k > 0) detail::count_event(rec.events[k - 1], crossings, sticks);
        const Snapshot& snap = rec.snapshots[k];
        ParticleState s;
        s.x = snap.x;
        s.y = snap.y;
        s.t = snap.t;
        s.ctol = rec.ctol;
        rows.push_back(detail::trace_row(s, crossings, sticks));
    }
    if (rec.t_final > rec.snapshots.back().t)
        rows.push_back(detail::trace_row(rec.state_at(rec.t_final), crossings, sticks));
    return rows;
}

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
    std::string out = "t,energy,self_x,self_y,cross,l2,l3,linf,a,b,events_cross,events_stick\n";
    for (const auto& r : rows) {
        out += format_double(r.t);
        out += ',';
        out += format_double(r.F.total());
        out += ',';
        out += format_double(r.F.self_x);
        out += ',';
        out += format_double(r.F.self_y);
        out += ',';
        out += format_double(r.F.cross);
        out += ',';
        out += format_double(r.l2);
        out += ',';
        out += format_double(r.l3);
        out += ',';
        out += format_double(r.linf);
        out += ',';
        out += format_double(r.a);
        out += ',';
        out += format_double(r.b);
        out += ',';
        out += std::to_string(r.events_cross);
        out += ',';
        out += std::to_string(r.events_stick);
        out += '\n';
    }
    return out;
}

/// Largest relative defect of the exact linear decay law across inter-event
/// segments: F(t_{k+1}) - F(t_k) must equal -sum(v^2)/N * dt on each.
/// Also covers the tail segment to the final time.  Scale is max(1, |F(0)|).
inline double energy_dissipation_residual(const SimulationRecord& rec) {
    double scale = 1.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
        const Snapshot& snap = rec.snapshots[k];
        ParticleState s;
        s.x = snap.x;
        s.y = snap.y;
        s.t = snap.t;
        s.ctol = rec.ctol;
        double f0 = energy(s).total();
        if (k == 0) scale = std::max(1.0, std::abs(f0));
        double t1 = (k + 1 < rec.snapshots.size()) ? rec.snapshots[k + 1].t : rec.t_final;
        if (t1 <= s.t) continue;
        double rate = weighted_speed_square(velocities(s));
        ParticleState s1 = rec.state_at(t1);
        double f1 = energy(s1).total();
        worst = std::max(worst, std::abs(f1 - f0 + rate * (t1 - s.t)) / scale);
    }
    return worst;
}

}  // namespace twospecies
