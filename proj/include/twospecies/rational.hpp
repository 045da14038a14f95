#pragma once

/// Exact-rational replica of the event-driven dynamics.
///
/// This integrator is deliberately independent of the floating-point
/// engine: velocities come from closed-form rank expressions rather than a
/// counting walk, candidate collisions are scanned over all particle pairs
/// rather than adjacent ones, and every quantity is an exact rational, so
/// contacts land on exactly equal coordinates and no snapping or tolerance
/// enters anywhere.  Agreement between the two integrators is therefore a
/// strong end-to-end check of both.

#include <gmpxx.h>

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "engine.hpp"

namespace twospecies {

struct RationalState {
    std::vector<mpq_class> x;
    std::vector<mpq_class> y;
    mpq_class t = 0;

    [[nodiscard]] int n() const { return static_cast<int>(x.size()); }
};

/// Exact conversion: every double is a dyadic rational.
inline RationalState rational_state(const ParticleState& s) {
    RationalState r;
    r.x.reserve(s.x.size());
    r.y.reserve(s.y.size());
    for (double v : s.x) r.x.emplace_back(v);
    for (double v : s.y) r.y.emplace_back(v);
    r.t = mpq_class(s.t);
    return r;
}

struct RationalSite {
    mpq_class location;
    EventKind kind = EventKind::cluster;
    std::vector<int> xs;  ///< 1-based ranks
    std::vector<int> ys;
    int newly_matched = 0;
};

struct RationalEvent {
    mpq_class t;
    std::vector<RationalSite> sites;
};

struct RationalRecord {
    std::vector<RationalEvent> events;
    RationalState final_state;
    bool stationary = false;
    mpq_class t_stationary = 0;
};

namespace detail {

/// N * velocity of every particle, from the closed-form rank expressions:
/// a particle of rank i co-located with opposite-species ranks [j1, j2]
/// moves with N*v = 2i - 2*j1 + 1 when i < j1, with N*v = 2i - 2*j2 - 1
/// when i > j2, and rests when matched; an absent opposite-species range is
/// encoded as the empty interval [yl+1, yl] around the opposite count yl to
/// the left, which collapses both branches to the same expression.
inline void rational_vN(const RationalState& s, std::vector<long>& vnx, std::vector<long>& vny) {
    const int n = s.n();
    vnx.assign(static_cast<std::size_t>(n), 0);
    vny.assign(static_cast<std::size_t>(n), 0);
    int ix = 0, iy = 0;
    while (ix < n || iy < n) {
        // Next distinct coordinate value and the rank ranges sitting on it.
        const mpq_class* v;
        if (ix < n && iy < n)
            v = (s.x[static_cast<std::size_t>(ix)] <= s.y[static_cast<std::size_t>(iy)])
                    ? &s.x[static_cast<std::size_t>(ix)]
                    : &s.y[static_cast<std::size_t>(iy)];
        else
            v = ix < n ? &s.x[static_cast<std::size_t>(ix)] : &s.y[static_cast<std::size_t>(iy)];
        int x0 = ix, y0 = iy;
        while (ix < n && s.x[static_cast<std::size_t>(ix)] == *v) ++ix;
        while (iy < n && s.y[static_cast<std::size_t>(iy)] == *v) ++iy;
        // 1-based opposite ranges for the x side: [y0+1, iy] if any y is
        // here, else the empty interval [y0+1, y0].
        const long j1 = y0 + 1, j2 = iy;
        for (int i = x0 + 1; i <= ix; ++i) {
            long vn = 0;
            if (i < j1)
                vn = 2L * i - 2L * j1 + 1;
            else if (i > j2)
                vn = 2L * i - 2L * j2 - 1;
            vnx[static_cast<std::size_t>(i - 1)] = vn;
        }
        const long i1 = x0 + 1, i2 = ix;
        for (int j = y0 + 1; j <= iy; ++j) {
            long vn = 0;
            if (j < i1)
                vn = 2L * j - 2L * i1 + 1;
            else if (j > i2)
                vn = 2L * j - 2L * i2 - 1;
            vny[static_cast<std::size_t>(j - 1)] = vn;
        }
    }
}

}  // namespace detail

/// Exact velocities (not premultiplied by N).
inline std::pair<std::vector<mpq_class>, std::vector<mpq_class>> rational_velocities(
    const RationalState& s) {
    std::vector<long> vnx, vny;
    detail::rational_vN(s, vnx, vny);
    std::pair<std::vector<mpq_class>, std::vector<mpq_class>> out;
    const long n = s.n();
    for (long v : vnx) {
        mpq_class q(v, n);
        q.canonicalize();
        out.first.push_back(q);
    }
    for (long v : vny) {
        mpq_class q(v, n);
        q.canonicalize();
        out.second.push_back(q);
    }
    return out;
}

/// Run the exact dynamics until stationary (or until the horizon, when one
/// is given).  All-pairs candidate scan; ties are exact equalities.
inline RationalRecord rational_run(RationalState s,
                                   const std::optional<mpq_class>& horizon = std::nullopt) {
    const int n = s.n();
    if (n == 0) throw std::invalid_argument("rational run: empty state");
    RationalRecord rec;
    const long cap = static_cast<long>(n) * (n + 1) + 1;
    long iterations = 0;
    std::vector<long> vnx, vny;
    for (;;) {
        if (++iterations > cap)
            throw invariant_violation(
                "event-count bound",
                "more than n(n+1) collision rounds for n = " + std::to_string(n));
        detail::rational_vN(s, vnx, vny);
        std::vector<mpq_class> velx, vely;
        velx.reserve(static_cast<std::size_t>(n));
        vely.reserve(static_cast<std::size_t>(n));
        for (long v : vnx) {
            mpq_class q(v, n);
            q.canonicalize();
            velx.push_back(q);
        }
        for (long v : vny) {
            mpq_class q(v, n);
            q.canonicalize();
            vely.push_back(q);
        }

        // Earliest contact over every strictly separated closing pair, kept
        // separately for opposite-species and same-species pairs.
        mpq_class best;
        bool have_best = false;
        mpq_class best_same;
        bool have_same = false;
        auto consider = [&](const mpq_class& pa, long va, const mpq_class& pb, long vb,
                            bool opposite) {
            // Orient so pa < pb.
            const mpq_class *lo = &pa, *hi = &pb;
            long vlo = va, vhi = vb;
            if (pa == pb) return;
            if (pa > pb) {
                lo = &pb;
                hi = &pa;
                vlo = vb;
                vhi = va;
            }
            if (vlo <= vhi) return;
            mpq_class speed(vlo - vhi, n);
            speed.canonicalize();
            mpq_class dt = (*hi - *lo) / speed;
            if (opposite) {
                if (!have_best || dt < best) {
                    best = dt;
                    have_best = true;
                }
            } else if (!have_same || dt < best_same) {
                best_same = dt;
                have_same = true;
            }
        };
        for (int i = 0; i < n; ++i) {
            for (int k = i + 1; k < n; ++k) {
                consider(s.x[static_cast<std::size_t>(i)], vnx[static_cast<std::size_t>(i)],
                         s.x[static_cast<std::size_t>(k)], vnx[static_cast<std::size_t>(k)], false);
                consider(s.y[static_cast<std::size_t>(i)], vny[static_cast<std::size_t>(i)],
                         s.y[static_cast<std::size_t>(k)], vny[static_cast<std::size_t>(k)], false);
            }
            for (int j = 0; j < n; ++j)
                consider(s.x[static_cast<std::size_t>(i)], vnx[static_cast<std::size_t>(i)],
                         s.y[static_cast<std::size_t>(j)], vny[static_cast<std::size_t>(j)], true);
        }

        if (have_same && (!have_best || best_same < best))
            throw invariant_violation("same-species separation",
                                      "a same-species pair is on a collision course");
        if (!have_best) {
            for (long v : vnx)
                if (v != 0)
                    throw invariant_violation("stationarity",
                                              "no upcoming collision but velocities are nonzero");
            for (long v : vny)
                if (v != 0)
                    throw invariant_violation("stationarity",
                                              "no upcoming collision but velocities are nonzero");
            rec.stationary = true;
            rec.t_stationary = rec.events.empty() ? mpq_class(0) : rec.events.back().t;
            break;
        }
        if (horizon && s.t + best >= *horizon) {
            // Freeze the run at the horizon; no event is resolved there.
            mpq_class span = *horizon - s.t;
            for (int i = 0; i < n; ++i) {
                s.x[static_cast<std::size_t>(i)] += span * velx[static_cast<std::size_t>(i)];
                s.y[static_cast<std::size_t>(i)] += span * vely[static_cast<std::size_t>(i)];
            }
            s.t = *horizon;
            break;
        }

        // Matched pairs before the move, for the stick census.
        std::vector<bool> matched_before(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            matched_before[static_cast<std::size_t>(i)] =
                s.x[static_cast<std::size_t>(i)] == s.y[static_cast<std::size_t>(i)];
        const std::vector<mpq_class> old_x = s.x, old_y = s.y;

        for (int i = 0; i < n; ++i) {
            s.x[static_cast<std::size_t>(i)] += best * velx[static_cast<std::size_t>(i)];
            s.y[static_cast<std::size_t>(i)] += best * vely[static_cast<std::size_t>(i)];
        }
        s.t += best;

        // The event's sites are the locations where previously separated
        // particles now coincide.
        RationalEvent ev;
        ev.t = s.t;
        std::map<mpq_class, RationalSite> sites;
        std::map<mpq_class, std::vector<std::pair<bool, int>>> occupancy;  // (is_y, rank0)
        for (int i = 0; i < n; ++i) occupancy[s.x[static_cast<std::size_t>(i)]].push_back({false, i});
        for (int j = 0; j < n; ++j) occupancy[s.y[static_cast<std::size_t>(j)]].push_back({true, j});
        for (auto& [loc, members] : occupancy) {
            if (members.size() < 2) continue;
            bool fresh_contact = false;
            for (std::size_t a = 0; a + 1 < members.size() && !fresh_contact; ++a) {
                for (std::size_t b = a + 1; b < members.size() && !fresh_contact; ++b) {
                    const mpq_class& pa = members[a].first
                                              ? old_y[static_cast<std::size_t>(members[a].second)]
                                              : old_x[static_cast<std::size_t>(members[a].second)];
                    const mpq_class& pb = members[b].first
                                              ? old_y[static_cast<std::size_t>(members[b].second)]
                                              : old_x[static_cast<std::size_t>(members[b].second)];
                    if (pa != pb) fresh_contact = true;
                }
            }
            if (!fresh_contact) continue;
            RationalSite site;
            site.location = loc;
            for (const auto& [is_y, rank0] : members)
                (is_y ? site.ys : site.xs).push_back(rank0 + 1);
            for (int rank : site.xs) {
                std::size_t k = static_cast<std::size_t>(rank - 1);
                if (!matched_before[k] && s.x[k] == s.y[k] &&
                    std::find(site.ys.begin(), site.ys.end(), rank) != site.ys.end())
                    ++site.newly_matched;
            }
            if (site.xs.size() == 1 && site.ys.size() == 1)
                site.kind =
                    site.xs.front() == site.ys.front() ? EventKind::stick : EventKind::cross;
            else
                site.kind = EventKind::cluster;
            sites.emplace(loc, std::move(site));
        }
        for (auto& [loc, site] : sites) ev.sites.push_back(std::move(site));
        if (ev.sites.empty())
            throw invariant_violation("event resolution",
                                      "a computed contact produced no collision site");
        rec.events.push_back(std::move(ev));
    }
    rec.final_state = std::move(s);
    return rec;
}

}  // namespace twospecies
