#pragma once

/// Exact event-driven integrator for the two-species particle system.
///
/// Between collisions every particle moves with the constant velocity
/// N*v = (#same species strictly left) - (#same species strictly right)
///     - (#opposite species strictly left) + (#opposite species strictly right),
/// where co-located particles do not contribute to each other's counts.
/// Velocities are integer multiples of 1/N, so trajectories are piecewise
/// linear and collision times solve exactly from gap / closing speed.
///
/// Co-located sets are resolved through a virtual ordering: within one
/// location, matched pairs (equal rank in both species) form a core that
/// stays put, and the unmatched surplus of one species fans out to the side
/// strictly ordered by rank.  Applying the counting law over that virtual
/// order yields the unique forward-in-time velocities; matched cores get
/// velocity zero automatically, so no persistent bookkeeping is needed and
/// the particle positions alone determine the future.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace twospecies {

enum class Species { x, y };

enum class EventKind { cross, stick, cluster };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::cross: return "cross";
        case EventKind::stick: return "stick";
        default: return "cluster";
    }
}

/// Sorted positions of both species at time t.  `ctol` is the absolute
/// co-location tolerance: particles closer than ctol count as co-located.
struct ParticleState {
    std::vector<double> x;
    std::vector<double> y;
    double t = 0.0;
    double ctol = 0.0;

    [[nodiscard]] int n() const { return static_cast<int>(x.size()); }

    void validate() const {
        if (x.empty() || x.size() != y.size())
            throw std::invalid_argument("state: species must have equal, nonzero counts");
        for (const auto* v : {&x, &y}) {
            for (std::size_t i = 0; i < v->size(); ++i) {
                if (!std::isfinite((*v)[i]))
                    throw std::invalid_argument("state: non-finite position");
                if (i + 1 < v->size() && (*v)[i] > (*v)[i + 1])
                    throw std::invalid_argument("state: positions not sorted");
            }
        }
    }
};

/// Build a validated state; the co-location tolerance is pinned to
/// 1e-12 of the initial hull diameter and carried through the run.
inline ParticleState make_state(std::vector<double> x, std::vector<double> y, double t0 = 0.0) {
    ParticleState s;
    s.x = std::move(x);
    s.y = std::move(y);
    s.t = t0;
    s.validate();
    double lo = std::min(s.x.front(), s.y.front());
    double hi = std::max(s.x.back(), s.y.back());
    s.ctol = 1e-12 * (hi - lo);
    return s;
}

/// One resolved collision location.  Ranks are 1-based within each species;
/// participants are every particle at the location when it resolved.
/// `newly_matched` counts the equal-rank opposite-species pairs that first
/// became co-located at this site.
struct EventSite {
    double location = 0.0;
    EventKind kind = EventKind::cluster;
    std::vector<int> xs;
    std::vector<int> ys;
    int newly_matched = 0;
};

/// One instant at which collisions resolve.  Simultaneous contacts at
/// distinct locations are merged into a single event with several sites.
struct Event {
    double t = 0.0;
    std::vector<EventSite> sites;

    [[nodiscard]] double location() const { return sites.front().location; }

    [[nodiscard]] EventKind kind() const {
        if (sites.size() == 1 && sites.front().xs.size() + sites.front().ys.size() == 2)
            return sites.front().kind;
        return EventKind::cluster;
    }
};

/// One entry of the virtual ordering: a set of particles sharing a location
/// and a velocity.  Singleton slots carry fanned-out unmatched particles;
/// multi-member slots are matched cores (velocity zero).
struct VirtualSlot {
    int group = 0;       ///< co-location group this slot belongs to
    double pos = 0.0;    ///< physical location of the group
    double vN = 0.0;     ///< N * velocity (integer-valued)
    std::vector<int> xs; ///< 0-based x ranks
    std::vector<int> ys; ///< 0-based y ranks
};

struct VelocityAssignment {
    std::vector<double> vx;
    std::vector<double> vy;
    std::vector<VirtualSlot> slots;

    [[nodiscard]] bool all_zero() const {
        auto z = [](double v) { return v == 0.0; };
        return std::all_of(vx.begin(), vx.end(), z) && std::all_of(vy.begin(), vy.end(), z);
    }
};

namespace detail {

/// Particles in merged position order, chained into co-location groups.
struct GroupedState {
    struct Group {
        double pos;          ///< location of the first member
        int x0, x1, y0, y1;  ///< 0-based inclusive rank ranges; empty when lo > hi
    };
    std::vector<Group> groups;
    std::vector<int> group_of_x;
    std::vector<int> group_of_y;
};

inline GroupedState group_particles(const ParticleState& s) {
    const int n = s.n();
    GroupedState g;
    g.group_of_x.assign(n, -1);
    g.group_of_y.assign(n, -1);
    int ix = 0, iy = 0;
    double prev = 0.0;
    bool first = true;
    while (ix < n || iy < n) {
        bool take_x = iy >= n || (ix < n && s.x[ix] <= s.y[iy]);
        double p = take_x ? s.x[ix] : s.y[iy];
        if (first || p - prev > s.ctol) {
            g.groups.push_back({p, n, -1, n, -1});
            first = false;
        }
        auto& grp = g.groups.back();
        if (take_x) {
            grp.x0 = std::min(grp.x0, ix);
            grp.x1 = std::max(grp.x1, ix);
            g.group_of_x[ix] = static_cast<int>(g.groups.size()) - 1;
            ++ix;
        } else {
            grp.y0 = std::min(grp.y0, iy);
            grp.y1 = std::max(grp.y1, iy);
            g.group_of_y[iy] = static_cast<int>(g.groups.size()) - 1;
            ++iy;
        }
        prev = p;
    }
    return g;
}

}  // namespace detail

/// Velocities of every particle, together with the virtual ordering they
/// were derived from.  O(N) after the merged walk.
inline VelocityAssignment velocities(const ParticleState& s) {
    const int n = s.n();
    VelocityAssignment va;
    va.vx.assign(n, 0.0);
    va.vy.assign(n, 0.0);

    detail::GroupedState gs = detail::group_particles(s);

    // Expand each group into virtual slots: side block of the species with
    // surplus low (resp. high) ranks, fanned out one slot per particle, and
    // one core slot holding every matched pair.
    for (std::size_t gi = 0; gi < gs.groups.size(); ++gi) {
        const auto& g = gs.groups[gi];
        const bool has_x = g.x0 <= g.x1;
        const bool has_y = g.y0 <= g.y1;
        auto push_x = [&](int lo, int hi) {
            for (int i = lo; i <= hi; ++i)
                va.slots.push_back({static_cast<int>(gi), g.pos, 0.0, {i}, {}});
        };
        auto push_y = [&](int lo, int hi) {
            for (int j = lo; j <= hi; ++j)
                va.slots.push_back({static_cast<int>(gi), g.pos, 0.0, {}, {j}});
        };
        if (has_x && !has_y) {
            push_x(g.x0, g.x1);
        } else if (has_y && !has_x) {
            push_y(g.y0, g.y1);
        } else {
            // Left side: the species whose ranks start lower fans out first.
            push_x(g.x0, std::min(g.x1, g.y0 - 1));
            push_y(g.y0, std::min(g.y1, g.x0 - 1));
            int mlo = std::max(g.x0, g.y0), mhi = std::min(g.x1, g.y1);
            if (mlo <= mhi) {
                VirtualSlot core{static_cast<int>(gi), g.pos, 0.0, {}, {}};
                for (int k = mlo; k <= mhi; ++k) {
                    core.xs.push_back(k);
                    core.ys.push_back(k);
                }
                va.slots.push_back(std::move(core));
            }
            push_x(std::max(g.x0, g.y1 + 1), g.x1);
            push_y(std::max(g.y0, g.x1 + 1), g.y1);
        }
    }

    // Counting law over the virtual order.
    const double dn = static_cast<double>(n);
    int cx = 0, cy = 0;
    for (auto& slot : va.slots) {
        const int sx = static_cast<int>(slot.xs.size());
        const int sy = static_cast<int>(slot.ys.size());
        const double vNx = static_cast<double>(cx - (n - cx - sx) - cy + (n - cy - sy));
        const double vNy = static_cast<double>(cy - (n - cy - sy) - cx + (n - cx - sx));
        assert(sx == 0 || sy == 0 || (vNx == 0.0 && vNy == 0.0));
        slot.vN = slot.xs.empty() ? vNy : vNx;
        for (int i : slot.xs) va.vx[static_cast<std::size_t>(i)] = vNx / dn;
        for (int j : slot.ys) va.vy[static_cast<std::size_t>(j)] = vNy / dn;
        cx += sx;
        cy += sy;
    }
    return va;
}

/// The next collision instant, if any: earliest contact over adjacent slot
/// pairs, with contacts tied within 1e-12 (relative) merged.
struct PendingEvent {
    double dt = 0.0;                            ///< time from now to contact
    std::vector<std::pair<int, int>> contacts;  ///< indices into the slot array
};

inline std::optional<PendingEvent> next_event(const ParticleState& s,
                                              const VelocityAssignment& va) {
    const double dn = static_cast<double>(s.n());
    struct Candidate {
        double dt;
        int a, b;
        bool cross_capable;
    };
    std::vector<Candidate> cand;
    double best_opp = std::numeric_limits<double>::infinity();
    double best_same = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < va.slots.size(); ++k) {
        const auto& a = va.slots[k];
        const auto& b = va.slots[k + 1];
        if (a.group == b.group) {
            // Co-located neighbours fan out divergently by construction.
            assert(a.vN < b.vN);
            continue;
        }
        double closing = (a.vN - b.vN) / dn;
        if (closing <= 0.0) continue;
        double dt = (b.pos - a.pos) / closing;
        bool cross = (!a.xs.empty() && !b.ys.empty()) || (!a.ys.empty() && !b.xs.empty());
        cand.push_back({dt, static_cast<int>(k), static_cast<int>(k + 1), cross});
        (cross ? best_opp : best_same) = std::min(cross ? best_opp : best_same, dt);
    }
    if (cand.empty()) return std::nullopt;
    if (best_same < best_opp * (1.0 - 1e-12) || !std::isfinite(best_opp))
        throw invariant_violation(
            "same-species separation",
            "an adjacent same-species pair is on a collision course at t = " +
                format_double(s.t + best_same));
    PendingEvent pe;
    pe.dt = best_opp;
    for (const auto& c : cand)
        if (c.cross_capable && c.dt <= best_opp * (1.0 + 1e-12))
            pe.contacts.emplace_back(c.a, c.b);
    return pe;
}

namespace detail {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int a) {
        while (parent_[static_cast<std::size_t>(a)] != a) {
            parent_[static_cast<std::size_t>(a)] =
                parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(a)])];
            a = parent_[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) { parent_[static_cast<std::size_t>(find(a))] = find(b); }

private:
    std::vector<int> parent_;
};

}  // namespace detail

/// Advance to the pending contact, snap each collision site to a single
/// double value, and return the resolved event.  Mutates the state in place.
inline Event resolve(ParticleState& s, const VelocityAssignment& va, const PendingEvent& pe) {
    const int n = s.n();
    detail::GroupedState before = detail::group_particles(s);

    for (int i = 0; i < n; ++i) s.x[static_cast<std::size_t>(i)] += va.vx[static_cast<std::size_t>(i)] * pe.dt;
    for (int j = 0; j < n; ++j) s.y[static_cast<std::size_t>(j)] += va.vy[static_cast<std::size_t>(j)] * pe.dt;
    s.t += pe.dt;

    // Union everything now within the co-location tolerance, plus the tied
    // contact pairs (whose residual gap is pure rounding noise).
    detail::UnionFind uf(2 * n);
    {
        std::vector<std::pair<double, int>> merged;
        merged.reserve(static_cast<std::size_t>(2 * n));
        for (int i = 0; i < n; ++i) merged.emplace_back(s.x[static_cast<std::size_t>(i)], i);
        for (int j = 0; j < n; ++j) merged.emplace_back(s.y[static_cast<std::size_t>(j)], n + j);
        std::stable_sort(merged.begin(), merged.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 0; k + 1 < merged.size(); ++k)
            if (merged[k + 1].first - merged[k].first <= s.ctol)
                uf.unite(merged[k].second, merged[k + 1].second);
    }
    for (const auto& [sa, sb] : pe.contacts) {
        const auto& a = va.slots[static_cast<std::size_t>(sa)];
        const auto& b = va.slots[static_cast<std::size_t>(sb)];
        int rep = a.xs.empty() ? n + a.ys.front() : a.xs.front();
        for (const auto* slot : {&a, &b}) {
            for (int i : slot->xs) uf.unite(i, rep);
            for (int j : slot->ys) uf.unite(n + j, rep);
        }
    }

    // Collect classes, ordered by position.
    struct SiteClass {
        std::vector<int> xs, ys;  // 0-based
    };
    std::vector<SiteClass> classes;
    std::vector<int> root_to_class(2 * static_cast<std::size_t>(n), -1);
    for (int i = 0; i < 2 * n; ++i) {
        int r = uf.find(i);
        if (root_to_class[static_cast<std::size_t>(r)] < 0) {
            root_to_class[static_cast<std::size_t>(r)] = static_cast<int>(classes.size());
            classes.emplace_back();
        }
        int c = root_to_class[static_cast<std::size_t>(r)];
        if (i < n)
            classes[static_cast<std::size_t>(c)].xs.push_back(i);
        else
            classes[static_cast<std::size_t>(c)].ys.push_back(i - n);
    }

    Event ev;
    ev.t = s.t;
    for (const auto& cl : classes) {
        if (cl.xs.size() + cl.ys.size() < 2) continue;
        // A class is a collision site when it joins distinct prior groups.
        int g0 = -2;
        bool multi = false;
        auto see = [&](int g) {
            if (g0 == -2)
                g0 = g;
            else if (g != g0)
                multi = true;
        };
        for (int i : cl.xs) see(before.group_of_x[static_cast<std::size_t>(i)]);
        for (int j : cl.ys) see(before.group_of_y[static_cast<std::size_t>(j)]);
        if (!multi) continue;

        // Snap: every member takes one member's double value verbatim (the
        // smallest, a deterministic pick), so co-location is bit-exact.
        double lambda = std::numeric_limits<double>::infinity();
        for (int i : cl.xs) lambda = std::min(lambda, s.x[static_cast<std::size_t>(i)]);
        for (int j : cl.ys) lambda = std::min(lambda, s.y[static_cast<std::size_t>(j)]);
        for (int i : cl.xs) s.x[static_cast<std::size_t>(i)] = lambda;
        for (int j : cl.ys) s.y[static_cast<std::size_t>(j)] = lambda;

        EventSite site;
        site.location = lambda;
        for (int i : cl.xs) site.xs.push_back(i + 1);
        for (int j : cl.ys) site.ys.push_back(j + 1);
        // Matched pairs after minus matched pairs before, over this site.
        for (int i : cl.xs) {
            if (std::binary_search(cl.ys.begin(), cl.ys.end(), i) &&
                before.group_of_x[static_cast<std::size_t>(i)] !=
                    before.group_of_y[static_cast<std::size_t>(i)])
                ++site.newly_matched;
        }
        if (cl.xs.size() == 1 && cl.ys.size() == 1)
            site.kind = (cl.xs.front() == cl.ys.front()) ? EventKind::stick : EventKind::cross;
        else
            site.kind = EventKind::cluster;
        ev.sites.push_back(std::move(site));
    }
    std::sort(ev.sites.begin(), ev.sites.end(),
              [](const EventSite& a, const EventSite& b) { return a.location < b.location; });
    if (ev.sites.empty())
        throw invariant_violation("event resolution",
                                  "a computed contact produced no collision site at t = " +
                                      format_double(s.t));
    for (const auto* v : {&s.x, &s.y})
        for (std::size_t i = 0; i + 1 < v->size(); ++i)
            if ((*v)[i] > (*v)[i + 1])
                throw invariant_violation("within-species ordering",
                                          "ranks out of order after resolving the event at t = " +
                                              format_double(s.t));
    return ev;
}

/// Positions of both species at one instant.
struct Snapshot {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> y;
};

/// Full account of one run: the initial snapshot, one snapshot per event,
/// and the event log.  States between events reconstruct exactly from the
/// last snapshot plus constant velocities.
struct SimulationRecord {
    std::vector<Snapshot> snapshots;
    std::vector<Event> events;
    double T = 0.0;            ///< requested horizon
    double t_final = 0.0;      ///< min(T, time the system froze)
    bool stationary = false;   ///< all velocities vanished before (or at) T
    double t_stationary = 0.0; ///< last event time when stationary, else NaN
    double ctol = 0.0;

    [[nodiscard]] int n() const { return static_cast<int>(snapshots.front().x.size()); }

    [[nodiscard]] ParticleState state_at(double t) const {
        t = std::clamp(t, snapshots.front().t, t_final);
        auto it = std::upper_bound(snapshots.begin(), snapshots.end(), t,
                                   [](double v, const Snapshot& s) { return v < s.t; });
        const Snapshot& base = *(it - 1);
        ParticleState s;
        s.x = base.x;
        s.y = base.y;
        s.t = base.t;
        s.ctol = ctol;
        if (t > base.t) {
            VelocityAssignment va = velocities(s);
            for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] += va.vx[i] * (t - base.t);
            for (std::size_t j = 0; j < s.y.size(); ++j) s.y[j] += va.vy[j] * (t - base.t);
            s.t = t;
        }
        return s;
    }

    [[nodiscard]] ParticleState final_state() const { return state_at(t_final); }
};

/// Run the dynamics from `s0` until the system freezes or time T is
/// reached, whichever comes first.  T may be +infinity: the event count is
/// bounded, so every run terminates.
inline SimulationRecord run(ParticleState s0, double T) {
    s0.validate();
    if (!(T >= 0.0)) throw std::invalid_argument("run: horizon must be >= 0");
    const int n = s0.n();
    SimulationRecord rec;
    rec.T = T;
    rec.ctol = s0.ctol;
    rec.snapshots.push_back({s0.t, s0.x, s0.y});

    const long cap = static_cast<long>(n) * (n + 1) + 1;
    long iterations = 0;
    ParticleState s = std::move(s0);
    for (;;) {
        if (++iterations > cap)
            throw invariant_violation(
                "event-count bound",
                "more than n(n+1) collision rounds for n = " + std::to_string(n));
        VelocityAssignment va = velocities(s);
        std::optional<PendingEvent> pe = next_event(s, va);
        if (!pe) {
            if (!va.all_zero())
                throw invariant_violation(
                    "stationarity", "no upcoming collision but velocities are nonzero at t = " +
                                        format_double(s.t));
            rec.stationary = true;
            rec.t_stationary = s.t == rec.snapshots.front().t ? 0.0 : s.t;
            rec.t_final = std::min(T, s.t);
            break;
        }
        if (s.t + pe->dt >= T) {
            rec.stationary = false;
            rec.t_stationary = std::numeric_limits<double>::quiet_NaN();
            rec.t_final = T;
            break;
        }
        rec.events.push_back(resolve(s, va, *pe));
        rec.snapshots.push_back({s.t, s.x, s.y});
    }
    return rec;
}

}  // namespace twospecies
