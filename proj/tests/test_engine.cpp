#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "twospecies/engine.hpp"

using namespace twospecies;
using Catch::Approx;

namespace {

/// Straightforward O(n^2) evaluation of the counting law, valid when all
/// positions within a species are distinct and no particle pair coincides.
std::pair<std::vector<double>, std::vector<double>> brute_velocities(
    const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    std::vector<double> vx(x.size()), vy(y.size());
    auto count = [](const std::vector<double>& v, double p, bool left) {
        int c = 0;
        for (double q : v)
            if (left ? q < p : q > p) ++c;
        return c;
    };
    for (int i = 0; i < n; ++i) {
        double p = x[static_cast<std::size_t>(i)];
        vx[static_cast<std::size_t>(i)] =
            static_cast<double>(count(x, p, true) - count(x, p, false) - count(y, p, true) +
                                count(y, p, false)) /
            n;
    }
    for (int j = 0; j < n; ++j) {
        double p = y[static_cast<std::size_t>(j)];
        vy[static_cast<std::size_t>(j)] =
            static_cast<double>(count(y, p, true) - count(y, p, false) - count(x, p, true) +
                                count(x, p, false)) /
            n;
    }
    return {vx, vy};
}

}  // namespace

TEST_CASE("velocities follow the signed counting law") {
    auto s = make_state({0.0, 1.0}, {2.0, 3.0});
    auto va = velocities(s);
    CHECK(va.vx[0] == 0.5);
    CHECK(va.vx[1] == 1.5);
    CHECK(va.vy[0] == -1.5);
    CHECK(va.vy[1] == -0.5);
}

TEST_CASE("co-located sets resolve through the virtual ordering") {
    auto s = make_state({0.0, 0.0, 1.0, 2.0}, {-1.0, 0.0, 0.0, 3.0});
    auto va = velocities(s);
    CHECK(va.vx[0] == -0.25);
    CHECK(va.vx[1] == 0.0);
    CHECK(va.vx[2] == -0.25);
    CHECK(va.vx[3] == 0.25);
    CHECK(va.vy[0] == 0.25);
    CHECK(va.vy[1] == 0.0);
    CHECK(va.vy[2] == 0.25);
    CHECK(va.vy[3] == -0.25);
}

TEST_CASE("velocities match a brute-force count on generic states") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    std::uniform_int_distribution<int> size_dist(1, 40);
    for (int rep = 0; rep < 100; ++rep) {
        int n = size_dist(rng);
        std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
        for (auto& p : x) p = U(rng);
        for (auto& p : y) p = U(rng);
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        auto s = make_state(x, y);
        auto va = velocities(s);
        auto [bx, by] = brute_velocities(x, y);
        for (int i = 0; i < n; ++i) {
            REQUIRE(va.vx[static_cast<std::size_t>(i)] == bx[static_cast<std::size_t>(i)]);
            REQUIRE(va.vy[static_cast<std::size_t>(i)] == by[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("total momentum vanishes, co-locations included") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> coord(-3, 3);
    std::uniform_int_distribution<int> size_dist(1, 12);
    for (int rep = 0; rep < 200; ++rep) {
        int n = size_dist(rng);
        std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
        // Integer coordinates force plenty of exact coincidences.
        for (auto& p : x) p = coord(rng);
        for (auto& p : y) p = coord(rng);
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        auto va = velocities(make_state(x, y));
        // Slot velocities are integer multiples of 1/n; the integer parts
        // must cancel exactly over the whole system.
        double total = 0.0;
        for (const auto& slot : va.slots)
            total += slot.vN * static_cast<double>(slot.xs.size() + slot.ys.size());
        REQUIRE(total == 0.0);
    }
}

TEST_CASE("head-on pair sticks at the midpoint") {
    auto rec = run(make_state({0.0}, {1.0}), 2.0);
    REQUIRE(rec.events.size() == 1);
    const Event& ev = rec.events.front();
    CHECK(ev.t == Approx(0.5).epsilon(1e-15));
    CHECK(ev.kind() == EventKind::stick);
    REQUIRE(ev.sites.size() == 1);
    CHECK(ev.sites[0].location == Approx(0.5).epsilon(1e-15));
    CHECK(ev.sites[0].xs == std::vector<int>{1});
    CHECK(ev.sites[0].ys == std::vector<int>{1});
    CHECK(ev.sites[0].newly_matched == 1);
    CHECK(rec.stationary);
    CHECK(rec.t_stationary == Approx(0.5).epsilon(1e-15));
    auto fin = rec.final_state();
    CHECK(fin.x[0] == fin.y[0]);
    CHECK(fin.x[0] == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("two-pair overtaking cascade") {
    auto rec = run(make_state({-2.0, -1.0}, {0.0, 1.0}), 10.0);
    REQUIRE(rec.events.size() == 2);

    const Event& first = rec.events[0];
    CHECK(first.t == Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(first.kind() == EventKind::cross);
    REQUIRE(first.sites.size() == 1);
    CHECK(first.sites[0].location == Approx(-0.5).epsilon(1e-14));
    CHECK(first.sites[0].xs == std::vector<int>{2});
    CHECK(first.sites[0].ys == std::vector<int>{1});
    CHECK(first.sites[0].newly_matched == 0);

    const Event& second = rec.events[1];
    CHECK(second.t == Approx(5.0 / 3.0).epsilon(1e-14));
    REQUIRE(second.sites.size() == 2);
    CHECK(second.kind() == EventKind::cluster);  // two simultaneous sites
    CHECK(second.sites[0].kind == EventKind::stick);
    CHECK(second.sites[1].kind == EventKind::stick);
    CHECK(second.sites[0].location == Approx(-7.0 / 6.0).epsilon(1e-14));
    CHECK(second.sites[1].location == Approx(1.0 / 6.0).epsilon(1e-14));

    CHECK(rec.stationary);
    CHECK(rec.t_stationary == Approx(5.0 / 3.0).epsilon(1e-14));
    auto fin = rec.final_state();
    CHECK(fin.x[0] == fin.y[0]);
    CHECK(fin.x[1] == fin.y[1]);
    CHECK(fin.x[0] == Approx(-7.0 / 6.0).epsilon(1e-14));
    CHECK(fin.x[1] == Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("a finite horizon stops before later events") {
    auto rec = run(make_state({-2.0, -1.0}, {0.0, 1.0}), 1.0);
    REQUIRE(rec.events.size() == 1);
    CHECK_FALSE(rec.stationary);
    CHECK(std::isnan(rec.t_stationary));
    CHECK(rec.t_final == 1.0);
    auto fin = rec.final_state();
    CHECK(fin.x[0] == Approx(-1.5).epsilon(1e-14));   // -11/6 + (1/2)(2/3)
    CHECK(fin.y[1] == Approx(0.5).epsilon(1e-14));    //   5/6 - (1/2)(2/3)
}

TEST_CASE("states between events reconstruct exactly") {
    auto rec = run(make_state({-2.0, -1.0}, {0.0, 1.0}), 10.0);
    auto s = rec.state_at(1.0);
    CHECK(s.t == 1.0);
    CHECK(s.x[1] == Approx(-1.0 / 6.0).epsilon(1e-14));  // -1/2 + (1/2)(2/3)
    auto s0 = rec.state_at(0.0);
    CHECK(s0.x[0] == -2.0);
    auto late = rec.state_at(100.0);  // clamped to the frozen final state
    CHECK(late.x[0] == Approx(-7.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("fully paired data is stationary from the start") {
    auto rec = run(make_state({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}),
                   std::numeric_limits<double>::infinity());
    CHECK(rec.events.empty());
    CHECK(rec.stationary);
    CHECK(rec.t_stationary == 0.0);
    CHECK(rec.t_final == 0.0);
}

TEST_CASE("coincident same-species particles scatter and the halves pair off") {
    auto rec = run(make_state({0.0, 0.0}, {-1.0, 1.0}), 5.0);
    REQUIRE(rec.events.size() == 1);
    REQUIRE(rec.events[0].sites.size() == 2);
    CHECK(rec.events[0].t == Approx(1.0).epsilon(1e-14));
    CHECK(rec.events[0].sites[0].location == Approx(-0.5).epsilon(1e-14));
    CHECK(rec.events[0].sites[1].location == Approx(0.5).epsilon(1e-14));
    CHECK(rec.stationary);
}

TEST_CASE("a matched core is left alone and the surplus pairs up") {
    auto rec = run(make_state({0.0, 0.0}, {0.0, 2.0}), 10.0);
    REQUIRE(rec.events.size() == 1);
    const EventSite& site = rec.events[0].sites.at(0);
    CHECK(rec.events[0].t == Approx(2.0).epsilon(1e-14));
    CHECK(site.location == Approx(1.0).epsilon(1e-14));
    CHECK(site.kind == EventKind::stick);
    CHECK(site.xs == std::vector<int>{2});
    CHECK(site.ys == std::vector<int>{2});
    auto fin = rec.final_state();
    CHECK(fin.x[0] == 0.0);
    CHECK(fin.y[0] == 0.0);
    CHECK(fin.x[1] == fin.y[1]);
}

TEST_CASE("binary collision classification follows rank order") {
    // Ranks x2 vs y1: the x passes through and keeps moving right.
    auto rec = run(make_state({-3.0, 0.0}, {1.0, 4.0}), 0.9);
    REQUIRE(rec.events.size() == 1);
    CHECK(rec.events[0].sites[0].kind == EventKind::cross);
    auto va = velocities(rec.final_state());
    CHECK(va.vx[1] > 0.0);  // separated with positive speed after crossing
}

TEST_CASE("the same-species guard trips on an inconsistent assignment") {
    auto s = make_state({0.0, 1.0}, {5.0, 6.0});
    VelocityAssignment va;
    va.vx = {2.0, 0.0};
    va.vy = {0.5, 0.5};
    va.slots.push_back({0, 0.0, 4.0, {0}, {}});
    va.slots.push_back({1, 1.0, 0.0, {1}, {}});
    va.slots.push_back({2, 5.0, 1.0, {}, {0}});
    va.slots.push_back({3, 6.0, 1.0, {}, {1}});
    CHECK_THROWS_AS(next_event(s, va), invariant_violation);
    try {
        next_event(s, va);
    } catch (const invariant_violation& e) {
        CHECK(e.invariant() == "same-species separation");
    }
}

TEST_CASE("state validation rejects malformed input") {
    CHECK_THROWS_AS(make_state({0.0, 1.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_state({1.0, 0.0}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_state({}, {}), std::invalid_argument);
    auto s = make_state({-1.0, 0.0}, {1.0, 3.0});
    CHECK(s.ctol == Approx(4e-12).epsilon(1e-12));
}

TEST_CASE("every run settles with each x matched to its y") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    std::uniform_int_distribution<int> size_dist(1, 25);
    for (int rep = 0; rep < 60; ++rep) {
        int n = size_dist(rng);
        std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
        for (auto& p : x) p = U(rng);
        for (auto& p : y) p = U(rng);
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        auto rec = run(make_state(x, y), std::numeric_limits<double>::infinity());
        REQUIRE(rec.stationary);
        auto fin = rec.final_state();
        for (int i = 0; i < n; ++i)
            REQUIRE(std::abs(fin.x[static_cast<std::size_t>(i)] -
                             fin.y[static_cast<std::size_t>(i)]) <= fin.ctol);
        // The event count respects the pairwise interaction budget.
        std::size_t sites = 0;
        for (const auto& ev : rec.events) sites += ev.sites.size();
        REQUIRE(sites <= static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1));
    }
}
