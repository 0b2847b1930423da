// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/simkernel.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

using namespace ads;

TEST_CASE("event at time zero fires first")
{
    Scheduler s;
    std::vector<int> order;
    s.schedule(3, EventKind::timer, [&] { order.push_back(3); });
    s.schedule(0, EventKind::timer, [&] { order.push_back(0); });
    s.run_until(5);
    CHECK(order == std::vector<int>{0, 3});
}

TEST_CASE("equal fire times run in scheduling order")
{
    Scheduler s;
    std::vector<int> order;
    s.schedule(5, EventKind::timer, [&] { order.push_back(1); });
    s.schedule(5, EventKind::workload, [&] { order.push_back(2); });
    s.run_until(5);
    CHECK(order == std::vector<int>{1, 2});
}

TEST_CASE("scheduling into the past is rejected")
{
    Scheduler s;
    s.run_until(7);
    CHECK_THROWS_AS(s.schedule(3, EventKind::timer, [] {}), std::logic_error);
}

TEST_CASE("run_until on an empty queue only advances the clock")
{
    Scheduler s;
    CHECK(s.run_until(100) == 0);
    CHECK(s.now() == 100);
}

TEST_CASE("run_until fires everything due")
{
    Scheduler s;
    for (SimTime t : {1, 2, 2}) {
        s.schedule(t, EventKind::timer, [] {});
    }
    s.schedule(3, EventKind::timer, [] {});
    CHECK(s.run_until(2) == 3);
    CHECK(s.now() == 2);
    CHECK(s.pending() == 1);
}

TEST_CASE("cancelled events never fire")
{
    Scheduler s;
    bool fired = false;
    auto h = s.schedule(4, EventKind::timer, [&] { fired = true; });
    CHECK(s.cancel(h));
    CHECK_FALSE(s.cancel(h));
    s.run_until(10);
    CHECK_FALSE(fired);
}

namespace {

// Reference replay: a flat list scanned for the earliest (time, seq) entry.
struct RefEvent {
    SimTime at;
    std::uint64_t seq;
    int id;
};

} // namespace

TEST_CASE("handlers that schedule more work match a reference replay")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        // Each event id spawns children at fixed offsets chosen up front.
        std::map<int, std::vector<SimTime>> children;
        int next_id = 0;
        std::vector<std::pair<SimTime, int>> roots;
        for (int i = 0; i < 10; ++i) {
            roots.emplace_back(rng() % 20, next_id++);
        }
        for (int id = 0; id < 60; ++id) {
            int n = static_cast<int>(rng() % 3);
            for (int k = 0; k < n; ++k) {
                children[id].push_back(rng() % 3);
            }
        }
        const SimTime horizon = 30;

        Scheduler s;
        std::vector<std::pair<SimTime, int>> got;
        int spawn = next_id;
        std::function<void(int)> fire = [&](int id) {
            got.emplace_back(s.now(), id);
            for (SimTime off : children[id]) {
                int child = spawn++;
                if (child >= 60) {
                    return;
                }
                s.schedule_in(off, EventKind::timer, [&fire, child] { fire(child); });
            }
        };
        for (auto [t, id] : roots) {
            s.schedule(t, EventKind::workload, [&fire, id = id] { fire(id); });
        }
        s.run_until(horizon);

        std::vector<RefEvent> queue;
        std::uint64_t seq = 0;
        for (auto [t, id] : roots) {
            queue.push_back({t, seq++, id});
        }
        std::vector<std::pair<SimTime, int>> want;
        int ref_spawn = next_id;
        while (!queue.empty()) {
            auto it = std::min_element(queue.begin(), queue.end(), [](const RefEvent& a, const RefEvent& b) {
                return a.at != b.at ? a.at < b.at : a.seq < b.seq;
            });
            RefEvent ev = *it;
            queue.erase(it);
            if (ev.at > horizon) {
                continue;
            }
            want.emplace_back(ev.at, ev.id);
            for (SimTime off : children[ev.id]) {
                int child = ref_spawn++;
                if (child >= 60) {
                    break;
                }
                queue.push_back({ev.at + off, seq++, child});
            }
        }
        CHECK(got == want);
    }
}

TEST_CASE("fired events never go back in time")
{
    Scheduler s;
    std::mt19937_64 rng(99);
    std::vector<SimTime> seen;
    s.set_observer([&](SimTime t, std::uint64_t, EventKind) { seen.push_back(t); });
    for (int i = 0; i < 200; ++i) {
        s.schedule(rng() % 50, EventKind::timer, [&s, &rng] {
            if (rng() % 2) {
                s.schedule_in(rng() % 5, EventKind::timer, [] {});
            }
        });
    }
    s.run_until(100);
    CHECK(std::is_sorted(seen.begin(), seen.end()));
    CHECK(s.fired() == seen.size());
}

TEST_CASE("random streams are reproducible and independent")
{
    RngStreams a(42);
    RngStreams b(42);
    for (int i = 0; i < 10; ++i) {
        CHECK(a.next_u64(streams::mobility) == b.next_u64(streams::mobility));
    }

    RngStreams c(42);
    RngStreams d(42);
    // Extra draws on one stream leave the other untouched.
    for (int i = 0; i < 5; ++i) {
        d.next_u64(streams::faults);
    }
    for (int i = 0; i < 10; ++i) {
        CHECK(c.next_u64(streams::workload) == d.next_u64(streams::workload));
    }

    RngStreams e(42);
    std::vector<std::uint64_t> m;
    std::vector<std::uint64_t> w;
    for (int i = 0; i < 10; ++i) {
        m.push_back(e.next_u64(streams::mobility));
        w.push_back(e.next_u64(streams::workload));
    }
    CHECK(m != w);
}

TEST_CASE("uniform draws stay in range")
{
    RngStreams r(7);
    for (int i = 0; i < 1000; ++i) {
        double u = r.uniform(streams::layout);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double v = r.uniform(streams::layout, 2.0, 3.0);
        CHECK(v >= 2.0);
        CHECK(v < 3.0);
        auto k = r.uniform_int(streams::layout, 4, 6);
        CHECK(k >= 4);
        CHECK(k <= 6);
    }
}
