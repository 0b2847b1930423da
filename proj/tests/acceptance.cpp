// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include "ads/audit.hpp"
#include "ads/metrics.hpp"
#include "ads/oracle.hpp"
#include "ads/scenario.hpp"
#include "ads/simulation.hpp"
#include "ads/transport.hpp"
#include "helpers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace ads;
using namespace ads::testing;

namespace {

constexpr double kTau = 6.283185307179586;

struct Result {
    bool pass = true;
    std::string detail;
    std::string first_failure;

    void fail(const std::string& why)
    {
        if (pass) {
            first_failure = why;
        }
        pass = false;
    }
};

/// Flood duplicate processing seen across every simulation in the suite.
std::size_t g_flood_dupes = 0;
std::size_t g_flood_runs = 0;

void audit_floods(const Simulation& sim)
{
    g_flood_dupes += audit::flood_once(sim.trace().records()).size();
    ++g_flood_runs;
}

Position in_disk(std::mt19937_64& rng, Position c, double r)
{
    std::uniform_real_distribution<double> u(0, 1);
    double rr = r * std::sqrt(u(rng));
    double a = kTau * u(rng);
    return {c.x + rr * std::cos(a), c.y + rr * std::sin(a)};
}

std::set<ItemId> accepted_items(const Simulation& sim)
{
    std::set<ItemId> out;
    for (const auto& r : of_kind(sim.trace(), "publish_outcome")) {
        if (r.u64("accepted") == 1) {
            out.insert(r.u64("item"));
        }
    }
    return out;
}

std::string str(const std::set<ItemId>& s)
{
    std::ostringstream os;
    os << '{';
    for (auto it = s.begin(); it != s.end(); ++it) {
        os << (it == s.begin() ? "" : ",") << *it;
    }
    os << '}';
    return os.str();
}

// 1. IMM uniqueness and election ---------------------------------------------

Result election()
{
    Result res;
    std::size_t violations = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng(seed);
        Scenario sc = blank(600, 600, 100, 3000);
        sc.seed = seed;
        add_market(sc, {300, 300}, 150, 40);
        std::size_t n = 5 + rng() % 46;
        int mode = static_cast<int>(seed % 3);
        SimTime shared = 10 + static_cast<SimTime>(rng() % 40);
        SimTime last = 0;
        for (std::size_t i = 0; i < n; ++i) {
            // Inside a 45 m disk every pair is within radio range.
            Position inside = in_disk(rng, {300, 300}, 45);
            if (mode == 0) {
                add_device(sc, inside);
                continue;
            }
            SimTime t = mode == 1 ? shared : 10 + 30 * static_cast<SimTime>(rng() % 6);
            last = std::max(last, t);
            double a = kTau * static_cast<double>(rng() % 360) / 360.0;
            Position outside{300 + 250 * std::cos(a), 300 + 250 * std::sin(a)};
            add_device(sc, outside, 10, script({{0, outside}, {t, inside}}));
        }
        finish(sc);
        Simulation sim(sc);
        sim.run_until(last + 100);
        bool quiet = sim.run_until_quiescent(sc.horizon);
        const auto& recs = sim.trace().records();
        std::size_t v = audit::epochs_increase(recs).size() + audit::no_stale_actions(recs).size();
        std::size_t imms = sim.imms(0).size();
        if (!quiet || imms != 1 || v != 0) {
            ++violations;
            std::ostringstream os;
            os << "seed " << seed << " n=" << n << " mode=" << mode << " quiescent=" << quiet << " imms=" << imms
               << " audit=" << v;
            res.fail(os.str());
        }
        audit_floods(sim);
    }
    res.detail = "100 scenarios, " + std::to_string(violations) + " violations (tolerance 0)";
    return res;
}

// 2. Graceful mobility loses nothing -----------------------------------------

Result graceful_mobility()
{
    Result res;
    std::size_t lost = 0;
    std::size_t total = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed * 31);
        Scenario sc = blank(600, 600, 110, 1300);
        sc.seed = seed;
        add_market(sc, {300, 300}, 180, 50);
        DeviceId center = add_device(sc, {300, 300}, 8);
        for (int i = 0; i < 12; ++i) {
            double a = kTau * i / 12;
            add_device(sc, {300 + 90 * std::cos(a), 300 + 90 * std::sin(a)}, 8);
        }
        std::size_t movers = 10 + rng() % 11;
        for (std::size_t i = 0; i < movers; ++i) {
            DeviceSpec d;
            d.id = static_cast<DeviceId>(sc.devices.size());
            d.capacity = 6;
            d.mobility = RandomWaypoint{1, 5, 0, 30};
            d.knows = {0};
            sc.devices.push_back(d);
        }
        for (ItemId id = 1; id <= 20; ++id) {
            auto who = static_cast<DeviceId>(13 + rng() % movers);
            publish(sc, 30 + 15 * static_cast<SimTime>(id), who, item(id, "a", 1, 1 + rng() % 2));
        }
        fault(sc, 450, Verb::leave, 3);
        fault(sc, 550, Verb::shutdown, 7);
        async_query(sc, 1000, center, 1, tag("a"), 150);
        finish(sc);
        Simulation sim(sc);
        sim.run();
        audit_floods(sim);
        std::set<ItemId> acked = accepted_items(sim);
        Metrics m = compute_metrics(sim.trace().records());
        std::set<ItemId> got;
        if (m.queries.count(1)) {
            got.insert(m.queries.at(1).delivered.begin(), m.queries.at(1).delivered.end());
        }
        std::set<ItemId> missing;
        for (ItemId id : acked) {
            if (!got.count(id)) {
                missing.insert(id);
            }
        }
        total += acked.size();
        lost += missing.size();
        if (!missing.empty() || m.items_lost != 0) {
            res.fail("seed " + std::to_string(seed) + " missing " + str(missing) + " lost " +
                     std::to_string(m.items_lost));
        }
    }
    res.detail = std::to_string(lost) + " of " + std::to_string(total) +
                 " acked items not retrievable over 10 runs (tolerance 0)";
    return res;
}

// 3. Strategy contrast --------------------------------------------------------

Scenario contrast_base(std::uint64_t seed, ReplicationStrategy strategy)
{
    std::mt19937_64 rng(seed * 101);
    Scenario sc = blank(600, 600, 100, 700);
    sc.seed = seed;
    sc.constants.strategy = strategy;
    add_market(sc, {300, 300}, 150, 40);
    // One slot per device, so every host carries exactly one copy.
    for (int i = 0; i < 14; ++i) {
        add_device(sc, in_disk(rng, {300, 300}, 45), 1);
    }
    for (ItemId id = 1; id <= 4; ++id) {
        publish(sc, 20 + static_cast<SimTime>(id), static_cast<DeviceId>(id), item(id, "a", 1, 2));
    }
    return sc;
}

std::map<ItemId, std::set<DeviceId>> assignment_at(const Scenario& sc, SimTime t)
{
    Simulation sim(sc);
    sim.run_until(t);
    auto imms = sim.imms(0);
    if (imms.size() != 1) {
        return {};
    }
    return sim.imm_state(imms[0])->assignment_map;
}

Result strategy_contrast()
{
    Result res;
    std::size_t pairs = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Scenario s1 = contrast_base(seed, ReplicationStrategy::signoff);
        Scenario s2 = contrast_base(seed, ReplicationStrategy::periodic);
        auto before = assignment_at(s1, 90);
        std::string tag = "seed " + std::to_string(seed) + ": ";
        if (before.size() != 4 || assignment_at(s2, 90) != before) {
            res.fail(tag + "placements differ before the faults");
            continue;
        }
        Simulation probe(s1);
        probe.run_until(90);
        DeviceId imm = probe.imms(0).front();
        std::vector<DeviceId> victims;
        for (const auto& [id, hosts] : before) {
            for (DeviceId h : hosts) {
                if (h != imm) {
                    victims.push_back(h);
                    break;
                }
            }
        }
        auto with_faults = [&](Scenario sc, Verb verb) {
            for (DeviceId v : victims) {
                fault(sc, 100, verb, v);
            }
            finish(sc);
            return sc;
        };
        Simulation crash1(with_faults(s1, Verb::crash));
        Simulation crash2(with_faults(s2, Verb::crash));
        Simulation leave1(with_faults(s1, Verb::leave));
        crash1.run();
        crash2.run();
        leave1.run();
        for (const Simulation* s : {&crash1, &crash2, &leave1}) {
            audit_floods(*s);
        }
        auto t1 = census_ground_truth(crash1, 0);
        auto t2 = census_ground_truth(crash2, 0);
        auto tl = census_ground_truth(leave1, 0);
        std::size_t survive1 = 0;
        std::size_t survive2 = 0;
        for (ItemId id = 1; id <= 4; ++id) {
            std::size_t c1 = t1.count(id) ? t1.at(id).size() : 0;
            std::size_t c2 = t2.count(id) ? t2.at(id).size() : 0;
            std::size_t cl = tl.count(id) ? tl.at(id).size() : 0;
            survive1 += c1 > 0;
            survive2 += c2 > 0;
            if (c1 >= 2) {
                res.fail(tag + "sign-off strategy repaired a crash of item " + std::to_string(id));
            }
            if (cl != 2) {
                res.fail(tag + "sign-off leaver left item " + std::to_string(id) + " at " + std::to_string(cl));
            }
            if (c2 != 2) {
                res.fail(tag + "periodic strategy left item " + std::to_string(id) + " at " + std::to_string(c2));
            }
        }
        const Constants& c = s2.constants;
        SimTime bound = c.t_heartbeat + 4 * c.hop_latency * c.ttl;
        for (const auto& d : compute_metrics(crash2.trace().records()).deficits) {
            if (!d.end || *d.end - d.start > bound) {
                res.fail(tag + "periodic repair of item " + std::to_string(d.item) + " exceeded " +
                         std::to_string(bound));
            }
        }
        if (survive2 < survive1) {
            res.fail(tag + "periodic survival below sign-off survival");
        }
        ++pairs;
    }
    res.detail = std::to_string(pairs) + " paired runs, 4 degree-2 items each";
    return res;
}

// 4. Sync local query exactness ----------------------------------------------

void put(Scenario& sc, SimTime at, DeviceId d, InfoItem it)
{
    WorkloadEvent ev;
    ev.at = at;
    ev.verb = Verb::put;
    ev.device = d;
    ev.item = std::move(it);
    sc.workload.push_back(ev);
}

std::size_t g_reach_checked = 0;
std::size_t g_reach_mismatch = 0;

/// Every flood in a frozen-topology run against the BFS oracle.
void check_reach(Simulation& sim)
{
    TopologySnapshot snap = TopologySnapshot::of(sim.world());
    for (const auto& r : of_kind(sim.trace(), "flood")) {
        const FloodRecord* f = sim.transport().flood_record(r.u64("msg"));
        if (!f) {
            continue;
        }
        ++g_reach_checked;
        if (f->reached != oracle_reachability(snap, f->origin, f->region, f->ttl)) {
            ++g_reach_mismatch;
        }
    }
}

Result sync_exactness()
{
    Result res;
    std::size_t mismatches = 0;
    std::size_t nonempty = 0;
    const char* tags[] = {"news", "food"};
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0, 500);
        Scenario sc = blank(500, 500, 80 + static_cast<double>(rng() % 60), 100);
        std::size_t n = 5 + rng() % 36;
        for (std::size_t i = 0; i < n; ++i) {
            add_device(sc, {u(rng), u(rng)});
        }
        for (ItemId id = 1; id <= 40; ++id) {
            std::optional<SimTime> life;
            if (rng() % 3 == 0) {
                life = 4 + rng() % 10;
            }
            put(sc, 1, static_cast<DeviceId>(rng() % n), item(id, tags[rng() % 2], 1, 1, life));
        }
        DeviceId origin = static_cast<DeviceId>(rng() % n);
        auto hops = static_cast<std::uint32_t>(rng() % 6);
        SimTime timeout = hops == 0 ? 0 : static_cast<SimTime>(1 + rng() % 13);
        Predicate pred;
        if (rng() % 4 == 0) {
            pred.item_ids = {static_cast<ItemId>(1 + rng() % 40), static_cast<ItemId>(1 + rng() % 40)};
        } else {
            pred = tag(tags[rng() % 2]);
        }
        sync_query(sc, 5, origin, 1, pred, hops, timeout);
        finish(sc);
        Simulation sim(sc, SimOptions{true, true});
        sim.run_until(4);
        std::vector<std::vector<InfoItem>> stores(n);
        for (DeviceId d = 0; d < n; ++d) {
            for (const auto& [id, s] : sim.store(d).items()) {
                stores[d].push_back(s.item);
            }
        }
        auto want = oracle_sync_local(TopologySnapshot::of(sim.world()), stores, origin, pred, hops, timeout,
                                      sc.constants.hop_latency, 5);
        nonempty += !want.empty();
        sim.run_until(40);
        std::set<ItemId> got;
        bool done = sim.sync_outcomes().count(1) != 0;
        if (done) {
            for (const auto& it : sim.sync_outcomes().at(1).items) {
                got.insert(it.id);
            }
        }
        if (!done || got != want) {
            ++mismatches;
            res.fail("seed " + std::to_string(seed) + " got " + str(got) + " want " + str(want));
        }
        check_reach(sim);
        audit_floods(sim);
    }
    res.detail = "1000 cases (" + std::to_string(nonempty) + " with results), " + std::to_string(mismatches) +
                 " mismatches (tolerance 0)";
    return res;
}

// 5. Async query soundness and completeness ----------------------------------

Scenario async_base(std::mt19937_64& rng, std::size_t n_items)
{
    Scenario sc = blank(600, 600, 100, 800);
    add_market(sc, {300, 300}, 150, 40);
    add_device(sc, {300, 300});
    for (int i = 0; i < 6; ++i) {
        double a = kTau * i / 6;
        add_device(sc, {300 + 60 * std::cos(a), 300 + 60 * std::sin(a)});
    }
    add_device(sc, {440, 300});
    add_device(sc, {520, 300});
    for (ItemId id = 1; id <= n_items; ++id) {
        publish(sc, 20 + static_cast<SimTime>(id), static_cast<DeviceId>(1 + rng() % 6),
                item(id, rng() % 3 ? "news" : "food"));
    }
    return sc;
}

Result async_queries()
{
    Result res;
    std::size_t connected = 0;
    std::size_t partitioned = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed * 7);
        std::string tag_s = "seed " + std::to_string(seed) + ": ";
        // Connected, crash-free, honest itinerary.
        {
            Scenario sc = async_base(rng, 3 + rng() % 12);
            DeviceId q = seed % 2 ? add_device(sc, {580, 300})
                                  : add_device(sc, {580, 300}, 10, script({{100, {580, 300}}, {200, {540, 360}}}));
            SimTime at = 60 + static_cast<SimTime>(rng() % 60);
            async_query(sc, at, q, 1, tag("news"), 150 + static_cast<SimTime>(rng() % 100));
            finish(sc);
            Simulation sim(sc);
            sim.run();
            audit_floods(sim);
            Metrics m = compute_metrics(sim.trace().records());
            std::set<ItemId> expect;
            for (ItemId id : accepted_items(sim)) {
                for (const auto& ev : sc.workload) {
                    if (ev.verb == Verb::publish && ev.item.id == id && ev.item.type_tag == "news") {
                        expect.insert(id);
                    }
                }
            }
            if (!m.queries.count(1)) {
                res.fail(tag_s + "connected query has no stats");
            } else {
                const auto& qs = m.queries.at(1);
                std::set<ItemId> matched(qs.matched.begin(), qs.matched.end());
                if (qs.recall != 1.0 || qs.precision != 1.0 || matched != expect || !qs.closed) {
                    res.fail(tag_s + "connected recall " + std::to_string(qs.recall) + " precision " +
                             std::to_string(qs.precision) + " matched " + str(matched) + " expect " + str(expect));
                }
            }
            ++connected;
        }
        // Induced partition: a deviating initiator, or a crashed path device.
        {
            Scenario sc = async_base(rng, 3 + rng() % 12);
            DeviceId q = kNoDevice;
            if (seed % 2) {
                q = add_device(sc, {580, 300}, 10, script({{110, {580, 300}}, {200, {590, 10}}}));
                sc.devices[q].declared = Itinerary{{{0, {580, 300}}}, ItinerarySource::declared};
            } else {
                q = add_device(sc, {580, 300});
                fault(sc, 130, Verb::crash, 8);
            }
            async_query(sc, 100, q, 1, tag("news"), 200);
            finish(sc);
            Simulation sim(sc);
            sim.run();
            audit_floods(sim);
            Metrics m = compute_metrics(sim.trace().records());
            if (m.chunks_delivered + m.chunks_undelivered != m.chunks_emitted) {
                res.fail(tag_s + "chunk accounting does not add up");
            }
            for (const auto& [id, qs] : m.queries) {
                if (qs.precision != 1.0 || qs.chunks_delivered + qs.chunks_undelivered != qs.chunks_emitted) {
                    res.fail(tag_s + "partitioned precision " + std::to_string(qs.precision));
                }
            }
            if (!audit::chunks_to_initiator(sim.trace().records()).empty()) {
                res.fail(tag_s + "chunk delivered to a non-initiator");
            }
            ++partitioned;
        }
    }
    res.detail = std::to_string(connected) + " connected and " + std::to_string(partitioned) +
                 " partitioned runs (recall and precision tolerance 0)";
    return res;
}

// 6. Flood suppression and reach ---------------------------------------------

Result flooding()
{
    Result res;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng(seed * 13);
        std::uniform_real_distribution<double> u(0, 1000);
        Scheduler scheduler;
        World world(Bounds{1000, 1000}, 90 + static_cast<double>(rng() % 60));
        Trace trace;
        TransportParams params;
        params.keep_flood_records = true;
        Transport transport(scheduler, world, trace, params);
        std::size_t n = 20 + rng() % 181;
        for (std::size_t i = 0; i < n; ++i) {
            world.add_device({u(rng), u(rng)}, Stationary{});
        }
        auto origin = static_cast<DeviceId>(rng() % n);
        std::optional<Region> region;
        if (rng() % 2) {
            region = Region{world.position(origin), 150 + static_cast<double>(rng() % 400)};
        }
        auto ttl = static_cast<std::uint32_t>(rng() % 20);
        Message m = transport.make(origin, ImmProbe{0});
        MsgId id = m.id;
        transport.flood(origin, m, region, ttl, [](DeviceId, const Message&) {});
        scheduler.run_until(100);
        ++g_reach_checked;
        if (transport.flood_record(id)->reached != oracle_reachability(TopologySnapshot::of(world), origin, region, ttl)) {
            ++g_reach_mismatch;
            res.fail("standalone seed " + std::to_string(seed) + " reach differs");
        }
        g_flood_dupes += audit::flood_once(trace.records()).size();
    }
    if (g_flood_dupes != 0) {
        res.fail(std::to_string(g_flood_dupes) + " duplicate flood processings");
    }
    if (g_reach_mismatch != 0) {
        res.fail(std::to_string(g_reach_mismatch) + " reach mismatches");
    }
    res.detail = std::to_string(g_flood_dupes) + " duplicate processings in " + std::to_string(g_flood_runs + 100) +
                 " runs, " + std::to_string(g_reach_mismatch) + " of " + std::to_string(g_reach_checked) +
                 " floods off the BFS oracle (tolerance 0)";
    return res;
}

// 7. IMM recovery -------------------------------------------------------------

Result recovery()
{
    Result res;
    std::size_t runs = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed * 17);
        std::string tag_s = "seed " + std::to_string(seed) + ": ";
        Scenario sc = blank(600, 600, 100, 400);
        sc.seed = seed;
        add_market(sc, {300, 300}, 150, 40);
        std::size_t n = 6 + rng() % 7;
        add_device(sc, {300, 300});
        for (std::size_t i = 1; i < n; ++i) {
            add_device(sc, in_disk(rng, {300, 300}, 45));
        }
        std::size_t items = 5 + rng() % 6;
        for (ItemId id = 1; id <= items; ++id) {
            publish(sc, 10 + static_cast<SimTime>(id), static_cast<DeviceId>(1 + rng() % (n - 1)),
                    item(id, "t", 1, 1 + rng() % 2));
        }
        finish(sc);
        Simulation sim(sc);
        sim.run_until(100);
        auto imms = sim.imms(0);
        if (imms.size() != 1) {
            res.fail(tag_s + "no single IMM before the crash");
            continue;
        }
        DeviceId imm = imms[0];
        auto before = sim.imm_state(imm)->assignment_map;
        if (before != census_ground_truth(sim, 0)) {
            res.fail(tag_s + "pre-crash map differs from the stores");
            continue;
        }
        std::optional<ImmState> rebuilt;
        sim.on_rebuild([&](DeviceId, const ImmState& st) { rebuilt = st; });
        WorkloadEvent crash;
        crash.at = 110;
        crash.verb = Verb::crash;
        crash.device = imm;
        sim.inject(crash);
        WorkloadEvent pub;
        pub.at = 130;
        pub.verb = Verb::publish;
        pub.device = imm == 1 ? 2 : 1;
        pub.item = item(999);
        sim.inject(pub);
        sim.run();
        audit_floods(sim);
        std::map<ItemId, std::set<DeviceId>> expect;
        for (auto [id, hosts] : before) {
            hosts.erase(imm);
            if (!hosts.empty()) {
                expect[id] = hosts;
            }
        }
        if (!rebuilt) {
            res.fail(tag_s + "no rebuild observed");
        } else if (rebuilt->assignment_map != expect) {
            res.fail(tag_s + "rebuilt map differs from ground truth");
        } else {
            for (const auto& [id, e] : rebuilt->replica_registry) {
                if (!expect.count(id) || e.hosts != expect.at(id)) {
                    res.fail(tag_s + "rebuilt registry differs for item " + std::to_string(id));
                }
            }
        }
        ++runs;
    }
    res.detail = std::to_string(runs) + " IMM crashes, rebuilt state compared exactly";
    return res;
}

// 8. Load balancing -----------------------------------------------------------

Result load_balancing()
{
    Result res;
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::map<DeviceId, std::uint32_t> cap;
        std::size_t n = 5 + rng() % 26;
        for (DeviceId d = 0; d < n; ++d) {
            cap[d] = 10 + static_cast<std::uint32_t>(rng() % 40);
        }
        std::vector<PlacementRequest> reqs;
        std::size_t k = 20 + rng() % 80;
        for (std::size_t i = 0; i < k; ++i) {
            reqs.push_back({1 + static_cast<std::uint32_t>(rng() % 4), 1 + static_cast<std::uint32_t>(rng() % 3)});
        }
        auto g = place_greedy(cap, reqs);
        std::mt19937_64 prng(seed * 7919);
        auto r = place_random(cap, reqs, prng);
        wins += g.max_utilization <= r.max_utilization;
    }
    if (wins < 95) {
        res.fail("greedy at or below random on only " + std::to_string(wins));
    }
    res.detail = "greedy max utilization <= random on " + std::to_string(wins) + " of 100 (threshold 95)";
    return res;
}

// 9. Determinism --------------------------------------------------------------

Result determinism(const std::string& scenario_dir)
{
    Result res;
    Scenario plaza = load_scenario(scenario_dir + "/plaza.ads");
    std::size_t pairs = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Scenario sc = plaza;
        sc.seed = seed;
        Simulation a(sc);
        a.run();
        Simulation b(sc);
        b.run();
        if (a.trace().to_text() != b.trace().to_text()) {
            res.fail("plaza seed " + std::to_string(seed) + " traces differ");
        }
        ++pairs;
    }
    res.detail = std::to_string(pairs) + " scenario/seed pairs run twice, traces compared byte for byte";
    return res;
}

} // namespace

int main(int argc, char** argv)
{
    std::string scenario_dir = argc > 1 ? argv[1] : ADS_SCENARIO_DIR;
    struct Criterion {
        const char* name;
        std::function<Result()> run;
    };
    const Criterion criteria[] = {
        {"imm-uniqueness", election},
        {"graceful-mobility-no-loss", graceful_mobility},
        {"strategy-contrast", strategy_contrast},
        {"sync-query-exactness", sync_exactness},
        {"async-query-soundness", async_queries},
        {"flood-suppression", flooding},
        {"imm-recovery", recovery},
        {"load-balancing", load_balancing},
        {"determinism", [&] { return determinism(scenario_dir); }},
    };
    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        auto t0 = std::chrono::steady_clock::now();
        Result r = c.run();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s: %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", index, c.name, r.detail.c_str(), secs);
        if (!r.pass) {
            std::printf("     first failure: %s\n", r.first_failure.c_str());
            ++failed;
        }
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
