// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/audit.hpp"
#include "ads/metrics.hpp"
#include "ads/publish.hpp"
#include "ads/simulation.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace ads;
using namespace ads::testing;

namespace {

DirectoryEntry at(MarketId id, Position center, std::map<std::string, std::uint32_t> summary = {})
{
    DirectoryEntry e;
    e.spec = MarketSpec{id, center, 50, 10};
    e.type_summary = std::move(summary);
    return e;
}

PublishRequest request(std::string tag, SelectionPolicy policy)
{
    return PublishRequest{item(1, std::move(tag)), policy};
}

bool anywhere(const Simulation& sim, ItemId id)
{
    for (DeviceId d = 0; d < sim.device_count(); ++d) {
        if (sim.store(d).contains(id)) {
            return true;
        }
        if (const ImmState* st = sim.imm_state(d); st && st->knows(id)) {
            return true;
        }
    }
    return false;
}

/// Market cluster around (300,300) with a remote publisher slot at (580,300).
Scenario market_cluster(bool with_path)
{
    Scenario sc = blank(600, 600, 100, 600);
    add_market(sc, {300, 300}, 150, 40);
    add_device(sc, {300, 300});
    for (int i = 0; i < 4; ++i) {
        double a = 6.283185307179586 * i / 4;
        add_device(sc, {300 + 60 * std::cos(a), 300 + 60 * std::sin(a)});
    }
    if (with_path) {
        add_device(sc, {440, 300});
        add_device(sc, {520, 300});
    }
    return sc;
}

} // namespace

TEST_CASE("a single known market is chosen under either policy")
{
    Directory d{{4, at(4, {900, 900})}};
    for (auto policy : {SelectionPolicy::best_fit_type, SelectionPolicy::nearest_market}) {
        CHECK(select_market(d, {0, 0}, request("news", policy)) == MarketId{4});
    }
}

TEST_CASE("best fit picks the market with the most items of the tag")
{
    Directory d{{1, at(1, {900, 0}, {{"news", 9}})}, {2, at(2, {10, 0}, {{"news", 2}})}};
    CHECK(select_market(d, {0, 0}, request("news", SelectionPolicy::best_fit_type)) == MarketId{1});
}

TEST_CASE("best fit breaks equal counts by distance")
{
    Directory d{{1, at(1, {300, 0}, {{"news", 3}})}, {2, at(2, {100, 0}, {{"news", 3}})}};
    CHECK(select_market(d, {0, 0}, request("news", SelectionPolicy::best_fit_type)) == MarketId{2});
}

TEST_CASE("nearest market breaks equal distances by id")
{
    Directory d{{5, at(5, {100, 0})}, {3, at(3, {-100, 0})}, {9, at(9, {500, 0})}};
    CHECK(select_market(d, {0, 0}, request("x", SelectionPolicy::nearest_market)) == MarketId{3});
}

TEST_CASE("an empty directory selects nothing")
{
    CHECK_FALSE(select_market({}, {0, 0}, request("x", SelectionPolicy::nearest_market)));
}

TEST_CASE("selection is a pure function of directory and request")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1000);
    for (int round = 0; round < 200; ++round) {
        Directory d;
        for (MarketId m = 0; m < 5; ++m) {
            d[m] = at(m, {u(rng), u(rng)}, {{"news", static_cast<std::uint32_t>(rng() % 3)}});
        }
        Position from{u(rng), u(rng)};
        auto policy = round % 2 ? SelectionPolicy::best_fit_type : SelectionPolicy::nearest_market;
        auto first = select_market(d, from, request("news", policy));
        Directory copy = d;
        CHECK(select_market(copy, from, request("news", policy)) == first);
    }
}

TEST_CASE("a publisher inside the market gets its ack right away")
{
    Scenario sc = market_cluster(false);
    publish(sc, 50, 2, item(1, "news", 1, 2));
    finish(sc);
    Simulation sim(sc);
    sim.run_until(200);
    auto outcome = of_kind(sim.trace(), "publish_outcome");
    REQUIRE(outcome.size() == 1);
    CHECK(outcome[0].u64("accepted") == 1);
    auto acked = of_kind(sim.trace(), "outcome_delivered");
    REQUIRE(acked.size() == 1);
    CHECK(acked[0].device == 2);
    CHECK(acked[0].time - 50 <= 4 * static_cast<SimTime>(sc.constants.ttl));
    auto imms = sim.imms(0);
    REQUIRE(imms.size() == 1);
    CHECK(sim.imm_state(imms[0])->assignment_map.at(1).size() == 2);
}

TEST_CASE("a remote publisher on a connected path is acked and the item is assigned")
{
    Scenario sc = market_cluster(true);
    DeviceId pub = add_device(sc, {580, 300}, 10, Stationary{});
    publish(sc, 60, pub, item(7, "food"));
    finish(sc);
    Simulation sim(sc);
    sim.run_until(300);
    auto acked = of_kind(sim.trace(), "outcome_delivered");
    REQUIRE(acked.size() == 1);
    CHECK(acked[0].device == pub);
    auto imms = sim.imms(0);
    REQUIRE(imms.size() == 1);
    CHECK(sim.imm_state(imms[0])->knows(7));
    CHECK(audit::greedy_progress(sim.trace().records()).empty());
}

TEST_CASE("a refused publish is reported back to the publisher")
{
    Scenario sc = market_cluster(false);
    for (auto& d : sc.devices) {
        d.capacity = 2;
    }
    publish(sc, 50, 1, item(1, "news", 5));
    finish(sc);
    Simulation sim(sc);
    sim.run_until(200);
    auto outcome = of_kind(sim.trace(), "publish_outcome");
    REQUIRE(outcome.size() == 1);
    CHECK(outcome[0].u64("accepted") == 0);
    Metrics m = compute_metrics(sim.trace().records());
    CHECK(m.items_refused == 1);
    CHECK_FALSE(anywhere(sim, 1));
}

TEST_CASE("a carrier crash in transit loses the item without leaving traces in any registry")
{
    Scenario sc = market_cluster(false);
    DeviceId pub = add_device(sc, {580, 320}, 10, Stationary{});
    // Passes the isolated publisher and drives toward the market.
    DeviceId bus = add_device(sc, {590, 330}, 10, script({{40, {570, 320}}, {240, {400, 300}}}));
    sc.devices[bus].knows = {};
    publish(sc, 45, pub, item(9, "news"));
    fault(sc, 110, Verb::crash, bus);
    finish(sc);
    Simulation sim(sc);
    sim.run_until(100);
    REQUIRE(sim.store(bus).contains(9) == false);
    sim.run_until(400);
    Metrics m = compute_metrics(sim.trace().records());
    CHECK(m.items_lost == 1);
    CHECK(m.loss_causes["crash"] == 1);
    CHECK_FALSE(anywhere(sim, 9));
    bool carried = false;
    for (const auto& r : of_kind(sim.trace(), "custody")) {
        carried |= r.u64("to") == bus;
    }
    CHECK(carried);
}

TEST_CASE("an item is inserted into at most one market")
{
    Scenario sc = blank(800, 400, 100, 600);
    add_market(sc, {200, 200}, 150, 40);
    add_market(sc, {600, 200}, 150, 40);
    for (int x = 100; x <= 700; x += 75) {
        add_device(sc, {static_cast<double>(x), 200}, 10, Stationary{}, {0, 1});
    }
    for (ItemId id = 1; id <= 8; ++id) {
        WorkloadEvent ev;
        ev.at = 60 + static_cast<SimTime>(id);
        ev.verb = Verb::publish;
        ev.device = static_cast<DeviceId>(id % sc.devices.size());
        ev.item = item(id, "news", 1, 1 + id % 2);
        ev.policy = id % 2 ? SelectionPolicy::best_fit_type : SelectionPolicy::nearest_market;
        sc.workload.push_back(ev);
    }
    finish(sc);
    Simulation sim(sc);
    sim.run_until(400);
    std::map<ItemId, int> markets;
    for (MarketId m : {0u, 1u}) {
        for (DeviceId d : sim.imms(m)) {
            for (const auto& [id, hosts] : sim.imm_state(d)->assignment_map) {
                ++markets[id];
            }
        }
    }
    CHECK(markets.size() == 8);
    for (auto [id, n] : markets) {
        CHECK_MESSAGE(n == 1, "item ", id);
    }
}
