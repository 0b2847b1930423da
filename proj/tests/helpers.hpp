// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/scenario.hpp"
#include "ads/simulation.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace ads::testing {

inline Scenario blank(double width = 1000, double height = 1000, double range = 100, SimTime horizon = 1000)
{
    Scenario sc;
    sc.bounds = Bounds{width, height};
    sc.range = range;
    sc.horizon = horizon;
    return sc;
}

inline MarketId add_market(Scenario& sc, Position center, double radius, double core = 0.0)
{
    MarketId id = static_cast<MarketId>(sc.markets.size());
    sc.markets.push_back(MarketSpec{id, center, radius, core > 0.0 ? core : radius / 4});
    return id;
}

inline DeviceId add_device(Scenario& sc, Position p, std::uint32_t capacity = 10,
                           MobilityModel mobility = Stationary{}, std::vector<MarketId> knows = {0})
{
    DeviceSpec d;
    d.id = static_cast<DeviceId>(sc.devices.size());
    d.capacity = capacity;
    d.position = p;
    d.mobility = std::move(mobility);
    d.knows = sc.markets.empty() ? std::vector<MarketId>{} : std::move(knows);
    sc.devices.push_back(d);
    return d.id;
}

inline Scripted script(std::vector<Waypoint> waypoints)
{
    return Scripted{Itinerary{std::move(waypoints), ItinerarySource::declared}};
}

inline InfoItem item(ItemId id, std::string tag = "news", std::uint32_t size = 1, std::uint32_t degree = 1,
                     std::optional<SimTime> lifetime = std::nullopt)
{
    InfoItem it;
    it.id = id;
    it.type_tag = std::move(tag);
    it.size = size;
    it.replication_degree = degree;
    it.lifetime = lifetime;
    if (degree >= 2) {
        it.importance = Importance::high;
    }
    return it;
}

inline void publish(Scenario& sc, SimTime at, DeviceId d, InfoItem it, std::optional<MarketId> market = std::nullopt)
{
    WorkloadEvent ev;
    ev.at = at;
    ev.verb = Verb::publish;
    ev.device = d;
    ev.item = std::move(it);
    ev.market = market;
    sc.workload.push_back(ev);
}

inline void fault(Scenario& sc, SimTime at, Verb verb, DeviceId d)
{
    WorkloadEvent ev;
    ev.at = at;
    ev.verb = verb;
    ev.device = d;
    sc.workload.push_back(ev);
}

inline void async_query(Scenario& sc, SimTime at, DeviceId d, QueryId q, Predicate pred, SimTime active_for,
                        MarketId market = 0, std::optional<std::uint32_t> expected = std::nullopt)
{
    WorkloadEvent ev;
    ev.at = at;
    ev.verb = Verb::query;
    ev.device = d;
    ev.query = q;
    ev.predicate = std::move(pred);
    ev.active_for = active_for;
    ev.market = market;
    ev.expected = expected;
    sc.workload.push_back(ev);
}

inline void sync_query(Scenario& sc, SimTime at, DeviceId d, QueryId q, Predicate pred, std::uint32_t hops,
                       SimTime timeout)
{
    WorkloadEvent ev;
    ev.at = at;
    ev.verb = Verb::sync;
    ev.device = d;
    ev.query = q;
    ev.predicate = std::move(pred);
    ev.hop_limit = hops;
    ev.timeout = timeout;
    sc.workload.push_back(ev);
}

/// Keeps workload in time order the way the loader does.
inline void finish(Scenario& sc)
{
    std::stable_sort(sc.workload.begin(), sc.workload.end(),
                     [](const WorkloadEvent& a, const WorkloadEvent& b) { return a.at < b.at; });
}

inline Predicate tag(std::string t)
{
    Predicate p;
    p.type_tag = std::move(t);
    return p;
}

inline std::vector<TraceRecord> of_kind(const Trace& trace, std::string_view kind)
{
    std::vector<TraceRecord> out;
    for (const auto& r : trace.records()) {
        if (r.kind == kind) {
            out.push_back(r);
        }
    }
    return out;
}

} // namespace ads::testing
