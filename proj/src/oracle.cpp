// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/oracle.hpp"

#include "ads/simulation.hpp"

#include <algorithm>
#include <deque>

namespace ads {

TopologySnapshot TopologySnapshot::of(const World& world)
{
    TopologySnapshot s;
    s.range = world.radio_range();
    for (DeviceId d = 0; d < world.size(); ++d) {
        s.positions.push_back(world.position(d));
        s.alive.push_back(world.alive(d));
    }
    return s;
}

bool TopologySnapshot::linked(DeviceId a, DeviceId b) const
{
    return a != b && alive[a] && alive[b] && distance_sq(positions[a], positions[b]) <= range * range;
}

std::map<DeviceId, std::uint32_t> oracle_reachability(const TopologySnapshot& snapshot, DeviceId origin,
                                                      std::optional<Region> region,
                                                      std::optional<std::uint32_t> hop_limit)
{
    std::map<DeviceId, std::uint32_t> dist;
    dist[origin] = 0;
    if (!snapshot.alive[origin]) {
        return dist;
    }
    std::deque<DeviceId> frontier{origin};
    while (!frontier.empty()) {
        DeviceId u = frontier.front();
        frontier.pop_front();
        std::uint32_t next = dist[u] + 1;
        if (hop_limit && next > *hop_limit) {
            continue;
        }
        for (DeviceId v = 0; v < snapshot.positions.size(); ++v) {
            if (dist.count(v) || !snapshot.linked(u, v)) {
                continue;
            }
            if (region && !region->contains(snapshot.positions[v])) {
                continue;
            }
            dist[v] = next;
            frontier.push_back(v);
        }
    }
    return dist;
}

std::set<ItemId> oracle_sync_local(const TopologySnapshot& snapshot, const std::vector<std::vector<InfoItem>>& stores,
                                   DeviceId origin, const Predicate& predicate, std::uint32_t hop_limit,
                                   SimTime timeout, SimTime hop_latency, SimTime start)
{
    std::set<ItemId> out;
    for (const auto& [device, hops] : oracle_reachability(snapshot, origin, std::nullopt, hop_limit)) {
        SimTime reach = start + hops * hop_latency;
        if (2 * hops * hop_latency > timeout) {
            continue;
        }
        for (const auto& item : stores[device]) {
            if (predicate.matches(item) && !item.expired_at(reach)) {
                out.insert(item.id);
            }
        }
    }
    return out;
}

std::map<ItemId, std::set<DeviceId>> census_ground_truth(const Simulation& sim, MarketId market)
{
    std::map<ItemId, std::set<DeviceId>> out;
    for (DeviceId d = 0; d < sim.device_count(); ++d) {
        if (!sim.alive(d) || sim.membership(d) != market) {
            continue;
        }
        for (const auto& [id, stored] : sim.store(d).items()) {
            if (stored.assigned) {
                out[id].insert(d);
            }
        }
    }
    return out;
}

namespace {

PlacementResult summarize(const std::map<DeviceId, std::uint32_t>& total, const std::map<DeviceId, std::uint32_t>& free,
                          std::uint32_t placed, std::uint32_t unplaced)
{
    PlacementResult r{placed, unplaced, 0.0};
    for (const auto& [d, cap] : total) {
        if (cap > 0) {
            double used = static_cast<double>(cap - free.at(d));
            r.max_utilization = std::max(r.max_utilization, used / cap);
        }
    }
    return r;
}

} // namespace

PlacementResult place_greedy(std::map<DeviceId, std::uint32_t> capacity, const std::vector<PlacementRequest>& requests)
{
    const auto total = capacity;
    std::uint32_t placed = 0;
    std::uint32_t unplaced = 0;
    for (const auto& req : requests) {
        auto hosts = select_hosts(capacity, req.size, req.degree);
        for (DeviceId h : hosts) {
            capacity[h] -= req.size;
        }
        placed += static_cast<std::uint32_t>(hosts.size());
        unplaced += req.degree - static_cast<std::uint32_t>(hosts.size());
    }
    return summarize(total, capacity, placed, unplaced);
}

PlacementResult place_random(std::map<DeviceId, std::uint32_t> capacity, const std::vector<PlacementRequest>& requests,
                             std::mt19937_64& rng)
{
    const auto total = capacity;
    std::uint32_t placed = 0;
    std::uint32_t unplaced = 0;
    for (const auto& req : requests) {
        std::vector<DeviceId> fit;
        for (const auto& [d, free] : capacity) {
            if (free >= req.size) {
                fit.push_back(d);
            }
        }
        std::shuffle(fit.begin(), fit.end(), rng);
        std::uint32_t n = std::min<std::uint32_t>(req.degree, static_cast<std::uint32_t>(fit.size()));
        for (std::uint32_t i = 0; i < n; ++i) {
            capacity[fit[i]] -= req.size;
        }
        placed += n;
        unplaced += req.degree - n;
    }
    return summarize(total, capacity, placed, unplaced);
}

} // namespace ads
