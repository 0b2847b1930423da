// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/broker.hpp"
#include "ads/market.hpp"
#include "ads/world.hpp"

#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace ads {

class Simulation;

/// Frozen copy of positions and liveness, indexed by device id.
struct TopologySnapshot {
    std::vector<Position> positions;
    std::vector<bool> alive;
    double range = 1.0;

    static TopologySnapshot of(const World& world);
    bool linked(DeviceId a, DeviceId b) const;
};

/// Brute-force BFS on the unit-disk graph. Returns each reachable device with
/// its hop distance. With a region, only devices inside it are entered; the
/// origin is always included.
std::map<DeviceId, std::uint32_t> oracle_reachability(const TopologySnapshot& snapshot, DeviceId origin,
                                                      std::optional<Region> region = std::nullopt,
                                                      std::optional<std::uint32_t> hop_limit = std::nullopt);

/// Expected result of a synchronous local query on a frozen topology: the
/// origin's own matches at start plus matches of every device h hops away
/// (h <= hop_limit) whose reply can come back in time, 2*h*latency <= timeout,
/// filtered for expiry at the moment the probe reaches it.
std::set<ItemId> oracle_sync_local(const TopologySnapshot& snapshot, const std::vector<std::vector<InfoItem>>& stores,
                                   DeviceId origin, const Predicate& predicate, std::uint32_t hop_limit,
                                   SimTime timeout, SimTime hop_latency, SimTime start);

/// Assignment map as it physically exists: assigned items in the stores of
/// live members of the market.
std::map<ItemId, std::set<DeviceId>> census_ground_truth(const Simulation& sim, MarketId market);

struct PlacementRequest {
    std::uint32_t size = 1;
    std::uint32_t degree = 1;
};

struct PlacementResult {
    std::uint32_t placed = 0;
    std::uint32_t unplaced = 0;
    /// Highest used/capacity over all devices.
    double max_utilization = 0.0;
};

/// Places requests in order with the greedy host selection the IMM uses.
PlacementResult place_greedy(std::map<DeviceId, std::uint32_t> capacity,
                             const std::vector<PlacementRequest>& requests);
/// Baseline: each copy goes to a uniformly random device that still fits it.
PlacementResult place_random(std::map<DeviceId, std::uint32_t> capacity,
                             const std::vector<PlacementRequest>& requests, std::mt19937_64& rng);

} // namespace ads
