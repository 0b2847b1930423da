// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/broker.hpp"
#include "ads/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ads {

struct MarketSpec {
    MarketId id = 0;
    Position center;
    double radius = 0.0;
    /// Zone around the center the IMM tries to stay in.
    double core_radius = 0.0;

    Region region() const { return Region{center, radius}; }
    Region core() const { return Region{center, core_radius}; }
    bool contains(const Position& p) const { return region().contains(p); }
    /// Throws std::invalid_argument unless 0 < core_radius < radius.
    void validate() const;

    friend bool operator==(const MarketSpec&, const MarketSpec&) = default;
};

enum class Provenance : std::uint8_t { config, response };

/// What a device knows about one market: where it is and, when learned from
/// a response, a timestamped summary of the item types it hosts.
struct DirectoryEntry {
    MarketSpec spec;
    std::map<std::string, std::uint32_t> type_summary;
    std::optional<SimTime> summary_at;
    Provenance source = Provenance::config;
    /// For response-learned entries: the market whose response carried it.
    MarketId learned_via = 0;
    SimTime learned_at = 0;

    friend bool operator==(const DirectoryEntry&, const DirectoryEntry&) = default;
};

using Directory = std::map<MarketId, DirectoryEntry>;

/// Leadership key. Higher epoch wins; equal epochs go to the lower device id.
struct ElectionKey {
    std::uint32_t epoch = 0;
    DeviceId device = kNoDevice;

    bool beats(const ElectionKey& other) const
    {
        if (epoch != other.epoch) {
            return epoch > other.epoch;
        }
        return device < other.device;
    }

    friend bool operator==(const ElectionKey&, const ElectionKey&) = default;
};

/// Survivor among competing IMM instances. Requires a non-empty span.
ElectionKey elect_leader(std::span<const ElectionKey> candidates);

/// Greedy load balancing: up to `count` devices with the most free capacity
/// (ties to the lower id) that can fit `size`, skipping `exclude`.
std::vector<DeviceId> select_hosts(const std::map<DeviceId, std::uint32_t>& capacity,
                                   std::uint32_t size, std::uint32_t count,
                                   const std::set<DeviceId>& exclude = {});

struct ReplicaEntry {
    std::uint32_t degree = 1;
    std::set<DeviceId> hosts;

    friend bool operator==(const ReplicaEntry&, const ReplicaEntry&) = default;
};

/// What a member reports to a (new) IMM about itself.
struct CensusReport {
    DeviceId device = kNoDevice;
    std::uint32_t free = 0;
    /// Assigned items held, payload included, with their replica flags.
    std::vector<StoredItem> holdings;
    std::uint32_t known_epoch = 0;
};

/// Bookkeeping kept by the information market manager.
struct ImmState {
    MarketId market = 0;
    std::uint32_t epoch = 0;
    std::map<DeviceId, std::uint32_t> capacity_table;
    std::map<ItemId, std::set<DeviceId>> assignment_map;
    std::map<std::string, std::uint32_t> type_index;
    std::map<ItemId, ReplicaEntry> replica_registry;
    /// Item metadata for everything in assignment_map.
    std::map<ItemId, InfoItem> catalog;
    Directory known_markets;

    bool knows(ItemId id) const { return assignment_map.count(id) != 0; }
    /// Registers (or extends) an item entry. Replicated items (degree > 1)
    /// enter the replica registry.
    void add_hosts(const InfoItem& item, const std::set<DeviceId>& hosts);
    void remove_host(ItemId id, DeviceId host);
    /// Drops the device from every table; returns items it hosted.
    std::vector<ItemId> remove_device(DeviceId device);
    void forget_item(ItemId id);
    std::uint32_t degree_of(ItemId id) const;
    std::uint32_t deficit(ItemId id) const;
    std::vector<ItemId> items_in_deficit() const;

    std::map<std::string, std::uint32_t> recount_types() const;
    /// type_index matches a recount, registry hosts are a subset of the
    /// assignment hosts and never exceed the degree.
    bool consistent() const;

    /// Folds in the partial state of a deactivated IMM.
    void merge(const ImmState& other);

    static ImmState rebuild(MarketId market, std::uint32_t epoch, std::span<const CensusReport> reports);
};

} // namespace ads
