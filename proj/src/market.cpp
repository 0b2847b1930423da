// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/market.hpp"

#include <algorithm>
#include <stdexcept>

namespace ads {

void MarketSpec::validate() const
{
    if (!(core_radius > 0.0 && core_radius < radius)) {
        throw std::invalid_argument("market " + std::to_string(id) + ": need 0 < core_radius < radius");
    }
}

ElectionKey elect_leader(std::span<const ElectionKey> candidates)
{
    if (candidates.empty()) {
        throw std::invalid_argument("elect_leader needs at least one candidate");
    }
    ElectionKey best = candidates.front();
    for (const auto& c : candidates.subspan(1)) {
        if (c.beats(best)) {
            best = c;
        }
    }
    return best;
}

std::vector<DeviceId> select_hosts(const std::map<DeviceId, std::uint32_t>& capacity,
                                   std::uint32_t size, std::uint32_t count,
                                   const std::set<DeviceId>& exclude)
{
    std::vector<std::pair<std::uint32_t, DeviceId>> fit;
    for (const auto& [device, free] : capacity) {
        if (free >= size && exclude.count(device) == 0) {
            fit.emplace_back(free, device);
        }
    }
    std::sort(fit.begin(), fit.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return a.second < b.second;
    });
    std::vector<DeviceId> out;
    for (std::size_t i = 0; i < fit.size() && out.size() < count; ++i) {
        out.push_back(fit[i].second);
    }
    return out;
}

void ImmState::add_hosts(const InfoItem& item, const std::set<DeviceId>& hosts)
{
    InfoItem meta = item;
    meta.payload.clear();
    bool fresh = !knows(item.id);
    catalog[item.id] = std::move(meta);
    auto& entry = assignment_map[item.id];
    entry.insert(hosts.begin(), hosts.end());
    if (fresh) {
        ++type_index[item.type_tag];
    }
    if (item.replication_degree > 1) {
        auto& rep = replica_registry[item.id];
        rep.degree = item.replication_degree;
        rep.hosts.insert(hosts.begin(), hosts.end());
    }
}

void ImmState::remove_host(ItemId id, DeviceId host)
{
    if (auto it = assignment_map.find(id); it != assignment_map.end()) {
        it->second.erase(host);
    }
    if (auto it = replica_registry.find(id); it != replica_registry.end()) {
        it->second.hosts.erase(host);
    }
}

std::vector<ItemId> ImmState::remove_device(DeviceId device)
{
    capacity_table.erase(device);
    std::vector<ItemId> affected;
    for (auto& [id, hosts] : assignment_map) {
        if (hosts.erase(device) != 0) {
            affected.push_back(id);
        }
    }
    for (auto& [id, rep] : replica_registry) {
        rep.hosts.erase(device);
    }
    return affected;
}

void ImmState::forget_item(ItemId id)
{
    auto cat = catalog.find(id);
    if (cat != catalog.end()) {
        auto t = type_index.find(cat->second.type_tag);
        if (t != type_index.end() && --t->second == 0) {
            type_index.erase(t);
        }
        catalog.erase(cat);
    }
    assignment_map.erase(id);
    replica_registry.erase(id);
}

std::uint32_t ImmState::degree_of(ItemId id) const
{
    auto it = catalog.find(id);
    return it == catalog.end() ? 1 : it->second.replication_degree;
}

std::uint32_t ImmState::deficit(ItemId id) const
{
    auto it = assignment_map.find(id);
    if (it == assignment_map.end()) {
        return 0;
    }
    std::uint32_t degree = degree_of(id);
    auto have = static_cast<std::uint32_t>(it->second.size());
    return have >= degree ? 0 : degree - have;
}

std::vector<ItemId> ImmState::items_in_deficit() const
{
    std::vector<ItemId> out;
    for (const auto& [id, rep] : replica_registry) {
        if (deficit(id) > 0) {
            out.push_back(id);
        }
    }
    return out;
}

std::map<std::string, std::uint32_t> ImmState::recount_types() const
{
    std::map<std::string, std::uint32_t> out;
    for (const auto& [id, hosts] : assignment_map) {
        auto it = catalog.find(id);
        if (it != catalog.end()) {
            ++out[it->second.type_tag];
        }
    }
    return out;
}

bool ImmState::consistent() const
{
    if (type_index != recount_types()) {
        return false;
    }
    for (const auto& [id, rep] : replica_registry) {
        auto it = assignment_map.find(id);
        if (it == assignment_map.end() || rep.hosts.size() > rep.degree) {
            return false;
        }
        for (DeviceId h : rep.hosts) {
            if (it->second.count(h) == 0) {
                return false;
            }
        }
    }
    for (const auto& [id, hosts] : assignment_map) {
        if (catalog.count(id) == 0) {
            return false;
        }
    }
    return true;
}

void ImmState::merge(const ImmState& other)
{
    for (const auto& [device, free] : other.capacity_table) {
        capacity_table.emplace(device, free);
    }
    for (const auto& [id, hosts] : other.assignment_map) {
        auto cat = other.catalog.find(id);
        if (cat != other.catalog.end()) {
            add_hosts(cat->second, hosts);
        }
    }
    for (const auto& [id, entry] : other.known_markets) {
        known_markets.emplace(id, entry);
    }
}

ImmState ImmState::rebuild(MarketId market, std::uint32_t epoch, std::span<const CensusReport> reports)
{
    ImmState s;
    s.market = market;
    s.epoch = epoch;
    for (const auto& report : reports) {
        s.capacity_table[report.device] = report.free;
        for (const auto& held : report.holdings) {
            s.add_hosts(held.item, {report.device});
        }
    }
    return s;
}

} // namespace ads
