// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ads {

enum class Importance : std::uint8_t { low, normal, high };

std::string_view to_string(Importance importance);
std::optional<Importance> parse_importance(std::string_view text);

struct InfoItem {
    ItemId id = 0;
    std::string type_tag;
    std::uint32_t size = 1;
    SimTime created_at = 0;
    /// nullopt means the item never expires.
    std::optional<SimTime> lifetime;
    std::uint32_t replication_degree = 1;
    Importance importance = Importance::normal;
    DeviceId origin = kNoDevice;
    std::string payload;

    /// Throws std::invalid_argument on size 0, degree 0, or a high-importance
    /// item that asks for fewer than two copies.
    void validate() const;
    bool expired_at(SimTime now) const
    {
        return lifetime && created_at + *lifetime < now;
    }

    friend bool operator==(const InfoItem&, const InfoItem&) = default;
};

/// Tag and/or id filter. An empty predicate matches everything.
struct Predicate {
    std::optional<std::string> type_tag;
    std::set<ItemId> item_ids;

    bool matches(const InfoItem& item) const;

    friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct StoredItem {
    InfoItem item;
    /// Held as one of several IMM-managed copies.
    bool replica = false;
    /// Placed here by an IMM (as opposed to local application data).
    bool assigned = false;
};

enum class StoreResult : std::uint8_t { accepted, rejected };

/// Capacity-bounded per-device information broker.
class LocalStore {
public:
    explicit LocalStore(std::uint32_t capacity = 0) : capacity_(capacity) {}

    std::uint32_t capacity() const { return capacity_; }
    std::uint32_t used() const { return used_; }
    std::uint32_t free_capacity() const { return capacity_ - used_; }

    /// Storing an id that is already held replaces the old copy.
    StoreResult store(const InfoItem& item, bool replica, bool assigned = true);
    std::vector<InfoItem> retrieve(const Predicate& predicate, SimTime now) const;
    std::optional<StoredItem> remove(ItemId id);
    bool contains(ItemId id) const { return items_.count(id) != 0; }
    const StoredItem* find(ItemId id) const;

    /// Drops expired items and returns them.
    std::vector<InfoItem> sweep(SimTime now);
    /// Removes and returns every IMM-assigned item.
    std::vector<StoredItem> take_assigned();

    bool holds_assigned() const;
    std::vector<ItemId> replica_ids() const;
    const std::map<ItemId, StoredItem>& items() const { return items_; }
    void clear();

private:
    std::uint32_t capacity_;
    std::uint32_t used_ = 0;
    std::map<ItemId, StoredItem> items_;
};

} // namespace ads
