// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/broker.hpp"

#include <stdexcept>

namespace ads {

std::string_view to_string(Importance importance)
{
    switch (importance) {
    case Importance::low:
        return "low";
    case Importance::normal:
        return "normal";
    case Importance::high:
        return "high";
    }
    return "normal";
}

std::optional<Importance> parse_importance(std::string_view text)
{
    if (text == "low") {
        return Importance::low;
    }
    if (text == "normal") {
        return Importance::normal;
    }
    if (text == "high") {
        return Importance::high;
    }
    return std::nullopt;
}

void InfoItem::validate() const
{
    if (size == 0) {
        throw std::invalid_argument("item " + std::to_string(id) + ": size must be positive");
    }
    if (replication_degree == 0) {
        throw std::invalid_argument("item " + std::to_string(id) + ": replication degree must be >= 1");
    }
    if (importance == Importance::high && replication_degree < 2) {
        throw std::invalid_argument("item " + std::to_string(id) +
                                    ": high-importance items need replication degree >= 2");
    }
}

bool Predicate::matches(const InfoItem& item) const
{
    if (type_tag && item.type_tag != *type_tag) {
        return false;
    }
    if (!item_ids.empty() && item_ids.count(item.id) == 0) {
        return false;
    }
    return true;
}

StoreResult LocalStore::store(const InfoItem& item, bool replica, bool assigned)
{
    std::uint32_t reclaimed = 0;
    if (auto it = items_.find(item.id); it != items_.end()) {
        reclaimed = it->second.item.size;
    }
    if (free_capacity() + reclaimed < item.size) {
        return StoreResult::rejected;
    }
    used_ = used_ - reclaimed + item.size;
    items_[item.id] = StoredItem{item, replica, assigned};
    return StoreResult::accepted;
}

std::vector<InfoItem> LocalStore::retrieve(const Predicate& predicate, SimTime now) const
{
    std::vector<InfoItem> out;
    for (const auto& [id, stored] : items_) {
        if (!stored.item.expired_at(now) && predicate.matches(stored.item)) {
            out.push_back(stored.item);
        }
    }
    return out;
}

std::optional<StoredItem> LocalStore::remove(ItemId id)
{
    auto it = items_.find(id);
    if (it == items_.end()) {
        return std::nullopt;
    }
    StoredItem out = std::move(it->second);
    used_ -= out.item.size;
    items_.erase(it);
    return out;
}

const StoredItem* LocalStore::find(ItemId id) const
{
    auto it = items_.find(id);
    return it == items_.end() ? nullptr : &it->second;
}

std::vector<InfoItem> LocalStore::sweep(SimTime now)
{
    std::vector<InfoItem> expired;
    for (auto it = items_.begin(); it != items_.end();) {
        if (it->second.item.expired_at(now)) {
            used_ -= it->second.item.size;
            expired.push_back(std::move(it->second.item));
            it = items_.erase(it);
        } else {
            ++it;
        }
    }
    return expired;
}

std::vector<StoredItem> LocalStore::take_assigned()
{
    std::vector<StoredItem> out;
    for (auto it = items_.begin(); it != items_.end();) {
        if (it->second.assigned) {
            used_ -= it->second.item.size;
            out.push_back(std::move(it->second));
            it = items_.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

bool LocalStore::holds_assigned() const
{
    for (const auto& [id, stored] : items_) {
        if (stored.assigned) {
            return true;
        }
    }
    return false;
}

std::vector<ItemId> LocalStore::replica_ids() const
{
    std::vector<ItemId> out;
    for (const auto& [id, stored] : items_) {
        if (stored.replica) {
            out.push_back(id);
        }
    }
    return out;
}

void LocalStore::clear()
{
    items_.clear();
    used_ = 0;
}

} // namespace ads
