// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "sim_internal.hpp"

#include <stdexcept>

namespace ads {

void Simulation::Impl::publish(const WorkloadEvent& ev)
{
    DeviceId d = ev.device;
    Dev& dev = devs[d];
    InfoItem item = ev.item;
    item.created_at = now();
    item.origin = d;
    try {
        item.validate();
    } catch (const std::invalid_argument& e) {
        note(d, "publish_refused", FieldList().add("item", item.id).add("reason", e.what()));
        return;
    }
    std::optional<MarketId> m;
    if (ev.market) {
        if (dev.directory.count(*ev.market)) {
            m = ev.market;
        }
    } else {
        m = select_market(dev.directory, world.position(d), PublishRequest{item, ev.policy});
    }
    if (!m) {
        note(d, "publish_refused", FieldList().add("item", item.id).add("reason", "no-market"));
        return;
    }
    catalog[item.id] = item;
    note(d, "publish",
         FieldList()
             .add("item", item.id)
             .add("market", *m)
             .add("tag", item.type_tag)
             .add("size", item.size)
             .add("degree", item.replication_degree)
             .add("lifetime", item.lifetime ? std::to_string(*item.lifetime) : std::string("inf"))
             .add("policy", to_string(ev.policy)));
    ParcelId parcel = open_parcel(d, {item});
    Itinerary itinerary = world.itinerary_for(d, c.prediction_horizon);
    ship(d, *m, ToMarket{*m, parcel, PublishSubmit{std::move(item), d, std::move(itinerary)}});
}

void Simulation::Impl::put(const WorkloadEvent& ev)
{
    DeviceId d = ev.device;
    InfoItem item = ev.item;
    item.created_at = now();
    item.origin = d;
    try {
        item.validate();
    } catch (const std::invalid_argument& e) {
        note(d, "put_refused", FieldList().add("item", item.id).add("reason", e.what()));
        return;
    }
    note(d, "put", FieldList().add("item", item.id).add("tag", item.type_tag));
    store_item(d, item, false, false);
}

} // namespace ads
