// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "sim_internal.hpp"

#include <stdexcept>

namespace ads {

std::string_view to_string(Role role)
{
    switch (role) {
    case Role::outside: return "outside";
    case Role::passive: return "passive";
    case Role::active: return "active";
    case Role::imm: return "imm";
    }
    return "?";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

TransportParams transport_params(const Constants& c, const SimOptions& o)
{
    TransportParams p;
    p.hop_latency = c.hop_latency;
    p.carry_margin = c.carry_margin;
    p.carry_period = c.carry_period;
    p.prediction_horizon = c.prediction_horizon;
    p.keep_flood_records = o.keep_flood_records;
    return p;
}

} // namespace

Simulation::Impl::Impl(const Scenario& sc, SimOptions opts)
    : scenario(sc),
      options(opts),
      c(sc.constants),
      rng(sc.seed),
      world(sc.bounds, sc.range),
      transport(scheduler, world, trace, transport_params(sc.constants, opts))
{
    validate_scenario(scenario);
    trace.set_enabled(options.trace);
    for (const auto& m : scenario.markets) {
        markets.emplace(m.id, m);
    }
    for (const auto& spec : scenario.devices) {
        Position pos;
        if (spec.position) {
            pos = *spec.position;
        } else {
            pos.x = rng.uniform(streams::layout, 0.0, scenario.bounds.width);
            pos.y = rng.uniform(streams::layout, 0.0, scenario.bounds.height);
        }
        DeviceId id = world.add_device(pos, spec.mobility, spec.declared);
        Dev d;
        d.id = id;
        d.store = LocalStore(spec.capacity);
        for (MarketId m : spec.knows) {
            DirectoryEntry e;
            e.spec = markets.at(m);
            e.source = Provenance::config;
            d.directory.emplace(m, e);
        }
        devs.push_back(std::move(d));
        note(id, "device",
             FieldList()
                 .add("pos", world.position(id))
                 .add("capacity", spec.capacity)
                 .add_list("knows", spec.knows));
    }
    scheduler.schedule(0, EventKind::mobility_step, [this] {
        for (const auto& d : devs) {
            check_membership(d.id);
        }
    });
    schedule_ticks(scenario.horizon);
    for (const auto& ev : scenario.workload) {
        scheduler.schedule(ev.at, EventKind::workload, [this, ev] { run_workload(ev); });
    }
    scheduler.schedule(c.sweep_period, EventKind::timer, [this] { sweep(); });
}

void Simulation::Impl::note(DeviceId device, std::string kind, FieldList fields)
{
    trace.append(now(), device, std::move(kind), std::move(fields));
}

void Simulation::Impl::schedule_ticks(SimTime until)
{
    for (SimTime t = ticks_until + 1; t <= until; ++t) {
        scheduler.schedule(t, EventKind::mobility_step, [this] { tick(); });
    }
    ticks_until = std::max(ticks_until, until);
}

void Simulation::Impl::tick()
{
    auto legs = world.step_mobility(1, rng);
    for (DeviceId d : legs) {
        note(d, "move", FieldList().add("pos", world.position(d)));
    }
    for (const auto& d : devs) {
        check_membership(d.id);
    }
    transport.tick();
}

bool Simulation::Impl::usable(DeviceId d) const
{
    return d < devs.size() && world.alive(d);
}

bool Simulation::Impl::inside(DeviceId d, MarketId m) const
{
    return spec(m).contains(world.position(d));
}

std::optional<MarketId> Simulation::Impl::market_at(DeviceId d) const
{
    for (const auto& [id, entry] : devs[d].directory) {
        if (markets.count(id) && inside(d, id)) {
            return id;
        }
    }
    return std::nullopt;
}

void Simulation::Impl::check_membership(DeviceId d)
{
    Dev& dev = devs[d];
    if (!world.alive(d) || dev.opted_out) {
        return;
    }
    auto here = market_at(d);
    if (dev.member && (!here || *here != *dev.member)) {
        exit_market(d, SignOffReason::graceful_leave);
    }
    if (!dev.member && here) {
        enter_market(d, *here);
    }
}

void Simulation::Impl::update_role(DeviceId d)
{
    Dev& dev = devs[d];
    Role r = Role::outside;
    if (world.alive(d) && dev.member) {
        if (dev.imm) {
            r = Role::imm;
        } else if (dev.store.holds_assigned()) {
            r = Role::active;
        } else {
            r = Role::passive;
        }
    }
    if (r != dev.role) {
        note(d, "role",
             FieldList()
                 .add("market", dev.member ? std::to_string(*dev.member) : std::string("-"))
                 .add("from", to_string(dev.role))
                 .add("to", to_string(r)));
        dev.role = r;
    }
}

void Simulation::Impl::run_workload(const WorkloadEvent& ev)
{
    DeviceId d = ev.device;
    if (!usable(d)) {
        note(d, "skip", FieldList().add("verb", to_string(ev.verb)).add("reason", "dead"));
        return;
    }
    Dev& dev = devs[d];
    switch (ev.verb) {
    case Verb::publish: publish(ev); break;
    case Verb::put: put(ev); break;
    case Verb::query: launch_async(ev); break;
    case Verb::sync: run_sync(ev); break;
    case Verb::crash: crash(d); break;
    case Verb::leave:
        note(d, "leave");
        dev.opted_out = true;
        if (dev.member) {
            exit_market(d, SignOffReason::graceful_leave);
        }
        break;
    case Verb::shutdown:
        note(d, "shutdown");
        dev.opted_out = true;
        dev.shutting_down = true;
        if (dev.member) {
            exit_market(d, SignOffReason::graceful_shutdown);
        }
        powering_off.insert(d);
        // Fallback when the returned items never get confirmed.
        scheduler.schedule_in(4 * c.t_ack, EventKind::timer, [this, d] { power_off(d); });
        maybe_power_off(d);
        break;
    }
}

void Simulation::Impl::crash(DeviceId d)
{
    Dev& dev = devs[d];
    note(d, "crash",
         FieldList()
             .add("market", dev.member ? std::to_string(*dev.member) : std::string("-"))
             .add_list("holdings", [&] {
                 std::vector<ItemId> ids;
                 for (const auto& [id, s] : dev.store.items()) {
                     ids.push_back(id);
                 }
                 return ids;
             }()));
    power_off(d);
}

void Simulation::Impl::power_off(DeviceId d)
{
    if (!world.alive(d)) {
        return;
    }
    Dev& dev = devs[d];
    std::string cause = dev.shutting_down ? "shutdown" : "crash";
    if (dev.shutting_down) {
        note(d, "power_off");
    }
    powering_off.erase(d);
    world.set_alive(d, false);
    transport.crash(d);
    if (dev.imm) {
        note(d, "imm_down",
             FieldList()
                 .add("market", dev.imm->market)
                 .add("epoch", dev.imm->key.epoch)
                 .add("token", dev.imm->token)
                 .add("reason", cause)
                 .add("successor", "-"));
        for (const auto& [item, p] : dev.imm->pending) {
            if (p.parcel != 0 && parcels.count(p.parcel)) {
                close_parcel(p.parcel, cause);
            }
        }
        dev.imm.reset();
    }
    std::vector<ItemId> held;
    for (const auto& [id, s] : dev.store.items()) {
        held.push_back(id);
    }
    dev.store.clear();
    for (ItemId id : held) {
        if (catalog.count(id)) {
            copy_removed(id, cause);
        }
    }
    drop_parcels_at(d);
    for (auto it = relays.begin(); it != relays.end();) {
        it = it->second.device == d ? relays.erase(it) : std::next(it);
    }
    for (auto it = probes.begin(); it != probes.end();) {
        it = it->second.device == d ? probes.erase(it) : std::next(it);
    }
    for (auto it = syncs.begin(); it != syncs.end();) {
        it = it->second.device == d ? syncs.erase(it) : std::next(it);
    }
    for (auto it = locates.begin(); it != locates.end();) {
        if (it->second.holder == d) {
            auto dl = it->second.delivery;
            it = locates.erase(it);
            delivery_failed(d, dl, cause);
        } else {
            ++it;
        }
    }
    dev.member.reset();
    dev.joining.reset();
    update_role(d);
}

void Simulation::Impl::maybe_power_off(DeviceId d)
{
    if (powering_off.count(d) == 0) {
        return;
    }
    for (const auto& [id, r] : relays) {
        if (r.device == d) {
            return;
        }
    }
    if (!transport.geo_held_by(d).empty()) {
        return;
    }
    power_off(d);
}

void Simulation::Impl::sweep()
{
    for (auto& dev : devs) {
        if (!world.alive(dev.id)) {
            continue;
        }
        for (const auto& item : dev.store.sweep(now())) {
            note(dev.id, "expire", FieldList().add("item", item.id));
            if (catalog.count(item.id)) {
                copy_removed(item.id, "expired");
            }
        }
        update_role(dev.id);
        if (dev.imm) {
            forget_expired(dev.id);
        }
    }
    scheduler.schedule_in(c.sweep_period, EventKind::timer, [this] { sweep(); });
}

bool Simulation::Impl::quiescent() const
{
    if (transport.geo_in_transit() != 0 || transport.in_flight() != 0 || !relays.empty() || !probes.empty() ||
        !syncs.empty() || !locates.empty() || deliveries_waiting != 0 || !powering_off.empty()) {
        return false;
    }
    for (const auto& dev : devs) {
        if (!dev.imm) {
            continue;
        }
        const ImmRt& imm = *dev.imm;
        if (!imm.established || !imm.queued.empty() || !imm.queries.empty() || !imm.fetch_current.empty()) {
            return false;
        }
        for (const auto& [id, p] : imm.pending) {
            if (!p.awaiting.empty()) {
                return false;
            }
        }
    }
    return true;
}

void Simulation::Impl::send(DeviceId from, MarketId m, DeviceId to, Payload payload)
{
    Message msg = transport.make(from, std::move(payload), to);
    if (from == to) {
        scheduler.schedule_in(0, EventKind::message_delivery, [this, to, msg] {
            if (usable(to)) {
                dispatch(to, msg);
            }
        });
        return;
    }
    if (inside(from, m)) {
        transport.flood(from, std::move(msg), spec(m).region(), c.ttl, [this, to](DeviceId at, const Message& mm) {
            if (at == to) {
                dispatch(at, mm);
            }
        });
        return;
    }
    if (world.linked(from, to)) {
        transport.unicast(from, to, std::move(msg), [this](DeviceId at, const Message& mm) { dispatch(at, mm); });
        return;
    }
    note(from, "unroutable", FieldList().add("msg", msg.id).add("kind", msg.kind()).add("to", to));
}

void Simulation::Impl::broadcast(DeviceId from, MarketId m, Payload payload)
{
    Message msg = transport.make(from, std::move(payload));
    if (!inside(from, m)) {
        note(from, "unroutable", FieldList().add("msg", msg.id).add("kind", msg.kind()).add("to", "*"));
        return;
    }
    transport.flood(from, std::move(msg), spec(m).region(), c.ttl,
                    [this](DeviceId at, const Message& mm) { dispatch(at, mm); });
}

void Simulation::Impl::reply_along(DeviceId from, std::vector<DeviceId> route, Payload payload)
{
    if (route.size() < 2 || route.back() != from) {
        return;
    }
    Message msg = transport.make(from, std::move(payload), route.front());
    route.pop_back();
    std::reverse(route.begin(), route.end());
    reply_step(from, std::move(msg), std::make_shared<const std::vector<DeviceId>>(std::move(route)), 0);
}

void Simulation::Impl::reply_step(DeviceId holder, Message msg, std::shared_ptr<const std::vector<DeviceId>> path,
                                  std::size_t index)
{
    DeviceId next = (*path)[index];
    transport.unicast(holder, next, std::move(msg), [this, path, index](DeviceId at, const Message& m) {
        if (index + 1 == path->size()) {
            dispatch(at, m);
        } else {
            reply_step(at, m, path, index + 1);
        }
    });
}

void Simulation::Impl::dispatch(DeviceId at, const Message& msg)
{
    if (!usable(at) || !msg.payload) {
        return;
    }
    std::visit(overloaded{
                   [&](const ImmProbe& p) { on_probe(at, msg, p); },
                   [&](const ImmProbeReply& p) { on_probe_reply(at, p); },
                   [&](const ImmAnnounce& p) { on_announce(at, p); },
                   [&](const CapacityReport& p) { on_capacity_report(at, p); },
                   [&](const CensusRequest& p) { on_census_request(at, p); },
                   [&](const CensusReply& p) { on_census_reply(at, p); },
                   [&](const ToMarket&) {},
                   [&](const ImmRequest& p) { on_imm_request(at, p); },
                   [&](const ImmRequestAck& p) { on_request_ack(at, p); },
                   [&](const StoreCmd& p) { on_store_cmd(at, p); },
                   [&](const StoreAck& p) { on_store_ack(at, p); },
                   [&](const ReplicateCmd& p) { on_replicate_cmd(at, p); },
                   [&](const ReplicateFail& p) { on_replicate_fail(at, p); },
                   [&](const UnstoreCmd& p) { on_unstore(at, p); },
                   [&](const FetchCmd& p) { on_fetch(at, p); },
                   [&](const FetchReply& p) { on_fetch_reply(at, p); },
                   [&](const HeartbeatPing& p) { on_heartbeat(at, p); },
                   [&](const HeartbeatAck& p) { on_heartbeat_ack(at, p); },
                   [&](const CenterSeekRequest& p) { on_center_seek(at, p); },
                   [&](const CenterSeekReply& p) { on_center_seek_reply(at, p); },
                   [&](const ImmHandoff& p) { on_handoff(at, p); },
                   [&](const ImmStateTransfer& p) { on_transfer(at, p.snapshot, p.from); },
                   [&](const DeviceDelivery&) {},
                   [&](const LocateProbe& p) { on_locate_probe(at, msg, p); },
                   [&](const LocateAck& p) { on_locate_ack(at, p); },
                   [&](const SyncProbe& p) { on_sync_probe(at, msg, p); },
                   [&](const SyncReply& p) { on_sync_reply(at, p); },
               },
               *msg.payload);
}

void Simulation::Impl::copy_added(ItemId id)
{
    ++copies[id];
}

void Simulation::Impl::copy_removed(ItemId id, std::string_view cause)
{
    auto it = copies.find(id);
    if (it == copies.end()) {
        return;
    }
    if (--it->second > 0) {
        return;
    }
    copies.erase(it);
    const InfoItem& item = catalog.at(id);
    std::string why = item.expired_at(now()) ? std::string("expired") : std::string(cause);
    note(kNoDevice, "item_gone", FieldList().add("item", id).add("cause", why));
}

bool Simulation::Impl::store_item(DeviceId d, const InfoItem& item, bool replica, bool assigned)
{
    Dev& dev = devs[d];
    bool had = dev.store.contains(item.id);
    if (dev.store.store(item, replica, assigned) != StoreResult::accepted) {
        note(d, "store_nack", FieldList().add("item", item.id).add("free", dev.store.free_capacity()));
        return false;
    }
    if (!had && catalog.count(item.id)) {
        copy_added(item.id);
    }
    note(d, "store",
         FieldList()
             .add("item", item.id)
             .add("tag", item.type_tag)
             .add("size", item.size)
             .add("replica", replica ? 1 : 0)
             .add("assigned", assigned ? 1 : 0)
             .add("market", dev.member ? std::to_string(*dev.member) : std::string("-"))
             .add("used", dev.store.used())
             .add("capacity", dev.store.capacity()));
    update_role(d);
    return true;
}

void Simulation::Impl::unstore_item(DeviceId d, ItemId id, std::string_view cause)
{
    Dev& dev = devs[d];
    if (!dev.store.remove(id)) {
        return;
    }
    note(d, "unstore", FieldList().add("item", id).add("reason", cause));
    if (catalog.count(id)) {
        copy_removed(id, cause);
    }
    update_role(d);
}

ParcelId Simulation::Impl::open_parcel(DeviceId holder, const std::vector<InfoItem>& items)
{
    Parcel p;
    p.id = next_parcel++;
    p.holder = holder;
    for (const auto& item : items) {
        p.items.push_back(item.id);
        if (catalog.count(item.id)) {
            copy_added(item.id);
        }
    }
    note(holder, "parcel_open", FieldList().add("parcel", p.id).add_list("items", p.items));
    ParcelId id = p.id;
    parcels.emplace(id, std::move(p));
    return id;
}

void Simulation::Impl::move_parcel(ParcelId id, DeviceId to)
{
    auto it = parcels.find(id);
    if (it == parcels.end() || it->second.holder == to) {
        return;
    }
    DeviceId from = it->second.holder;
    it->second.holder = to;
    note(to, "parcel_move",
         FieldList()
             .add("parcel", id)
             .add("from", from == kNoDevice ? std::string("-") : std::to_string(from))
             .add("to", to == kNoDevice ? std::string("-") : std::to_string(to)));
}

void Simulation::Impl::close_parcel(ParcelId id, std::string_view cause)
{
    auto it = parcels.find(id);
    if (it == parcels.end()) {
        return;
    }
    Parcel p = std::move(it->second);
    parcels.erase(it);
    note(p.holder, "parcel_close", FieldList().add("parcel", id).add("reason", cause));
    for (ItemId item : p.items) {
        if (catalog.count(item)) {
            copy_removed(item, cause);
        }
    }
}

void Simulation::Impl::drop_parcels_at(DeviceId d)
{
    std::vector<ParcelId> held;
    for (const auto& [id, p] : parcels) {
        if (p.holder == d) {
            held.push_back(id);
        }
    }
    for (ParcelId id : held) {
        close_parcel(id, devs[d].shutting_down ? "shutdown" : "crash");
    }
}

std::map<ItemId, ParcelId> Simulation::Impl::split_parcel(ParcelId id)
{
    std::map<ItemId, ParcelId> out;
    auto it = parcels.find(id);
    if (it == parcels.end()) {
        return out;
    }
    if (it->second.items.size() == 1) {
        out[it->second.items.front()] = id;
        return out;
    }
    DeviceId holder = it->second.holder;
    std::vector<ItemId> items = it->second.items;
    for (ItemId item : items) {
        Parcel p;
        p.id = next_parcel++;
        p.holder = holder;
        p.items = {item};
        if (catalog.count(item)) {
            copy_added(item);
        }
        note(holder, "parcel_open", FieldList().add("parcel", p.id).add_list("items", p.items).add("split", id));
        out[item] = p.id;
        parcels.emplace(p.id, std::move(p));
    }
    close_parcel(id, "split");
    return out;
}

Simulation::Simulation(const Scenario& scenario, SimOptions options)
    : impl_(std::make_unique<Impl>(scenario, options))
{
}

Simulation::~Simulation() = default;

void Simulation::run()
{
    run_until(impl_->scenario.horizon);
}

void Simulation::run_until(SimTime t)
{
    if (t < impl_->now()) {
        throw std::logic_error("run_until into the past");
    }
    impl_->schedule_ticks(t);
    impl_->scheduler.run_until(t);
}

bool Simulation::quiescent() const
{
    return impl_->quiescent();
}

bool Simulation::run_until_quiescent(SimTime limit)
{
    while (!impl_->quiescent() && impl_->now() < limit) {
        run_until(impl_->now() + 1);
    }
    return impl_->quiescent();
}

void Simulation::inject(const WorkloadEvent& event)
{
    Impl* impl = impl_.get();
    impl->scheduler.schedule(event.at, EventKind::workload, [impl, event] { impl->run_workload(event); });
}

const Scenario& Simulation::scenario() const { return impl_->scenario; }
SimTime Simulation::now() const { return impl_->now(); }
const Trace& Simulation::trace() const { return impl_->trace; }
World& Simulation::world() { return impl_->world; }
const World& Simulation::world() const { return impl_->world; }
Scheduler& Simulation::scheduler() { return impl_->scheduler; }
Transport& Simulation::transport() { return impl_->transport; }
std::size_t Simulation::device_count() const { return impl_->devs.size(); }
bool Simulation::alive(DeviceId device) const { return impl_->world.alive(device); }
Role Simulation::role(DeviceId device) const { return impl_->devs.at(device).role; }

std::optional<MarketId> Simulation::membership(DeviceId device) const
{
    return impl_->devs.at(device).member;
}

const LocalStore& Simulation::store(DeviceId device) const { return impl_->devs.at(device).store; }
const Directory& Simulation::directory(DeviceId device) const { return impl_->devs.at(device).directory; }

std::vector<DeviceId> Simulation::imms(MarketId market) const
{
    std::vector<DeviceId> out;
    for (const auto& d : impl_->devs) {
        if (d.imm && d.imm->market == market && impl_->world.alive(d.id)) {
            out.push_back(d.id);
        }
    }
    return out;
}

const ImmState* Simulation::imm_state(DeviceId device) const
{
    const auto& d = impl_->devs.at(device);
    return d.imm ? &d.imm->state : nullptr;
}

const std::map<QueryId, SyncOutcome>& Simulation::sync_outcomes() const { return impl_->sync_outcomes; }

void Simulation::on_rebuild(std::function<void(DeviceId, const ImmState&)> observer)
{
    impl_->rebuild_observer = std::move(observer);
}

} // namespace ads
