// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "sim_internal.hpp"

#include <algorithm>

namespace ads {

// ---------------------------------------------------------------------------
// IMM instance helpers

ImmRt* Simulation::Impl::imm_of(DeviceId d, MarketId m)
{
    if (!usable(d)) {
        return nullptr;
    }
    auto& imm = devs[d].imm;
    return imm && imm->market == m ? imm.get() : nullptr;
}

ImmRt* Simulation::Impl::guard(DeviceId d, std::uint64_t token)
{
    if (!usable(d)) {
        return nullptr;
    }
    auto& imm = devs[d].imm;
    return imm && imm->token == token ? imm.get() : nullptr;
}

FieldList Simulation::Impl::imm_fields(const ImmRt& imm) const
{
    return FieldList().add("market", imm.market).add("epoch", imm.key.epoch).add("token", imm.token);
}

void Simulation::Impl::imm_note(DeviceId d, std::string kind, FieldList extra)
{
    FieldList f = imm_fields(*devs[d].imm);
    for (auto& [k, v] : extra.take()) {
        f.add(std::move(k), std::move(v));
    }
    note(d, std::move(kind), std::move(f));
}

bool Simulation::Impl::forward_to_successor(DeviceId at, MarketId m, Payload payload)
{
    const Dev& dev = devs[at];
    auto it = dev.successor.find(m);
    if (it == dev.successor.end() || it->second == at || it->second == kNoDevice) {
        return false;
    }
    note(at, "forward_successor", FieldList().add("market", m).add("to", it->second).add("kind", kind_name(payload)));
    send(at, m, it->second, std::move(payload));
    return true;
}

CensusReport Simulation::Impl::report_of(DeviceId d) const
{
    const Dev& dev = devs[d];
    CensusReport r;
    r.device = d;
    r.free = dev.store.free_capacity();
    for (const auto& [id, s] : dev.store.items()) {
        if (s.assigned && !s.item.expired_at(now())) {
            r.holdings.push_back(s);
        }
    }
    if (dev.member) {
        auto it = dev.known_epoch.find(*dev.member);
        r.known_epoch = it == dev.known_epoch.end() ? 0 : it->second;
    }
    return r;
}

void Simulation::Impl::learn_imm(DeviceId d, MarketId m, const ElectionKey& key)
{
    Dev& dev = devs[d];
    auto it = dev.known_imm.find(m);
    if (it == dev.known_imm.end() || !it->second.beats(key) || it->second.device == key.device) {
        dev.known_imm[m] = key;
    }
    auto& e = dev.known_epoch[m];
    e = std::max(e, key.epoch);
    // An IMM heard while probing counts as a probe reply.
    if (key.device != d) {
        for (auto& [id, run] : probes) {
            if (run.device == d && run.market == m) {
                run.replies.push_back(key);
            }
        }
    }
}

void Simulation::Impl::bump_epoch(DeviceId d, std::uint32_t seen)
{
    ImmRt& imm = *devs[d].imm;
    if (imm.key.epoch > seen) {
        return;
    }
    imm.key.epoch = seen + 1;
    imm.state.epoch = imm.key.epoch;
    devs[d].known_epoch[imm.market] = imm.key.epoch;
    devs[d].known_imm[imm.market] = imm.key;
    imm_note(d, "imm_epoch");
    if (imm.established) {
        announce(d);
    }
}

// ---------------------------------------------------------------------------
// Joining

void Simulation::Impl::enter_market(DeviceId d, MarketId m)
{
    Dev& dev = devs[d];
    dev.member = m;
    note(d, "enter", FieldList().add("market", m).add("pos", world.position(d)));
    update_role(d);
    start_probe(d, m, ProbePurpose::join, 0);
}

void Simulation::Impl::start_probe(DeviceId d, MarketId m, ProbePurpose purpose, std::uint64_t relay)
{
    Dev& dev = devs[d];
    if (purpose == ProbePurpose::join && dev.joining) {
        return;
    }
    ProbeRun run;
    run.id = next_probe++;
    run.device = d;
    run.market = m;
    run.purpose = purpose;
    run.relay = relay;
    std::uint64_t id = run.id;
    probes.emplace(id, std::move(run));
    if (purpose == ProbePurpose::join) {
        dev.joining = id;
    }
    note(d, "probe",
         FieldList().add("market", m).add("probe", id).add("purpose", purpose == ProbePurpose::join ? "join" : "relay"));
    broadcast(d, m, ImmProbe{m});
    scheduler.schedule_in(c.t_probe, EventKind::timer, [this, id] { finish_probe(id); });
}

void Simulation::Impl::on_probe(DeviceId at, const Message& msg, const ImmProbe& p)
{
    ImmRt* imm = imm_of(at, p.market);
    if (!imm) {
        return;
    }
    imm_note(at, "imm_probe_reply", FieldList().add("to", msg.src));
    reply_along(at, msg.route, ImmProbeReply{p.market, imm->key});
}

void Simulation::Impl::on_probe_reply(DeviceId at, const ImmProbeReply& p)
{
    for (auto& [id, run] : probes) {
        if (run.device == at && run.market == p.market) {
            run.replies.push_back(p.imm);
        }
    }
}

void Simulation::Impl::finish_probe(std::uint64_t id)
{
    auto it = probes.find(id);
    if (it == probes.end()) {
        return;
    }
    ProbeRun run = std::move(it->second);
    probes.erase(it);
    DeviceId d = run.device;
    if (!usable(d)) {
        return;
    }
    Dev& dev = devs[d];
    MarketId m = run.market;
    std::optional<ElectionKey> best;
    if (!run.replies.empty()) {
        best = elect_leader(run.replies);
        dev.known_imm[m] = *best;
        auto& e = dev.known_epoch[m];
        e = std::max(e, best->epoch);
    }
    if (run.purpose == ProbePurpose::join) {
        if (dev.joining == id) {
            dev.joining.reset();
        }
        if (dev.member != m || dev.imm) {
            return;
        }
        if (best) {
            note(d, "join", FieldList().add("market", m).add("imm", best->device).add("epoch", best->epoch));
            send(d, m, best->device, CapacityReport{m, d, dev.store.free_capacity()});
        } else {
            become_imm(d, m);
        }
        return;
    }
    if (relays.count(run.relay) == 0) {
        return;
    }
    if (!best && dev.member == m && !dev.imm) {
        become_imm(d, m);
    }
    relay_send(run.relay);
}

// ---------------------------------------------------------------------------
// IMM creation, census and election

void Simulation::Impl::become_imm(DeviceId d, MarketId m)
{
    Dev& dev = devs[d];
    auto imm = std::make_unique<ImmRt>();
    imm->token = next_token++;
    imm->market = m;
    imm->key = ElectionKey{dev.known_epoch[m] + 1, d};
    imm->state.market = m;
    imm->state.epoch = imm->key.epoch;
    imm->state.known_markets = dev.directory;
    imm->census_round = next_round++;
    imm->census.push_back(report_of(d));
    dev.imm = std::move(imm);
    dev.successor.erase(m);
    dev.known_imm[m] = dev.imm->key;
    imm_note(d, "imm_tentative");
    update_role(d);
    ImmRt& rt = *dev.imm;
    broadcast(d, m, CensusRequest{m, rt.key, rt.census_round});
    std::uint64_t token = rt.token;
    scheduler.schedule_in(c.reply_window(), EventKind::timer, [this, d, token] {
        if (guard(d, token)) {
            finalize_census(d);
        }
    });
}

void Simulation::Impl::on_census_request(DeviceId at, const CensusRequest& c)
{
    if (imm_of(at, c.market)) {
        contact(at, c.imm);
        return;
    }
    Dev& dev = devs[at];
    if (dev.member != c.market) {
        return;
    }
    CensusReport report = report_of(at);
    learn_imm(at, c.market, c.imm);
    note(at, "census_reply", FieldList().add("market", c.market).add("to", c.imm.device));
    send(at, c.market, c.imm.device, CensusReply{c.market, c.round, std::move(report)});
}

void Simulation::Impl::on_census_reply(DeviceId at, const CensusReply& c)
{
    ImmRt* imm = imm_of(at, c.market);
    if (!imm || imm->established || imm->census_round != c.round) {
        return;
    }
    imm->census.push_back(c.report);
}

void Simulation::Impl::finalize_census(DeviceId d)
{
    Dev& dev = devs[d];
    ImmRt& imm = *dev.imm;
    std::uint32_t floor = 0;
    for (const auto& r : imm.census) {
        if (r.device != d) {
            floor = std::max(floor, r.known_epoch);
        }
    }
    std::uint32_t epoch = std::max(imm.key.epoch, floor + 1);
    ImmState rebuilt = ImmState::rebuild(imm.market, epoch, imm.census);
    for (const auto& [dv, free] : imm.state.capacity_table) {
        rebuilt.capacity_table.emplace(dv, free);
    }
    rebuilt.known_markets = imm.state.known_markets;
    imm.state = std::move(rebuilt);
    imm.key.epoch = epoch;
    imm.established = true;
    imm.census.clear();
    dev.known_epoch[imm.market] = epoch;
    dev.known_imm[imm.market] = imm.key;
    std::vector<ItemId> items;
    for (const auto& [id, hosts] : imm.state.assignment_map) {
        items.push_back(id);
    }
    imm_note(d, "imm_up",
             FieldList()
                 .add("via", "census")
                 .add("floor", floor)
                 .add("members", imm.state.capacity_table.size())
                 .add_list("items", items));
    if (rebuild_observer) {
        rebuild_observer(d, imm.state);
    }
    announce(d);
    auto absorbed = std::move(imm.absorbed);
    imm.absorbed.clear();
    for (const auto& snap : absorbed) {
        absorb(d, *snap);
    }
    if (!dev.imm) {
        return;
    }
    for (ItemId id : items) {
        ensure_degree(d, id, false);
    }
    auto queued = std::move(dev.imm->queued);
    dev.imm->queued.clear();
    for (const auto& r : queued) {
        if (!dev.imm) {
            break;
        }
        handle_request(d, r);
    }
    if (dev.imm) {
        start_periodic(d);
    }
}

void Simulation::Impl::announce(DeviceId d)
{
    ImmRt& imm = *devs[d].imm;
    imm.last_reannounce = now();
    imm_note(d, "imm_announce");
    broadcast(d, imm.market, ImmAnnounce{imm.market, imm.key});
}

void Simulation::Impl::on_announce(DeviceId at, const ImmAnnounce& a)
{
    if (imm_of(at, a.market)) {
        contact(at, a.imm);
        return;
    }
    Dev& dev = devs[at];
    if (dev.member != a.market) {
        return;
    }
    learn_imm(at, a.market, a.imm);
    for (auto& [id, run] : probes) {
        if (run.device == at && run.market == a.market) {
            run.replies.push_back(a.imm);
        }
    }
}

void Simulation::Impl::contact(DeviceId d, const ElectionKey& other)
{
    ImmRt& imm = *devs[d].imm;
    if (other.device == d) {
        return;
    }
    MarketId m = imm.market;
    if (other.beats(imm.key)) {
        imm_note(d, "imm_contact", FieldList().add("other", other.device).add("other_epoch", other.epoch).add("won", 0));
        auto snap = snapshot_of(d);
        deactivate(d, "lost-election", other.device);
        learn_imm(d, m, other);
        send(d, m, other.device, ImmStateTransfer{std::move(snap), d});
        return;
    }
    imm_note(d, "imm_contact", FieldList().add("other", other.device).add("other_epoch", other.epoch).add("won", 1));
    bump_epoch(d, other.epoch);
    if (devs[d].imm && imm.last_reannounce != now()) {
        announce(d);
    }
}

std::shared_ptr<ImmSnapshot> Simulation::Impl::snapshot_of(DeviceId d)
{
    ImmRt& imm = *devs[d].imm;
    auto snap = std::make_shared<ImmSnapshot>();
    if (imm.established) {
        snap->state = imm.state;
    } else {
        snap->state = ImmState::rebuild(imm.market, imm.key.epoch, imm.census);
        snap->state.merge(imm.state);
        snap->state.known_markets = imm.state.known_markets;
    }
    snap->state.epoch = imm.key.epoch;
    for (const auto& [id, q] : imm.queries) {
        snap->queries.push_back(q);
    }
    snap->pending = imm.pending;
    snap->seen_relays = imm.seen_relays;
    snap->queued = imm.queued;
    for (const auto& a : imm.absorbed) {
        snap->state.merge(a->state);
        for (const auto& q : a->queries) {
            snap->queries.push_back(q);
        }
        snap->pending.insert(a->pending.begin(), a->pending.end());
        snap->seen_relays.insert(a->seen_relays.begin(), a->seen_relays.end());
        snap->queued.insert(snap->queued.end(), a->queued.begin(), a->queued.end());
    }
    return snap;
}

void Simulation::Impl::deactivate(DeviceId d, std::string_view reason, DeviceId successor)
{
    Dev& dev = devs[d];
    MarketId m = dev.imm->market;
    imm_note(d, "imm_down",
             FieldList()
                 .add("reason", reason)
                 .add("successor", successor == kNoDevice ? std::string("-") : std::to_string(successor)));
    dev.imm.reset();
    if (successor == kNoDevice) {
        dev.successor.erase(m);
    } else {
        dev.successor[m] = successor;
    }
    update_role(d);
}

void Simulation::Impl::on_transfer(DeviceId at, std::shared_ptr<const ImmSnapshot> snap, DeviceId from)
{
    MarketId m = snap->state.market;
    ImmRt* imm = imm_of(at, m);
    if (!imm) {
        if (!forward_to_successor(at, m, ImmStateTransfer{snap, from})) {
            salvage(at, *snap);
        }
        return;
    }
    imm_note(at, "imm_absorb", FieldList().add("from", from).add("from_epoch", snap->state.epoch));
    if (!imm->established) {
        imm->absorbed.push_back(snap);
        bump_epoch(at, snap->state.epoch);
        return;
    }
    bump_epoch(at, snap->state.epoch);
    absorb(at, *snap);
}

void Simulation::Impl::absorb(DeviceId d, const ImmSnapshot& snap)
{
    ImmRt& imm = *devs[d].imm;
    std::uint64_t token = imm.token;
    imm.state.merge(snap.state);
    imm.seen_relays.insert(snap.seen_relays.begin(), snap.seen_relays.end());
    for (const auto& q : snap.queries) {
        if (imm.queries.count(q.query.id)) {
            continue;
        }
        ResidentQuery rq = q;
        rq.fetching.clear();
        QueryId qid = q.query.id;
        imm.queries.emplace(qid, std::move(rq));
        imm_note(d, "query_resident", FieldList().add("query", qid).add("via", "transfer"));
        scheduler.schedule(std::max(now(), q.expires_at), EventKind::timer,
                           [this, d, token, qid] { expire_query(d, token, qid); });
        for (const auto& [item, hosts] : q.fetching) {
            start_fetch(d, qid, item);
        }
    }
    std::vector<ItemId> to_place;
    for (const auto& [id, p] : snap.pending) {
        if (imm.pending.count(id)) {
            if (p.parcel != 0 && p.parcel != imm.pending[id].parcel) {
                close_parcel(p.parcel, "duplicate");
            }
            continue;
        }
        PendingPlacement copy = p;
        if (copy.parcel != 0 && parcels.count(copy.parcel) == 0) {
            copy.parcel = 0;
        }
        if (copy.parcel != 0) {
            move_parcel(copy.parcel, d);
        }
        for (const auto& [host, attempt] : copy.awaiting) {
            std::uint64_t a = attempt;
            DeviceId h = host;
            ItemId item = id;
            scheduler.schedule_in(2 * c.reply_window(), EventKind::timer,
                                  [this, d, token, item, h, a] { placement_timeout(d, token, item, h, a); });
        }
        imm.pending.emplace(id, std::move(copy));
        to_place.push_back(id);
    }
    for (const auto& r : snap.queued) {
        if (!devs[d].imm) {
            break;
        }
        if (imm.established) {
            handle_request(d, r);
        } else {
            imm.queued.push_back(r);
        }
    }
    if (!devs[d].imm || !imm.established) {
        return;
    }
    for (ItemId id : to_place) {
        if (imm.pending.count(id)) {
            place(d, id);
        }
    }
    std::vector<ItemId> all;
    for (const auto& [id, hosts] : imm.state.assignment_map) {
        all.push_back(id);
    }
    for (ItemId id : all) {
        ensure_degree(d, id, false);
    }
}

void Simulation::Impl::salvage(DeviceId d, const ImmSnapshot& snap)
{
    MarketId m = snap.state.market;
    note(d, "salvage", FieldList().add("market", m).add("pending", snap.pending.size()).add("queued", snap.queued.size()));
    for (const auto& [id, p] : snap.pending) {
        if (p.parcel == 0 || parcels.count(p.parcel) == 0) {
            continue;
        }
        ToMarket req;
        req.market = m;
        req.parcel = p.parcel;
        if (p.publisher && !p.outcome_sent) {
            req.body = PublishSubmit{p.item, *p.publisher, p.publisher_itinerary};
        } else {
            StoredItem s;
            s.item = p.item;
            s.replica = p.item.replication_degree > 1;
            s.assigned = true;
            req.body = ItemReturn{d, {s}, std::nullopt};
        }
        move_parcel(p.parcel, d);
        ship(d, m, std::move(req));
    }
    for (const auto& r : snap.queued) {
        if (r.parcel != 0 && parcels.count(r.parcel) == 0) {
            continue;
        }
        if (r.parcel != 0) {
            move_parcel(r.parcel, d);
        }
        ship(d, m, ToMarket{m, r.parcel, r.body});
    }
}

void Simulation::Impl::on_handoff(DeviceId at, const ImmHandoff& h)
{
    const auto& snap = h.snapshot;
    MarketId m = snap->state.market;
    if (ImmRt* imm = imm_of(at, m)) {
        imm_note(at, "imm_absorb", FieldList().add("from", h.from).add("from_epoch", snap->state.epoch));
        bump_epoch(at, snap->state.epoch);
        if (imm->established) {
            absorb(at, *snap);
        } else {
            imm->absorbed.push_back(snap);
        }
        return;
    }
    Dev& dev = devs[at];
    if (dev.member != m) {
        salvage(at, *snap);
        return;
    }
    auto imm = std::make_unique<ImmRt>();
    imm->token = next_token++;
    imm->market = m;
    imm->key = ElectionKey{std::max(snap->state.epoch, dev.known_epoch[m]) + 1, at};
    imm->state.market = m;
    imm->state.epoch = imm->key.epoch;
    imm->state.known_markets = dev.directory;
    imm->established = true;
    dev.imm = std::move(imm);
    dev.successor.erase(m);
    dev.known_epoch[m] = dev.imm->key.epoch;
    dev.known_imm[m] = dev.imm->key;
    dev.joining.reset();
    imm_note(at, "imm_up", FieldList().add("via", "handoff").add("from", h.from));
    update_role(at);
    announce(at);
    absorb(at, *snap);
    if (dev.imm) {
        // The snapshot may predate this device's own report.
        absorb_report(at, report_of(at));
        start_periodic(at);
    }
}

// ---------------------------------------------------------------------------
// Periodic IMM work

void Simulation::Impl::start_periodic(DeviceId d)
{
    std::uint64_t token = devs[d].imm->token;
    scheduler.schedule_in(c.t_center, EventKind::timer, [this, d, token] { center_tick(d, token); });
    if (c.strategy == ReplicationStrategy::periodic) {
        scheduler.schedule_in(c.t_heartbeat, EventKind::timer, [this, d, token] { heartbeat_tick(d, token); });
    }
}

void Simulation::Impl::center_tick(DeviceId d, std::uint64_t token)
{
    ImmRt* imm = guard(d, token);
    if (!imm) {
        return;
    }
    scheduler.schedule_in(c.t_center, EventKind::timer, [this, d, token] { center_tick(d, token); });
    announce(d);
    if (imm->seek_open) {
        return;
    }
    const MarketSpec& ms = spec(imm->market);
    const Position& pos = world.position(d);
    Position ahead = world.predict_position(d, now() + c.prediction_horizon).position;
    bool off_center = !ms.core().contains(pos);
    bool leaving = !ms.contains(ahead);
    if (!off_center && !leaving) {
        return;
    }
    imm->seek_open = true;
    imm->seek_round = next_round++;
    imm->seek_replies.clear();
    imm_note(d, "imm_seek",
             FieldList().add("round", imm->seek_round).add("off_center", off_center ? 1 : 0).add("leaving", leaving ? 1 : 0));
    broadcast(d, imm->market, CenterSeekRequest{imm->market, imm->key, imm->seek_round});
    std::uint64_t round = imm->seek_round;
    scheduler.schedule_in(c.reply_window(), EventKind::timer,
                          [this, d, token, round] { close_center_seek(d, token, round); });
}

void Simulation::Impl::on_center_seek(DeviceId at, const CenterSeekRequest& c)
{
    if (imm_of(at, c.market)) {
        contact(at, c.imm);
        return;
    }
    Dev& dev = devs[at];
    if (dev.member != c.market) {
        return;
    }
    learn_imm(at, c.market, c.imm);
    send(at, c.market, c.imm.device,
         CenterSeekReply{c.market, c.round, at, world.position(at), dev.store.free_capacity()});
}

void Simulation::Impl::on_center_seek_reply(DeviceId at, const CenterSeekReply& r)
{
    ImmRt* imm = imm_of(at, r.market);
    if (!imm || !imm->seek_open || imm->seek_round != r.round) {
        return;
    }
    imm->seek_replies.push_back(r);
}

void Simulation::Impl::close_center_seek(DeviceId d, std::uint64_t token, std::uint64_t round)
{
    ImmRt* imm = guard(d, token);
    if (!imm || !imm->seek_open || imm->seek_round != round) {
        return;
    }
    imm->seek_open = false;
    const MarketSpec& ms = spec(imm->market);
    double mine = distance(world.position(d), ms.center);
    std::optional<CenterSeekReply> best;
    double best_dist = mine;
    for (const auto& r : imm->seek_replies) {
        // Only a current radio neighbor that has not signed off gets the state, in one hop.
        if (r.free == 0 || !world.linked(d, r.device) || imm->state.capacity_table.count(r.device) == 0) {
            continue;
        }
        double dist = distance(r.pos, ms.center);
        if (dist < best_dist || (best && dist == best_dist && r.device < best->device)) {
            best = r;
            best_dist = dist;
        }
    }
    imm->seek_replies.clear();
    if (best) {
        hand_off(d, best->device);
    } else {
        imm_note(d, "imm_seek_hold");
    }
}

bool Simulation::Impl::hand_off(DeviceId d, DeviceId to)
{
    ImmRt& imm = *devs[d].imm;
    MarketId m = imm.market;
    ElectionKey next{imm.key.epoch + 1, to};
    // Direct hop, so the successor is fixed now rather than at delivery.
    Message msg = transport.make(d, ImmHandoff{snapshot_of(d), d}, to);
    if (transport.unicast(d, to, std::move(msg), [this](DeviceId at, const Message& mm) { dispatch(at, mm); }) ==
        UnicastOutcome::unreachable) {
        imm_note(d, "imm_handoff_abort", FieldList().add("to", to));
        return false;
    }
    imm_note(d, "imm_handoff", FieldList().add("to", to));
    deactivate(d, "handoff", to);
    devs[d].known_imm[m] = next;
    devs[d].known_epoch[m] = next.epoch;
    return true;
}

void Simulation::Impl::heartbeat_tick(DeviceId d, std::uint64_t token)
{
    ImmRt* imm = guard(d, token);
    if (!imm) {
        return;
    }
    scheduler.schedule_in(c.t_heartbeat, EventKind::timer, [this, d, token] { heartbeat_tick(d, token); });
    std::uint64_t round = next_round++;
    ImmRt::HbRound& hb = imm->hb_rounds[round];
    for (const auto& [dv, free] : imm->state.capacity_table) {
        hb.expected.insert(dv);
    }
    for (const auto& [id, hosts] : imm->state.assignment_map) {
        hb.expected.insert(hosts.begin(), hosts.end());
    }
    hb.acks[d] = report_of(d);
    imm_note(d, "heartbeat", FieldList().add("round", round).add("expected", hb.expected.size()));
    broadcast(d, imm->market, HeartbeatPing{imm->market, imm->key, round});
    scheduler.schedule_in(c.reply_window(), EventKind::timer,
                          [this, d, token, round] { close_heartbeat(d, token, round); });
}

void Simulation::Impl::on_heartbeat(DeviceId at, const HeartbeatPing& h)
{
    if (imm_of(at, h.market)) {
        contact(at, h.imm);
        return;
    }
    Dev& dev = devs[at];
    if (dev.member != h.market) {
        return;
    }
    learn_imm(at, h.market, h.imm);
    send(at, h.market, h.imm.device, HeartbeatAck{h.market, h.round, report_of(at)});
}

void Simulation::Impl::on_heartbeat_ack(DeviceId at, const HeartbeatAck& a)
{
    ImmRt* imm = imm_of(at, a.market);
    if (!imm) {
        return;
    }
    auto it = imm->hb_rounds.find(a.round);
    if (it != imm->hb_rounds.end()) {
        it->second.acks[a.report.device] = a.report;
    }
}

void Simulation::Impl::close_heartbeat(DeviceId d, std::uint64_t token, std::uint64_t round)
{
    ImmRt* imm = guard(d, token);
    if (!imm) {
        return;
    }
    auto it = imm->hb_rounds.find(round);
    if (it == imm->hb_rounds.end()) {
        return;
    }
    ImmRt::HbRound hb = std::move(it->second);
    imm->hb_rounds.erase(it);
    for (const auto& [dv, report] : hb.acks) {
        absorb_report(d, report);
    }
    std::vector<DeviceId> silent;
    for (DeviceId dv : hb.expected) {
        if (hb.acks.count(dv) == 0) {
            silent.push_back(dv);
        }
    }
    imm_note(d, "heartbeat_close",
             FieldList().add("round", round).add("acks", hb.acks.size()).add_list("silent", silent));
    for (DeviceId dv : silent) {
        remove_member(d, dv, "silent");
    }
    std::vector<ItemId> items;
    for (const auto& [id, hosts] : imm->state.assignment_map) {
        items.push_back(id);
    }
    for (ItemId id : items) {
        if (!devs[d].imm) {
            return;
        }
        ensure_degree(d, id, true);
    }
    retry_orphans(d);
    prune(d);
}

void Simulation::Impl::absorb_report(DeviceId d, const CensusReport& report)
{
    ImmRt& imm = *devs[d].imm;
    DeviceId dv = report.device;
    imm.state.capacity_table[dv] = report.free;
    std::set<ItemId> held;
    for (const auto& s : report.holdings) {
        held.insert(s.item.id);
        auto hosts = imm.state.assignment_map.find(s.item.id);
        if (hosts == imm.state.assignment_map.end() || hosts->second.count(dv) == 0) {
            imm.state.add_hosts(s.item, {dv});
        }
    }
    std::vector<ItemId> stale;
    for (const auto& [id, hosts] : imm.state.assignment_map) {
        if (hosts.count(dv) == 0 || held.count(id) != 0) {
            continue;
        }
        auto p = imm.pending.find(id);
        if (p != imm.pending.end() && p->second.awaiting.count(dv) != 0) {
            continue;
        }
        stale.push_back(id);
    }
    for (ItemId id : stale) {
        imm.state.remove_host(id, dv);
    }
}

void Simulation::Impl::remove_member(DeviceId d, DeviceId gone, std::string_view reason)
{
    ImmRt& imm = *devs[d].imm;
    if (gone == d) {
        // Own sign-off from an earlier stint: keep only what is still stored here.
        std::vector<ItemId> stale;
        for (const auto& [id, hosts] : imm.state.assignment_map) {
            if (hosts.count(d) != 0 && !devs[d].store.contains(id)) {
                stale.push_back(id);
            }
        }
        for (ItemId id : stale) {
            imm.state.remove_host(id, d);
        }
        if (!stale.empty()) {
            imm_note(d, "imm_remove", FieldList().add("device", d).add("reason", reason).add_list("items", stale));
        }
        return;
    }
    auto affected = imm.state.remove_device(gone);
    imm_note(d, "imm_remove", FieldList().add("device", gone).add("reason", reason).add_list("items", affected));
    std::vector<ItemId> replace;
    for (auto& [id, p] : imm.pending) {
        if (p.awaiting.erase(gone) != 0) {
            p.tried.insert(gone);
            replace.push_back(id);
        }
    }
    for (ItemId id : replace) {
        if (devs[d].imm && devs[d].imm->pending.count(id)) {
            place(d, id);
        }
    }
}

void Simulation::Impl::prune(DeviceId d)
{
    if (!devs[d].imm) {
        return;
    }
    ImmRt& imm = *devs[d].imm;
    std::vector<ItemId> empty;
    for (const auto& [id, hosts] : imm.state.assignment_map) {
        if (hosts.empty() && imm.pending.count(id) == 0) {
            empty.push_back(id);
        }
    }
    for (ItemId id : empty) {
        imm_note(d, "imm_forget", FieldList().add("item", id).add("reason", "no-hosts"));
        imm.state.forget_item(id);
    }
}

void Simulation::Impl::forget_expired(DeviceId d)
{
    ImmRt& imm = *devs[d].imm;
    std::vector<ItemId> gone;
    for (const auto& [id, item] : imm.state.catalog) {
        if (item.expired_at(now())) {
            gone.push_back(id);
        }
    }
    for (ItemId id : gone) {
        imm_note(d, "imm_forget", FieldList().add("item", id).add("reason", "expired"));
        imm.state.forget_item(id);
    }
    std::vector<ItemId> stale;
    for (const auto& [id, p] : imm.pending) {
        if (p.item.expired_at(now()) && p.awaiting.empty()) {
            stale.push_back(id);
        }
    }
    for (ItemId id : stale) {
        close_placement(d, id, "expired");
    }
}

// ---------------------------------------------------------------------------
// Leaving

void Simulation::Impl::exit_market(DeviceId d, SignOffReason reason)
{
    Dev& dev = devs[d];
    MarketId m = *dev.member;
    note(d, "exit", FieldList().add("market", m).add("reason", to_string(reason)).add("pos", world.position(d)));
    if (ImmRt* imm = imm_of(d, m)) {
        const MarketSpec& ms = spec(m);
        DeviceId best = kNoDevice;
        double best_dist = 0.0;
        for (DeviceId n : world.neighbors(d)) {
            const Dev& nd = devs[n];
            if (nd.member != m || nd.opted_out || !ms.contains(world.position(n))) {
                continue;
            }
            double dist = distance(world.position(n), ms.center);
            if (best == kNoDevice || dist < best_dist) {
                best = n;
                best_dist = dist;
            }
        }
        if (best == kNoDevice || !imm->established || !hand_off(d, best)) {
            close_all_queries(d);
            auto snap = snapshot_of(d);
            deactivate(d, "departed", kNoDevice);
            dev.member.reset();
            salvage(d, *snap);
        }
    }
    dev.member.reset();
    dev.joining.reset();
    std::vector<StoredItem> assigned;
    std::vector<InfoItem> items;
    for (const auto& [id, s] : dev.store.items()) {
        if (s.assigned) {
            assigned.push_back(s);
            items.push_back(s.item);
        }
    }
    SignOff so;
    so.device = d;
    so.reason = reason;
    for (const auto& s : assigned) {
        if (s.replica) {
            so.replicas.push_back(s.item.id);
        }
    }
    note(d, "sign_off",
         FieldList().add("market", m).add("reason", to_string(reason)).add_list("replicas", so.replicas));
    if (assigned.empty()) {
        ship(d, m, ToMarket{m, 0, so});
    } else {
        ParcelId parcel = open_parcel(d, items);
        for (const auto& s : assigned) {
            unstore_item(d, s.item.id, "handoff");
        }
        ship(d, m, ToMarket{m, parcel, ItemReturn{d, assigned, so}});
    }
    update_role(d);
}

// ---------------------------------------------------------------------------
// Requests headed for the IMM

void Simulation::Impl::ship(DeviceId holder, MarketId m, ToMarket request)
{
    const MarketSpec& ms = spec(m);
    ParcelId parcel = request.parcel;
    std::string body(request_name(request.body));
    Message msg = transport.make(holder, std::move(request));
    note(holder, "ship", FieldList().add("market", m).add("msg", msg.id).add("body", body).add("parcel", parcel));
    if (parcel != 0) {
        move_parcel(parcel, kNoDevice);
    }
    transport.geo_send(
        holder, std::move(msg), GeoTarget{ms.center, ms.radius},
        [this, parcel](DeviceId at, const Message& mm) {
            const ToMarket* req = mm.as<ToMarket>();
            if (parcel != 0) {
                move_parcel(parcel, at);
            }
            relay_to_imm(at, *req);
        },
        [this, parcel, body](DeviceId last, const Message& mm, GeoDrop why) {
            std::string reason = why == GeoDrop::expired ? "expired" : (devs[last].shutting_down ? "shutdown" : "crash");
            note(last, "ship_drop", FieldList().add("msg", mm.id).add("body", body).add("reason", reason));
            if (parcel != 0) {
                move_parcel(parcel, last);
                close_parcel(parcel, reason);
            }
        });
}

void Simulation::Impl::relay_to_imm(DeviceId x, ToMarket request)
{
    Relay r;
    r.id = next_relay++;
    r.device = x;
    r.request = std::move(request);
    std::uint64_t id = r.id;
    note(x, "relay", FieldList().add("relay", id).add("market", r.request.market).add("body", request_name(r.request.body)));
    relays.emplace(id, std::move(r));
    relay_send(id);
}

void Simulation::Impl::relay_send(std::uint64_t id)
{
    auto it = relays.find(id);
    if (it == relays.end()) {
        return;
    }
    Relay& r = it->second;
    DeviceId x = r.device;
    MarketId m = r.request.market;
    if (!usable(x)) {
        relays.erase(it);
        return;
    }
    Dev& dev = devs[x];
    if (!inside(x, m)) {
        ToMarket req = std::move(r.request);
        relays.erase(it);
        note(x, "relay_reship", FieldList().add("relay", id).add("market", m));
        ship(x, m, std::move(req));
        maybe_power_off(x);
        return;
    }
    ImmRequest ir{m, id, x, r.request.parcel, r.request.body};
    if (imm_of(x, m)) {
        relays.erase(it);
        accept_request(x, ir);
        maybe_power_off(x);
        return;
    }
    auto known = dev.known_imm.find(m);
    if (known == dev.known_imm.end() || known->second.device == x) {
        start_probe(x, m, ProbePurpose::relay, id);
        return;
    }
    r.attempt = next_attempt++;
    ++r.attempts;
    std::uint64_t attempt = r.attempt;
    send(x, m, known->second.device, std::move(ir));
    scheduler.schedule_in(c.t_ack, EventKind::timer, [this, id, attempt] { relay_timeout(id, attempt); });
}

void Simulation::Impl::relay_timeout(std::uint64_t id, std::uint64_t attempt)
{
    auto it = relays.find(id);
    if (it == relays.end() || it->second.attempt != attempt) {
        return;
    }
    DeviceId x = it->second.device;
    MarketId m = it->second.request.market;
    note(x, "relay_timeout", FieldList().add("relay", id).add("attempts", it->second.attempts));
    devs[x].known_imm.erase(m);
    it->second.attempt = 0;
    relay_send(id);
}

void Simulation::Impl::relay_done(std::uint64_t id)
{
    auto it = relays.find(id);
    if (it == relays.end()) {
        return;
    }
    DeviceId x = it->second.device;
    note(x, "relay_done", FieldList().add("relay", id));
    relays.erase(it);
    maybe_power_off(x);
}

void Simulation::Impl::on_imm_request(DeviceId at, const ImmRequest& r)
{
    if (imm_of(at, r.market)) {
        send(at, r.market, r.relay, ImmRequestAck{r.market, r.relay_id});
        accept_request(at, r);
        return;
    }
    forward_to_successor(at, r.market, r);
}

void Simulation::Impl::on_request_ack(DeviceId at, const ImmRequestAck& a)
{
    auto it = relays.find(a.relay_id);
    if (it != relays.end() && it->second.device == at) {
        relay_done(a.relay_id);
    }
}

void Simulation::Impl::accept_request(DeviceId d, const ImmRequest& r)
{
    ImmRt& imm = *devs[d].imm;
    if (!imm.seen_relays.insert(r.relay_id).second) {
        imm_note(d, "imm_request_dup", FieldList().add("relay", r.relay_id));
        return;
    }
    ImmRequest copy = r;
    if (copy.parcel != 0) {
        if (parcels.count(copy.parcel) == 0) {
            imm_note(d, "imm_request_lost", FieldList().add("relay", r.relay_id).add("parcel", copy.parcel));
            copy.parcel = 0;
            if (auto* ret = std::get_if<ItemReturn>(&copy.body)) {
                ret->items.clear();
            } else if (std::holds_alternative<PublishSubmit>(copy.body)) {
                return;
            }
        } else {
            move_parcel(copy.parcel, d);
        }
    }
    imm_note(d, "imm_request",
             FieldList().add("relay", r.relay_id).add("from", r.relay).add("body", request_name(r.body)));
    if (!imm.established) {
        imm.queued.push_back(std::move(copy));
        return;
    }
    handle_request(d, copy);
}

void Simulation::Impl::handle_request(DeviceId d, const ImmRequest& r)
{
    ImmRt& imm = *devs[d].imm;
    auto sign_off = [&](const SignOff& so) {
        remove_member(d, so.device, to_string(so.reason));
        if (c.strategy == ReplicationStrategy::signoff) {
            for (ItemId id : so.replicas) {
                if (devs[d].imm) {
                    ensure_degree(d, id, true);
                }
            }
        }
    };
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, PublishSubmit>) {
                if (imm.pending.count(body.item.id) || imm.state.knows(body.item.id)) {
                    imm_note(d, "publish_dup", FieldList().add("item", body.item.id));
                    if (r.parcel != 0) {
                        close_parcel(r.parcel, "duplicate");
                    }
                    return;
                }
                PendingPlacement& p = placement_for(imm, body.item);
                p.parcel = r.parcel;
                p.publisher = body.publisher;
                p.publisher_itinerary = body.publisher_itinerary;
                imm_note(d, "publish_accept", FieldList().add("item", body.item.id).add("publisher", body.publisher));
                place(d, body.item.id);
            } else if constexpr (std::is_same_v<T, ItemReturn>) {
                if (body.sign_off) {
                    remove_member(d, body.sign_off->device, to_string(body.sign_off->reason));
                }
                auto split = split_parcel(r.parcel);
                std::vector<ItemId> placed;
                for (const auto& s : body.items) {
                    ParcelId part = split.count(s.item.id) ? split[s.item.id] : 0;
                    if (s.item.expired_at(now())) {
                        if (part != 0) {
                            close_parcel(part, "expired");
                        }
                        continue;
                    }
                    auto existing = imm.pending.find(s.item.id);
                    if (existing != imm.pending.end()) {
                        if (existing->second.parcel == 0 && part != 0) {
                            existing->second.parcel = part;
                        } else if (part != 0) {
                            close_parcel(part, "duplicate");
                        }
                    } else {
                        PendingPlacement& p = placement_for(imm, s.item);
                        p.parcel = part;
                    }
                    imm_note(d, "imm_return", FieldList().add("item", s.item.id).add("from", body.from));
                    placed.push_back(s.item.id);
                }
                for (ItemId id : placed) {
                    if (devs[d].imm && devs[d].imm->pending.count(id)) {
                        place(d, id);
                    }
                }
                if (body.sign_off && devs[d].imm && c.strategy == ReplicationStrategy::signoff) {
                    for (ItemId id : body.sign_off->replicas) {
                        if (devs[d].imm) {
                            ensure_degree(d, id, true);
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, QuerySubmit>) {
                register_query(d, body.query);
            } else if constexpr (std::is_same_v<T, SignOff>) {
                sign_off(body);
            }
        },
        r.body);
    prune(d);
}

void Simulation::Impl::on_capacity_report(DeviceId at, const CapacityReport& cr)
{
    ImmRt* imm = imm_of(at, cr.market);
    if (!imm) {
        forward_to_successor(at, cr.market, cr);
        return;
    }
    imm->state.capacity_table[cr.device] = cr.free;
    imm_note(at, "imm_member", FieldList().add("device", cr.device).add("free", cr.free));
    if (imm->established) {
        retry_orphans(at);
    }
}

// ---------------------------------------------------------------------------
// Placement and replication

PendingPlacement& Simulation::Impl::placement_for(ImmRt& imm, const InfoItem& item)
{
    auto [it, fresh] = imm.pending.try_emplace(item.id);
    if (fresh) {
        it->second.item = item;
    }
    return it->second;
}

void Simulation::Impl::place(DeviceId d, ItemId id)
{
    ImmRt& imm = *devs[d].imm;
    auto pit = imm.pending.find(id);
    if (pit == imm.pending.end()) {
        return;
    }
    PendingPlacement& p = pit->second;
    MarketId m = imm.market;
    std::set<DeviceId> hosts;
    if (auto h = imm.state.assignment_map.find(id); h != imm.state.assignment_map.end()) {
        hosts = h->second;
    }
    std::uint32_t degree = p.item.replication_degree;
    auto have = static_cast<std::uint32_t>(hosts.size());
    auto waiting = static_cast<std::uint32_t>(p.awaiting.size());
    if (have + waiting >= degree) {
        if (waiting == 0) {
            close_placement(d, id, "placed");
        }
        return;
    }
    std::uint32_t need = degree - have - waiting;
    std::set<DeviceId> exclude = p.tried;
    exclude.insert(hosts.begin(), hosts.end());
    for (const auto& [h, a] : p.awaiting) {
        exclude.insert(h);
    }
    bool from_parcel = p.parcel != 0 && parcels.count(p.parcel) != 0;
    if (!from_parcel && hosts.empty()) {
        if (waiting == 0) {
            close_placement(d, id, "no-source");
        }
        return;
    }
    auto picks = select_hosts(imm.state.capacity_table, p.item.size, need, exclude);
    std::uint64_t token = imm.token;
    for (DeviceId h : picks) {
        auto& free = imm.state.capacity_table[h];
        free -= std::min(free, p.item.size);
        std::uint64_t attempt = next_attempt++;
        p.awaiting[h] = attempt;
        if (from_parcel) {
            imm_note(d, "imm_assign", FieldList().add("item", id).add("host", h).add("attempt", attempt).add("source", "parcel"));
            send(d, m, h, StoreCmd{m, imm.key, p.item, degree > 1});
        } else {
            DeviceId source = *hosts.begin();
            imm_note(d, "imm_assign", FieldList().add("item", id).add("host", h).add("attempt", attempt).add("source", source));
            send(d, m, source, ReplicateCmd{m, imm.key, id, h});
        }
        scheduler.schedule_in(2 * c.reply_window(), EventKind::timer,
                              [this, d, token, id, h, attempt] { placement_timeout(d, token, id, h, attempt); });
    }
    if (!devs[d].imm) {
        return;
    }
    auto again = imm.pending.find(id);
    if (again == imm.pending.end() || !again->second.awaiting.empty()) {
        return;
    }
    if (have > 0) {
        close_placement(d, id, "degraded");
    } else if (again->second.publisher && !again->second.outcome_sent) {
        close_placement(d, id, "refused");
    } else {
        imm_note(d, "imm_orphan", FieldList().add("item", id));
    }
}

void Simulation::Impl::placement_timeout(DeviceId d, std::uint64_t token, ItemId id, DeviceId host,
                                         std::uint64_t attempt)
{
    ImmRt* imm = guard(d, token);
    if (!imm) {
        return;
    }
    auto it = imm->pending.find(id);
    if (it == imm->pending.end()) {
        return;
    }
    auto a = it->second.awaiting.find(host);
    if (a == it->second.awaiting.end() || a->second != attempt) {
        return;
    }
    it->second.awaiting.erase(a);
    it->second.tried.insert(host);
    imm_note(d, "imm_store_timeout", FieldList().add("item", id).add("host", host));
    place(d, id);
}

void Simulation::Impl::close_placement(DeviceId d, ItemId id, std::string_view cause)
{
    ImmRt& imm = *devs[d].imm;
    auto it = imm.pending.find(id);
    if (it == imm.pending.end()) {
        return;
    }
    PendingPlacement p = std::move(it->second);
    imm.pending.erase(it);
    std::set<DeviceId> hosts;
    if (auto h = imm.state.assignment_map.find(id); h != imm.state.assignment_map.end()) {
        hosts = h->second;
    }
    imm_note(d, "imm_place_close", FieldList().add("item", id).add("cause", cause).add_list("hosts", hosts));
    if (p.publisher && !p.outcome_sent) {
        send_outcome(d, p, !hosts.empty());
    }
    if (p.parcel != 0) {
        close_parcel(p.parcel, cause == "placed" || cause == "degraded" ? std::string_view("placed") : cause);
    }
}

void Simulation::Impl::on_store_cmd(DeviceId at, const StoreCmd& s)
{
    Dev& dev = devs[at];
    bool ok = false;
    if (dev.member == s.market) {
        learn_imm(at, s.market, s.imm);
        ok = store_item(at, s.item, s.replica, true);
    } else {
        note(at, "store_refuse", FieldList().add("item", s.item.id).add("reason", "not-member"));
    }
    send(at, s.market, s.imm.device, StoreAck{s.market, s.item.id, at, dev.store.free_capacity(), ok});
}

void Simulation::Impl::on_store_ack(DeviceId at, const StoreAck& a)
{
    ImmRt* imm = imm_of(at, a.market);
    if (!imm) {
        forward_to_successor(at, a.market, a);
        return;
    }
    imm->state.capacity_table[a.device] = a.free;
    auto pit = imm->pending.find(a.item);
    if (pit != imm->pending.end()) {
        PendingPlacement& p = pit->second;
        p.awaiting.erase(a.device);
        if (!a.stored) {
            p.tried.insert(a.device);
            imm_note(at, "imm_store_nack", FieldList().add("item", a.item).add("host", a.device));
            place(at, a.item);
            return;
        }
        bool fresh = !imm->state.knows(a.item) || imm->state.assignment_map[a.item].empty();
        imm->state.add_hosts(p.item, {a.device});
        imm_note(at, "imm_hosted", FieldList().add("item", a.item).add("host", a.device));
        InfoItem item = p.item;
        if (p.publisher && !p.outcome_sent) {
            send_outcome(at, p, true);
        }
        if (fresh) {
            offer_new_item(at, item);
        }
        if (devs[at].imm) {
            place(at, a.item);
        }
        return;
    }
    if (!a.stored) {
        return;
    }
    auto cat = imm->state.catalog.find(a.item);
    if (cat == imm->state.catalog.end()) {
        send(at, a.market, a.device, UnstoreCmd{a.market, a.item});
        return;
    }
    imm->state.add_hosts(cat->second, {a.device});
    imm_note(at, "imm_hosted", FieldList().add("item", a.item).add("host", a.device).add("late", 1));
    ensure_degree(at, a.item, false);
}

void Simulation::Impl::on_replicate_cmd(DeviceId at, const ReplicateCmd& r)
{
    Dev& dev = devs[at];
    const StoredItem* held = dev.store.find(r.item);
    if (dev.member == r.market && held && !held->item.expired_at(now())) {
        learn_imm(at, r.market, r.imm);
        note(at, "replicate", FieldList().add("item", r.item).add("to", r.target));
        send(at, r.market, r.target, StoreCmd{r.market, r.imm, held->item, held->item.replication_degree > 1});
        return;
    }
    send(at, r.market, r.imm.device, ReplicateFail{r.market, r.item, at, r.target});
}

void Simulation::Impl::on_replicate_fail(DeviceId at, const ReplicateFail& f)
{
    ImmRt* imm = imm_of(at, f.market);
    if (!imm) {
        forward_to_successor(at, f.market, f);
        return;
    }
    imm_note(at, "imm_replicate_fail", FieldList().add("item", f.item).add("source", f.source));
    imm->state.remove_host(f.item, f.source);
    auto it = imm->pending.find(f.item);
    if (it == imm->pending.end()) {
        return;
    }
    if (it->second.awaiting.erase(f.target) != 0) {
        imm->state.capacity_table[f.target] += it->second.item.size;
    }
    place(at, f.item);
}

void Simulation::Impl::on_unstore(DeviceId at, const UnstoreCmd& u)
{
    unstore_item(at, u.item, "trim");
}

void Simulation::Impl::ensure_degree(DeviceId d, ItemId id, bool repair)
{
    ImmRt& imm = *devs[d].imm;
    auto hit = imm.state.assignment_map.find(id);
    if (hit == imm.state.assignment_map.end()) {
        return;
    }
    const InfoItem& meta = imm.state.catalog.at(id);
    std::uint32_t degree = meta.replication_degree;
    std::set<DeviceId> hosts = hit->second;
    if (hosts.size() > degree) {
        std::size_t excess = hosts.size() - degree;
        for (auto h = hosts.rbegin(); h != hosts.rend() && excess > 0; ++h, --excess) {
            imm.state.remove_host(id, *h);
            imm.state.capacity_table[*h] += meta.size;
            imm_note(d, "imm_trim", FieldList().add("item", id).add("host", *h));
            send(d, imm.market, *h, UnstoreCmd{imm.market, id});
        }
        return;
    }
    if (!repair || hosts.empty() || meta.expired_at(now())) {
        return;
    }
    std::size_t waiting = 0;
    if (auto p = imm.pending.find(id); p != imm.pending.end()) {
        waiting = p->second.awaiting.size();
    }
    if (hosts.size() + waiting >= degree) {
        return;
    }
    imm_note(d, "imm_repair", FieldList().add("item", id).add("have", hosts.size()).add("degree", degree));
    placement_for(imm, meta);
    place(d, id);
}

void Simulation::Impl::retry_orphans(DeviceId d)
{
    ImmRt& imm = *devs[d].imm;
    std::vector<ItemId> orphans;
    for (auto& [id, p] : imm.pending) {
        if (p.awaiting.empty()) {
            p.tried.clear();
            orphans.push_back(id);
        }
    }
    for (ItemId id : orphans) {
        if (devs[d].imm && devs[d].imm->pending.count(id)) {
            place(d, id);
        }
    }
}

void Simulation::Impl::send_outcome(DeviceId d, PendingPlacement& p, bool accepted)
{
    ImmRt& imm = *devs[d].imm;
    p.outcome_sent = true;
    imm_note(d, "publish_outcome",
             FieldList().add("item", p.item.id).add("publisher", *p.publisher).add("accepted", accepted ? 1 : 0));
    DeviceDelivery dd;
    dd.recipient = *p.publisher;
    dd.candidates = plan_rendezvous(p.publisher_itinerary, world.position(d), now(), world.radio_range(), c.hop_latency);
    dd.body = PublishOutcome{p.item.id, imm.market, accepted};
    deliver_to_device(d, std::move(dd));
}

} // namespace ads
