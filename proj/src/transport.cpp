// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/transport.hpp"

#include <stdexcept>

namespace ads {

Transport::Transport(Scheduler& scheduler, World& world, Trace& trace, TransportParams params)
    : scheduler_(scheduler), world_(world), trace_(trace), params_(params)
{
    if (params_.hop_latency < 1) {
        throw std::invalid_argument("hop latency must be at least one tick");
    }
}

Message Transport::make(DeviceId src, Payload payload, DeviceId dst)
{
    Message m;
    m.id = next_id_++;
    m.src = src;
    m.dst = dst;
    m.route.push_back(src);
    m.payload = std::make_shared<const Payload>(std::move(payload));
    return m;
}

void Transport::count_tx(std::string_view kind)
{
    auto it = tx_by_kind_.find(kind);
    if (it == tx_by_kind_.end()) {
        tx_by_kind_.emplace(std::string(kind), 1);
    } else {
        ++it->second;
    }
}

UnicastOutcome Transport::unicast(DeviceId src, DeviceId dst, Message msg, Handler on_deliver)
{
    if (!world_.linked(src, dst)) {
        trace_.append(scheduler_.now(), src, "unreachable",
                      FieldList().add("msg", msg.id).add("kind", msg.kind()).add("dst", dst));
        return UnicastOutcome::unreachable;
    }
    ++msg.hop_count;
    msg.route.push_back(dst);
    trace_.append(scheduler_.now(), src, "tx",
                  FieldList().add("msg", msg.id).add("kind", msg.kind()).add("to", dst).add("hop", msg.hop_count));
    count_tx(msg.kind());
    ++in_flight_;
    scheduler_.schedule_in(params_.hop_latency, EventKind::message_delivery,
                           [this, dst, msg = std::move(msg), on_deliver = std::move(on_deliver)] {
                               --in_flight_;
                               if (!world_.alive(dst)) {
                                   trace_.append(scheduler_.now(), dst, "drop",
                                                 FieldList().add("msg", msg.id).add("kind", msg.kind()));
                                   return;
                               }
                               trace_.append(scheduler_.now(), dst, "rx",
                                             FieldList().add("msg", msg.id).add("kind", msg.kind()));
                               on_deliver(dst, msg);
                           });
    return UnicastOutcome::scheduled;
}

void Transport::flood(DeviceId origin, Message msg, std::optional<Region> region, std::uint32_t ttl,
                      Handler on_receive)
{
    if (region && !region->contains(world_.position(origin))) {
        throw std::logic_error("region flood must originate inside the region");
    }
    msg.src = origin;
    msg.hop_count = 0;
    msg.ttl = ttl;
    msg.route.assign(1, origin);
    FloodRecord record;
    record.id = msg.id;
    record.origin = origin;
    record.region = region;
    record.ttl = ttl;
    record.reached.emplace(origin, 0);
    floods_[msg.id] = std::move(record);
    flood_handlers_[msg.id] = std::move(on_receive);
    trace_.append(scheduler_.now(), origin, "flood",
                  FieldList().add("msg", msg.id).add("kind", msg.kind()).add("ttl", ttl).add("dst",
                      msg.dst == kNoDevice ? std::string("*") : std::to_string(msg.dst)));
    if (ttl == 0 || !world_.alive(origin)) {
        if (!params_.keep_flood_records) {
            floods_.erase(msg.id);
        }
        flood_handlers_.erase(msg.id);
        return;
    }
    MsgId id = msg.id;
    transmit(id, origin, std::move(msg));
}

void Transport::transmit(MsgId flood_id, DeviceId from, Message msg)
{
    FloodRecord& record = floods_.at(flood_id);
    ++record.transmissions;
    ++record.outstanding;
    count_tx(msg.kind());
    trace_.append(scheduler_.now(), from, "tx",
                  FieldList().add("msg", msg.id).add("kind", msg.kind()).add("to", "*").add("hop", msg.hop_count));
    ++in_flight_;
    std::vector<DeviceId> receivers = world_.neighbors(from);
    scheduler_.schedule_in(params_.hop_latency, EventKind::message_delivery,
                           [this, flood_id, from, receivers = std::move(receivers), msg = std::move(msg)] {
                               --in_flight_;
                               deliver_flood(flood_id, from, receivers, msg);
                           });
}

void Transport::deliver_flood(MsgId flood_id, DeviceId from, const std::vector<DeviceId>& receivers, Message msg)
{
    (void)from;
    auto rec_it = floods_.find(flood_id);
    if (rec_it == floods_.end()) {
        return;
    }
    FloodRecord& record = rec_it->second;
    --record.outstanding;
    std::uint32_t hop = msg.hop_count + 1;
    for (DeviceId n : receivers) {
        if (!world_.alive(n)) {
            continue;
        }
        if (record.region && !record.region->contains(world_.position(n))) {
            continue;
        }
        if (record.reached.count(n) != 0) {
            ++record.duplicates;
            trace_.append(scheduler_.now(), n, "fdup", FieldList().add("msg", flood_id));
            continue;
        }
        record.reached.emplace(n, hop);
        Message copy = msg;
        copy.hop_count = hop;
        copy.route.push_back(n);
        trace_.append(scheduler_.now(), n, "frx",
                      FieldList().add("msg", flood_id).add("kind", copy.kind()).add("hop", hop));
        if (hop < record.ttl) {
            transmit(flood_id, n, copy);
        }
        // Copy the handler: it may start floods that rehash nothing, but the
        // record can be erased below once outstanding reaches zero.
        Handler handler = flood_handlers_.at(flood_id);
        handler(n, copy);
    }
    auto it = floods_.find(flood_id);
    if (it != floods_.end() && it->second.outstanding == 0) {
        flood_handlers_.erase(flood_id);
        if (!params_.keep_flood_records) {
            floods_.erase(it);
        }
    }
}

const FloodRecord* Transport::flood_record(MsgId id) const
{
    auto it = floods_.find(id);
    return it == floods_.end() ? nullptr : &it->second;
}

GeoDecision Transport::geo_forward(DeviceId holder, const GeoTarget& target, double best_dist) const
{
    double here = distance(world_.position(holder), target.point);
    if (here <= target.radius) {
        return GeoDecision{GeoStep::delivered, holder};
    }
    double bar = std::min(best_dist, here);
    DeviceId best = kNoDevice;
    double best_d = bar;
    for (DeviceId n : world_.neighbors(holder)) {
        double d = distance(world_.position(n), target.point);
        if (d < best_d) {
            best_d = d;
            best = n;
        }
    }
    if (best != kNoDevice) {
        return GeoDecision{GeoStep::forward, best};
    }
    return GeoDecision{GeoStep::carry, kNoDevice};
}

CarryDecision Transport::carry_select(DeviceId holder, const GeoTarget& target) const
{
    SimTime at = scheduler_.now() + params_.prediction_horizon;
    double mine = distance(world_.predict_position(holder, at).position, target.point);
    DeviceId best = holder;
    double best_d = mine;
    for (DeviceId n : world_.neighbors(holder)) {
        double d = distance(world_.predict_position(n, at).position, target.point);
        if (d < best_d) {
            best_d = d;
            best = n;
        }
    }
    if (best != holder && best_d < mine - params_.carry_margin) {
        return CarryDecision{true, best};
    }
    return CarryDecision{false, holder};
}

void Transport::geo_send(DeviceId holder, Message msg, GeoTarget target, ArriveFn on_arrive, DropFn on_drop,
                         std::optional<SimTime> deadline)
{
    MsgId id = msg.id;
    GeoPacket p;
    p.msg = std::move(msg);
    p.msg.ttl = std::numeric_limits<std::uint32_t>::max();
    p.target = target;
    p.holder = holder;
    p.best = distance(world_.position(holder), target.point);
    p.on_arrive = std::move(on_arrive);
    p.on_drop = std::move(on_drop);
    p.deadline = deadline;
    trace_.append(scheduler_.now(), holder, "geo_start",
                  FieldList().add("msg", id).add("kind", p.msg.kind()).add("target", target.point).add("radius",
                      target.radius));
    packets_.emplace(id, std::move(p));
    if (!world_.alive(holder)) {
        crash(holder);
        return;
    }
    advance(id);
}

void Transport::hop(GeoPacket& p, DeviceId to, bool carry)
{
    DeviceId from = p.holder;
    double d_from = distance(world_.position(from), p.target.point);
    double d_to = distance(world_.position(to), p.target.point);
    ++p.msg.hop_count;
    p.msg.route.push_back(to);
    trace_.append(scheduler_.now(), from, "tx",
                  FieldList()
                      .add("msg", p.msg.id)
                      .add("kind", p.msg.kind())
                      .add("to", to)
                      .add("hop", p.msg.hop_count)
                      .add("geo", carry ? "carry" : "greedy")
                      .add("d_from", d_from)
                      .add("d_to", d_to));
    trace_.append(scheduler_.now(), to, "custody", FieldList().add("msg", p.msg.id).add("from", from).add("to", to));
    count_tx(p.msg.kind());
    p.holder = to;
    p.in_flight = true;
    if (!carry) {
        p.best = std::min(p.best, d_to);
    }
    ++in_flight_;
    MsgId id = p.msg.id;
    scheduler_.schedule_in(params_.hop_latency, EventKind::message_delivery, [this, id, to] {
        --in_flight_;
        auto it = packets_.find(id);
        if (it == packets_.end() || it->second.holder != to || !it->second.in_flight) {
            return;
        }
        it->second.in_flight = false;
        advance(id);
    });
}

void Transport::advance(MsgId id)
{
    auto it = packets_.find(id);
    if (it == packets_.end()) {
        return;
    }
    GeoPacket& p = it->second;
    double here = distance(world_.position(p.holder), p.target.point);
    p.best = std::min(p.best, here);
    GeoDecision decision = geo_forward(p.holder, p.target, p.best);
    if (decision.step == GeoStep::delivered) {
        GeoPacket done = std::move(p);
        packets_.erase(it);
        trace_.append(scheduler_.now(), done.holder, "geo_arrive",
                      FieldList().add("msg", id).add("kind", done.msg.kind()).add("hops", done.msg.hop_count));
        done.on_arrive(done.holder, done.msg);
        return;
    }
    if (decision.step == GeoStep::forward) {
        p.carrying = false;
        hop(p, decision.next, false);
        return;
    }
    if (!p.carrying) {
        p.carrying = true;
        trace_.append(scheduler_.now(), p.holder, "carry", FieldList().add("msg", id));
    }
    CarryDecision carry = carry_select(p.holder, p.target);
    if (carry.handoff) {
        hop(p, carry.to, true);
        return;
    }
    p.next_eval = scheduler_.now() + params_.carry_period;
    p.seen_neighbors = world_.neighbors(p.holder);
}

void Transport::tick()
{
    SimTime now = scheduler_.now();
    std::vector<MsgId> due;
    std::vector<MsgId> expired;
    for (auto& [id, p] : packets_) {
        if (p.deadline && now > *p.deadline) {
            expired.push_back(id);
            continue;
        }
        if (p.in_flight || !p.carrying) {
            continue;
        }
        bool arrived = distance(world_.position(p.holder), p.target.point) <= p.target.radius;
        if (arrived || now >= p.next_eval || world_.neighbors(p.holder) != p.seen_neighbors) {
            due.push_back(id);
        }
    }
    for (MsgId id : expired) {
        auto it = packets_.find(id);
        if (it == packets_.end()) {
            continue;
        }
        GeoPacket p = std::move(it->second);
        packets_.erase(it);
        trace_.append(now, p.holder, "geo_drop", FieldList().add("msg", id).add("kind", p.msg.kind()).add("reason",
                                                                                                        "expired"));
        p.on_drop(p.holder, p.msg, GeoDrop::expired);
    }
    for (MsgId id : due) {
        advance(id);
    }
}

void Transport::crash(DeviceId device)
{
    std::vector<MsgId> lost = geo_held_by(device);
    for (MsgId id : lost) {
        auto it = packets_.find(id);
        GeoPacket p = std::move(it->second);
        packets_.erase(it);
        trace_.append(scheduler_.now(), device, "geo_drop",
                      FieldList().add("msg", id).add("kind", p.msg.kind()).add("reason", "holder-crashed"));
        p.on_drop(device, p.msg, GeoDrop::holder_crashed);
    }
}

std::vector<MsgId> Transport::geo_held_by(DeviceId device) const
{
    std::vector<MsgId> out;
    for (const auto& [id, p] : packets_) {
        if (p.holder == device) {
            out.push_back(id);
        }
    }
    return out;
}

std::optional<DeviceId> Transport::geo_holder(MsgId id) const
{
    auto it = packets_.find(id);
    if (it == packets_.end()) {
        return std::nullopt;
    }
    return it->second.holder;
}

} // namespace ads
