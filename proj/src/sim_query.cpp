// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "sim_internal.hpp"

namespace ads {

namespace {

std::vector<ItemId> ids_of(const std::vector<InfoItem>& items)
{
    std::vector<ItemId> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        out.push_back(item.id);
    }
    return out;
}

std::vector<MarketId> markets_of(const ResponseMeta& meta)
{
    std::vector<MarketId> out;
    for (const auto& e : meta.known_markets) {
        out.push_back(e.spec.id);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Synchronous local queries

void Simulation::Impl::run_sync(const WorkloadEvent& ev)
{
    DeviceId d = ev.device;
    SyncRun run;
    run.id = ev.query;
    run.device = d;
    run.started = now();
    run.deadline = now() + ev.timeout;
    for (auto& item : devs[d].store.retrieve(ev.predicate, now())) {
        run.items.emplace(item.id, std::move(item));
    }
    note(d, "sync_start",
         FieldList().add("query", ev.query).add("hops", ev.hop_limit).add("timeout", ev.timeout).add("local", run.items.size()));
    if (ev.hop_limit == 0) {
        SyncOutcome out{d, now(), now(), {}};
        for (auto& [id, item] : run.items) {
            out.items.push_back(item);
        }
        note(d, "sync_done", FieldList().add("query", ev.query).add_list("items", ids_of(out.items)));
        sync_outcomes[ev.query] = std::move(out);
        return;
    }
    QueryId q = ev.query;
    syncs[q] = std::move(run);
    Message msg = transport.make(d, SyncProbe{q, d, ev.predicate});
    transport.flood(d, std::move(msg), std::nullopt, ev.hop_limit,
                    [this](DeviceId at, const Message& m) { dispatch(at, m); });
    scheduler.schedule(now() + ev.timeout, EventKind::timer, [this, q] { sync_deadline(q); });
}

void Simulation::Impl::on_sync_probe(DeviceId at, const Message& msg, const SyncProbe& p)
{
    auto matches = devs[at].store.retrieve(p.predicate, now());
    if (matches.empty()) {
        return;
    }
    note(at, "sync_answer", FieldList().add("query", p.query).add_list("items", ids_of(matches)));
    reply_along(at, msg.route, SyncReply{p.query, at, std::move(matches)});
}

void Simulation::Impl::on_sync_reply(DeviceId at, const SyncReply& r)
{
    auto it = syncs.find(r.query);
    if (it == syncs.end() || it->second.device != at || now() > it->second.deadline) {
        note(at, "sync_late", FieldList().add("query", r.query).add("from", r.responder));
        return;
    }
    for (const auto& item : r.items) {
        it->second.items.emplace(item.id, item);
    }
    note(at, "sync_reply", FieldList().add("query", r.query).add("from", r.responder).add_list("items", ids_of(r.items)));
}

void Simulation::Impl::sync_deadline(QueryId q)
{
    auto it = syncs.find(q);
    if (it == syncs.end()) {
        return;
    }
    if (!it->second.deferred) {
        // Replies landing on the deadline tick were queued before this
        // re-schedule, so they fire first.
        it->second.deferred = true;
        scheduler.schedule_in(0, EventKind::timer, [this, q] { sync_deadline(q); });
        return;
    }
    SyncRun run = std::move(it->second);
    syncs.erase(it);
    SyncOutcome out{run.device, run.started, now(), {}};
    for (auto& [id, item] : run.items) {
        out.items.push_back(std::move(item));
    }
    note(run.device, "sync_done", FieldList().add("query", q).add_list("items", ids_of(out.items)));
    sync_outcomes[q] = std::move(out);
}

// ---------------------------------------------------------------------------
// Asynchronous remote queries: initiator side

void Simulation::Impl::launch_async(const WorkloadEvent& ev)
{
    DeviceId d = ev.device;
    Dev& dev = devs[d];
    if (!ev.market || dev.directory.count(*ev.market) == 0) {
        note(d, "query_error", FieldList().add("query", ev.query).add("reason", "unknown-market"));
        return;
    }
    AsyncSmartQuery q;
    q.id = ev.query;
    q.predicate = ev.predicate;
    q.initiator = d;
    q.initiator_itinerary = world.itinerary_for(d, c.prediction_horizon);
    q.expected_results = ev.expected;
    q.active_for = ev.active_for;
    q.target_market = *ev.market;
    try {
        q.validate();
    } catch (const std::invalid_argument& e) {
        note(d, "query_error", FieldList().add("query", ev.query).add("reason", e.what()));
        return;
    }
    dev.assemblers[q.id];
    note(d, "query_launch",
         FieldList()
             .add("query", q.id)
             .add("market", q.target_market)
             .add("active", q.active_for)
             .add("expected", q.expected_results ? std::to_string(*q.expected_results) : std::string("-")));
    MarketId m = q.target_market;
    ship(d, m, ToMarket{m, 0, QuerySubmit{std::move(q)}});
}

// ---------------------------------------------------------------------------
// Asynchronous remote queries: market side

ResponseMeta Simulation::Impl::response_meta(const ImmRt& imm) const
{
    ResponseMeta meta;
    for (const auto& [id, e] : imm.state.known_markets) {
        if (id != imm.market) {
            meta.known_markets.push_back(e);
        }
    }
    DirectoryEntry own;
    own.spec = spec(imm.market);
    own.type_summary = imm.state.type_index;
    own.summary_at = now();
    meta.known_markets.push_back(std::move(own));
    return meta;
}

void Simulation::Impl::register_query(DeviceId d, const AsyncSmartQuery& q)
{
    ImmRt& imm = *devs[d].imm;
    if (imm.queries.count(q.id)) {
        return;
    }
    ResidentQuery rq;
    rq.query = q;
    rq.expires_at = now() + q.active_for;
    rq.planner = ChunkPlanner(c.chunk_size, q.expected_results);
    imm.queries.emplace(q.id, std::move(rq));
    imm_note(d, "query_resident",
             FieldList().add("query", q.id).add("initiator", q.initiator).add("expires", now() + q.active_for));
    std::uint64_t token = imm.token;
    QueryId id = q.id;
    scheduler.schedule(now() + q.active_for, EventKind::timer, [this, d, token, id] { expire_query(d, token, id); });
    std::vector<ItemId> matches;
    for (const auto& [item, meta] : imm.state.catalog) {
        auto hosts = imm.state.assignment_map.find(item);
        if (hosts != imm.state.assignment_map.end() && !hosts->second.empty() && !meta.expired_at(now()) &&
            q.predicate.matches(meta)) {
            matches.push_back(item);
        }
    }
    for (ItemId item : matches) {
        if (!devs[d].imm || devs[d].imm->queries.count(id) == 0) {
            return;
        }
        start_fetch(d, id, item);
    }
    if (devs[d].imm && devs[d].imm->queries.count(id)) {
        flush_chunks(d, id);
    }
}

void Simulation::Impl::start_fetch(DeviceId d, QueryId q, ItemId item)
{
    ImmRt& imm = *devs[d].imm;
    auto qit = imm.queries.find(q);
    if (qit == imm.queries.end() || qit->second.planner.offered().count(item)) {
        return;
    }
    auto hosts = imm.state.assignment_map.find(item);
    if (hosts == imm.state.assignment_map.end()) {
        return;
    }
    std::vector<DeviceId> order;
    if (hosts->second.count(d)) {
        order.push_back(d);
    }
    for (DeviceId h : hosts->second) {
        if (h != d) {
            order.push_back(h);
        }
    }
    qit->second.fetching[item] = std::move(order);
    fetch_next(d, q, item);
}

void Simulation::Impl::fetch_next(DeviceId d, QueryId q, ItemId item)
{
    ImmRt& imm = *devs[d].imm;
    auto qit = imm.queries.find(q);
    if (qit == imm.queries.end()) {
        return;
    }
    auto f = qit->second.fetching.find(item);
    if (f == qit->second.fetching.end()) {
        return;
    }
    while (!f->second.empty()) {
        DeviceId host = f->second.front();
        f->second.erase(f->second.begin());
        if (host == d) {
            const StoredItem* s = devs[d].store.find(item);
            if (s && !s->item.expired_at(now())) {
                InfoItem copy = s->item;
                qit->second.fetching.erase(f);
                query_offer(d, q, copy);
                return;
            }
            continue;
        }
        std::uint64_t attempt = next_attempt++;
        imm.fetch_current[{q, item}] = {host, attempt};
        send(d, imm.market, host, FetchCmd{imm.market, imm.key, q, item});
        std::uint64_t token = imm.token;
        scheduler.schedule_in(2 * c.reply_window(), EventKind::timer,
                              [this, d, token, q, item, attempt] { fetch_timeout(d, token, q, item, attempt); });
        return;
    }
    qit->second.fetching.erase(f);
    imm_note(d, "fetch_failed", FieldList().add("query", q).add("item", item));
}

void Simulation::Impl::fetch_timeout(DeviceId d, std::uint64_t token, QueryId q, ItemId item, std::uint64_t attempt)
{
    ImmRt* imm = guard(d, token);
    if (!imm) {
        return;
    }
    auto cur = imm->fetch_current.find({q, item});
    if (cur == imm->fetch_current.end() || cur->second.second != attempt) {
        return;
    }
    imm_note(d, "fetch_timeout", FieldList().add("query", q).add("item", item).add("host", cur->second.first));
    imm->fetch_current.erase(cur);
    fetch_next(d, q, item);
}

void Simulation::Impl::on_fetch(DeviceId at, const FetchCmd& f)
{
    std::optional<InfoItem> found;
    const StoredItem* s = devs[at].store.find(f.item);
    if (s && !s->item.expired_at(now())) {
        found = s->item;
    }
    send(at, f.market, f.imm.device, FetchReply{f.market, f.query, f.item, at, std::move(found)});
}

void Simulation::Impl::on_fetch_reply(DeviceId at, const FetchReply& r)
{
    ImmRt* imm = imm_of(at, r.market);
    if (!imm) {
        forward_to_successor(at, r.market, r);
        return;
    }
    auto cur = imm->fetch_current.find({r.query, r.item});
    if (cur == imm->fetch_current.end() || cur->second.first != r.host) {
        return;
    }
    imm->fetch_current.erase(cur);
    auto qit = imm->queries.find(r.query);
    if (qit == imm->queries.end()) {
        return;
    }
    if (r.found) {
        qit->second.fetching.erase(r.item);
        query_offer(at, r.query, *r.found);
    } else {
        fetch_next(at, r.query, r.item);
    }
}

void Simulation::Impl::query_offer(DeviceId d, QueryId q, const InfoItem& item)
{
    ImmRt& imm = *devs[d].imm;
    auto qit = imm.queries.find(q);
    if (qit == imm.queries.end()) {
        return;
    }
    if (qit->second.planner.offer(item)) {
        imm_note(d, "query_match", FieldList().add("query", q).add("item", item.id));
    }
    flush_chunks(d, q);
}

void Simulation::Impl::flush_chunks(DeviceId d, QueryId q)
{
    ImmRt& imm = *devs[d].imm;
    auto qit = imm.queries.find(q);
    if (qit == imm.queries.end()) {
        return;
    }
    for (auto& chunk : qit->second.planner.take_ready(q)) {
        emit_chunk(d, qit->second, std::move(chunk));
    }
    if (qit->second.planner.finished()) {
        close_query(d, q);
    }
}

void Simulation::Impl::emit_chunk(DeviceId d, ResidentQuery& rq, ResultChunk chunk)
{
    ImmRt& imm = *devs[d].imm;
    chunk.meta = response_meta(imm);
    chunk.market = imm.market;
    imm_note(d, "chunk_emit",
             FieldList()
                 .add("query", chunk.query)
                 .add("seq", chunk.seq)
                 .add_list("items", ids_of(chunk.items))
                 .add("final", chunk.final ? 1 : 0)
                 .add("recipient", rq.query.initiator)
                 .add_list("meta", markets_of(chunk.meta)));
    DeviceDelivery dd;
    dd.recipient = rq.query.initiator;
    dd.candidates = plan_rendezvous(rq.query.initiator_itinerary, world.position(d), now(), world.radio_range(),
                                    c.hop_latency);
    dd.body = std::move(chunk);
    deliver_to_device(d, std::move(dd));
}

void Simulation::Impl::expire_query(DeviceId d, std::uint64_t token, QueryId q)
{
    ImmRt* imm = guard(d, token);
    if (!imm) {
        return;
    }
    auto qit = imm->queries.find(q);
    if (qit == imm->queries.end() || now() < qit->second.expires_at) {
        return;
    }
    if (!qit->second.planner.finished()) {
        emit_chunk(d, qit->second, qit->second.planner.finish(q));
    }
    close_query(d, q);
}

void Simulation::Impl::close_query(DeviceId d, QueryId q)
{
    ImmRt& imm = *devs[d].imm;
    auto qit = imm.queries.find(q);
    if (qit == imm.queries.end()) {
        return;
    }
    imm_note(d, "query_close", FieldList().add("query", q).add_list("matched", qit->second.planner.offered()));
    imm.queries.erase(qit);
    for (auto it = imm.fetch_current.begin(); it != imm.fetch_current.end();) {
        it = it->first.first == q ? imm.fetch_current.erase(it) : std::next(it);
    }
}

/// Ends every resident query early with what has been gathered so far.
void Simulation::Impl::close_all_queries(DeviceId d)
{
    ImmRt& imm = *devs[d].imm;
    std::vector<QueryId> ids;
    for (const auto& [q, rq] : imm.queries) {
        ids.push_back(q);
    }
    for (QueryId q : ids) {
        auto qit = imm.queries.find(q);
        if (!qit->second.planner.finished()) {
            emit_chunk(d, qit->second, qit->second.planner.finish(q));
        }
        close_query(d, q);
    }
}

void Simulation::Impl::offer_new_item(DeviceId d, const InfoItem& item)
{
    std::vector<QueryId> ids;
    for (const auto& [id, rq] : devs[d].imm->queries) {
        if (!rq.planner.finished() && rq.query.predicate.matches(item) && !item.expired_at(now())) {
            ids.push_back(id);
        }
    }
    for (QueryId id : ids) {
        if (devs[d].imm) {
            query_offer(d, id, item);
        }
    }
}

// ---------------------------------------------------------------------------
// Delivery to a moving device

void Simulation::Impl::deliver_to_device(DeviceId from, DeviceDelivery delivery)
{
    delivery.id = next_delivery++;
    auto dl = std::make_shared<const DeviceDelivery>(std::move(delivery));
    FieldList f;
    f.add("delivery", dl->id).add("recipient", dl->recipient).add("candidates", dl->candidates.size());
    if (const auto* chunk = std::get_if<ResultChunk>(&dl->body)) {
        f.add("query", chunk->query).add("seq", chunk->seq);
    } else {
        f.add("item", std::get<PublishOutcome>(dl->body).item);
    }
    note(from, "delivery_start", std::move(f));
    if (dl->recipient == from) {
        receive_delivery(from, *dl);
        return;
    }
    if (dl->candidates.empty()) {
        delivery_failed(from, dl, "no-itinerary");
        return;
    }
    delivery_leg(from, dl);
}

void Simulation::Impl::delivery_leg(DeviceId holder, std::shared_ptr<const DeviceDelivery> dl)
{
    const Waypoint& wp = dl->candidates[dl->attempt];
    SimTime deadline = std::max(dl->candidates.back().arrive_at, now()) + c.prediction_horizon;
    Message msg = transport.make(holder, *dl, dl->recipient);
    transport.geo_send(
        holder, std::move(msg), GeoTarget{wp.at, world.radio_range()},
        [this, dl](DeviceId at, const Message&) { delivery_arrived(at, dl); },
        [this, dl](DeviceId last, const Message&, GeoDrop why) {
            delivery_failed(last, dl, why == GeoDrop::expired ? "expired" : "holder-crashed");
        },
        deadline);
}

void Simulation::Impl::delivery_arrived(DeviceId holder, std::shared_ptr<const DeviceDelivery> dl)
{
    if (holder == dl->recipient) {
        receive_delivery(holder, *dl);
        return;
    }
    locate(holder, dl, false);
}

void Simulation::Impl::locate(DeviceId holder, std::shared_ptr<const DeviceDelivery> dl, bool waited)
{
    LocateRun run;
    run.id = next_attempt++;
    run.holder = holder;
    run.delivery = dl;
    run.waited = waited;
    std::uint64_t id = run.id;
    locates.emplace(id, std::move(run));
    note(holder, "locate", FieldList().add("delivery", dl->id).add("attempt", dl->attempt).add("run", id));
    DeviceId recipient = dl->recipient;
    Message msg = transport.make(holder, LocateProbe{dl, holder, id}, recipient);
    transport.flood(holder, std::move(msg), std::nullopt, 2, [this, recipient](DeviceId at, const Message& m) {
        if (at == recipient) {
            dispatch(at, m);
        }
    });
    // One tick past the two-hop round trip so an ack on the boundary wins.
    scheduler.schedule_in(4 * c.hop_latency + 1, EventKind::timer, [this, id] { locate_timeout(id); });
}

void Simulation::Impl::locate_timeout(std::uint64_t id)
{
    auto it = locates.find(id);
    if (it == locates.end()) {
        return;
    }
    LocateRun run = std::move(it->second);
    locates.erase(it);
    DeviceId holder = run.holder;
    auto dl = run.delivery;
    note(holder, "locate_miss", FieldList().add("delivery", dl->id).add("attempt", dl->attempt));
    const Waypoint& wp = dl->candidates[dl->attempt];
    if (!run.waited && now() < wp.arrive_at) {
        ++deliveries_waiting;
        scheduler.schedule(wp.arrive_at, EventKind::timer, [this, holder, dl] {
            --deliveries_waiting;
            if (usable(holder)) {
                locate(holder, dl, true);
            } else {
                delivery_failed(holder, dl, "holder-crashed");
            }
        });
        return;
    }
    if (dl->attempt + 1 < dl->candidates.size()) {
        auto next = std::make_shared<DeviceDelivery>(*dl);
        ++next->attempt;
        note(holder, "delivery_retry", FieldList().add("delivery", dl->id).add("attempt", next->attempt));
        delivery_leg(holder, std::move(next));
        return;
    }
    delivery_failed(holder, dl, "exhausted");
}

void Simulation::Impl::delivery_failed(DeviceId holder, std::shared_ptr<const DeviceDelivery> dl, std::string_view why)
{
    FieldList f;
    f.add("delivery", dl->id).add("recipient", dl->recipient).add("reason", why);
    if (const auto* chunk = std::get_if<ResultChunk>(&dl->body)) {
        f.add("query", chunk->query).add("seq", chunk->seq);
        note(holder, "chunk_undelivered", std::move(f));
    } else {
        f.add("item", std::get<PublishOutcome>(dl->body).item);
        note(holder, "outcome_undelivered", std::move(f));
    }
}

void Simulation::Impl::on_locate_probe(DeviceId at, const Message& msg, const LocateProbe& p)
{
    if (at != p.delivery->recipient) {
        return;
    }
    receive_delivery(at, *p.delivery);
    reply_along(at, msg.route, LocateAck{p.attempt_id, at});
}

void Simulation::Impl::on_locate_ack(DeviceId at, const LocateAck& a)
{
    auto it = locates.find(a.attempt_id);
    if (it == locates.end() || it->second.holder != at) {
        return;
    }
    note(at, "locate_ok", FieldList().add("delivery", it->second.delivery->id).add("recipient", a.recipient));
    locates.erase(it);
}

void Simulation::Impl::receive_delivery(DeviceId at, const DeviceDelivery& dd)
{
    if (at != dd.recipient) {
        return;
    }
    Dev& dev = devs[at];
    if (!dev.deliveries_seen.insert(dd.id).second) {
        note(at, "delivery_dup", FieldList().add("delivery", dd.id));
        return;
    }
    if (const auto* chunk = std::get_if<ResultChunk>(&dd.body)) {
        note(at, "chunk_delivered",
             FieldList()
                 .add("delivery", dd.id)
                 .add("query", chunk->query)
                 .add("seq", chunk->seq)
                 .add_list("items", ids_of(chunk->items))
                 .add("final", chunk->final ? 1 : 0)
                 .add("market", chunk->market)
                 .add_list("meta", markets_of(chunk->meta)));
        auto& assembler = dev.assemblers[chunk->query];
        assembler.accept(*chunk);
        std::set<MarketId> had;
        for (const auto& [id, e] : dev.directory) {
            had.insert(id);
        }
        dev.directory = merge_market_knowledge(std::move(dev.directory), chunk->meta, chunk->market, now());
        for (const auto& [id, e] : dev.directory) {
            if (had.count(id) == 0) {
                note(at, "learn", FieldList().add("market", id).add("via", chunk->market).add("delivery", dd.id));
            }
        }
        if (assembler.complete()) {
            note(at, "query_complete",
                 FieldList().add("query", chunk->query).add_list("items", ids_of(assembler.items())));
        }
        return;
    }
    const auto& outcome = std::get<PublishOutcome>(dd.body);
    note(at, "outcome_delivered",
         FieldList()
             .add("delivery", dd.id)
             .add("item", outcome.item)
             .add("market", outcome.market)
             .add("accepted", outcome.accepted ? 1 : 0));
}

} // namespace ads
