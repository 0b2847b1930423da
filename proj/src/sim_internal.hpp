// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/message.hpp"
#include "ads/publish.hpp"
#include "ads/query.hpp"
#include "ads/simulation.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

namespace ads {

/// Items in custody outside any store: in geo transit, at a relay, or
/// waiting at an IMM for placement.
struct Parcel {
    ParcelId id = 0;
    std::vector<ItemId> items;
    DeviceId holder = kNoDevice;
};

/// A ToMarket payload that reached the market and is being handed to the
/// IMM by the device it arrived at.
struct Relay {
    std::uint64_t id = 0;
    DeviceId device = kNoDevice;
    ToMarket request;
    std::uint32_t attempts = 0;
    std::uint64_t attempt = 0;
};

enum class ProbePurpose : std::uint8_t { join, relay };

struct ProbeRun {
    std::uint64_t id = 0;
    DeviceId device = kNoDevice;
    MarketId market = 0;
    ProbePurpose purpose = ProbePurpose::join;
    std::uint64_t relay = 0;
    std::vector<ElectionKey> replies;
};

/// One IMM incarnation. The token changes with every incarnation so timers
/// of a deactivated instance can never act.
struct ImmRt {
    std::uint64_t token = 0;
    MarketId market = 0;
    ElectionKey key;
    bool established = false;
    ImmState state;
    std::map<QueryId, ResidentQuery> queries;
    std::map<ItemId, PendingPlacement> pending;
    std::set<std::uint64_t> seen_relays;
    std::vector<ImmRequest> queued;

    std::uint64_t census_round = 0;
    std::vector<CensusReport> census;
    std::vector<std::shared_ptr<const ImmSnapshot>> absorbed;

    struct HbRound {
        std::set<DeviceId> expected;
        std::map<DeviceId, CensusReport> acks;
    };
    /// Rounds may overlap when the reply window exceeds the heartbeat period.
    std::map<std::uint64_t, HbRound> hb_rounds;

    std::uint64_t seek_round = 0;
    bool seek_open = false;
    std::vector<CenterSeekReply> seek_replies;

    std::optional<SimTime> last_reannounce;
    /// Host currently asked for (query, item), with the attempt id.
    std::map<std::pair<QueryId, ItemId>, std::pair<DeviceId, std::uint64_t>> fetch_current;
};

struct Dev {
    DeviceId id = 0;
    LocalStore store;
    Directory directory;
    bool opted_out = false;
    bool shutting_down = false;
    std::optional<MarketId> member;
    Role role = Role::outside;
    std::map<MarketId, std::uint32_t> known_epoch;
    std::map<MarketId, ElectionKey> known_imm;
    std::unique_ptr<ImmRt> imm;
    std::map<MarketId, DeviceId> successor;
    std::optional<std::uint64_t> joining;
    std::map<QueryId, ChunkAssembler> assemblers;
    std::set<std::uint64_t> deliveries_seen;
};

struct SyncRun {
    QueryId id = 0;
    DeviceId device = kNoDevice;
    SimTime started = 0;
    SimTime deadline = 0;
    std::map<ItemId, InfoItem> items;
    bool deferred = false;
};

struct LocateRun {
    std::uint64_t id = 0;
    DeviceId holder = kNoDevice;
    std::shared_ptr<const DeviceDelivery> delivery;
    bool waited = false;
};

struct Simulation::Impl {
    Impl(const Scenario& scenario, SimOptions options);

    // simulation.cpp
    SimTime now() const { return scheduler.now(); }
    void note(DeviceId device, std::string kind, FieldList fields = {});
    void schedule_ticks(SimTime until);
    void tick();
    void check_membership(DeviceId d);
    void update_role(DeviceId d);
    std::optional<MarketId> market_at(DeviceId d) const;
    const MarketSpec& spec(MarketId m) const { return markets.at(m); }
    bool inside(DeviceId d, MarketId m) const;
    bool usable(DeviceId d) const;
    void run_workload(const WorkloadEvent& ev);
    void crash(DeviceId d);
    void power_off(DeviceId d);
    void sweep();
    bool quiescent() const;

    /// Message to one device, via an addressed flood of the market region
    /// (or one hop when the sender is outside the region).
    void send(DeviceId from, MarketId m, DeviceId to, Payload payload);
    /// Region flood to every device in the market.
    void broadcast(DeviceId from, MarketId m, Payload payload);
    void dispatch(DeviceId at, const Message& msg);
    /// Unicast chain back along a flood route.
    void reply_along(DeviceId from, std::vector<DeviceId> route, Payload payload);
    void reply_step(DeviceId holder, Message msg, std::shared_ptr<const std::vector<DeviceId>> path,
                    std::size_t index);
    void maybe_power_off(DeviceId d);

    // custody ledger
    void copy_added(ItemId id);
    void copy_removed(ItemId id, std::string_view cause);
    bool store_item(DeviceId d, const InfoItem& item, bool replica, bool assigned);
    void unstore_item(DeviceId d, ItemId id, std::string_view cause);
    ParcelId open_parcel(DeviceId holder, const std::vector<InfoItem>& items);
    void move_parcel(ParcelId p, DeviceId to);
    void close_parcel(ParcelId p, std::string_view cause);
    void drop_parcels_at(DeviceId d);
    /// Replaces one multi-item parcel by one parcel per item.
    std::map<ItemId, ParcelId> split_parcel(ParcelId p);

    // sim_market.cpp
    void enter_market(DeviceId d, MarketId m);
    void exit_market(DeviceId d, SignOffReason reason);
    void start_probe(DeviceId d, MarketId m, ProbePurpose purpose, std::uint64_t relay);
    void finish_probe(std::uint64_t probe);
    void on_probe(DeviceId at, const Message& msg, const ImmProbe& p);
    void on_probe_reply(DeviceId at, const ImmProbeReply& p);
    void learn_imm(DeviceId d, MarketId m, const ElectionKey& key);
    ImmRt* imm_of(DeviceId d, MarketId m);
    ImmRt* guard(DeviceId d, std::uint64_t token);
    /// market, epoch and token of the live instance, for IMM action records.
    FieldList imm_fields(const ImmRt& imm) const;
    void imm_note(DeviceId d, std::string kind, FieldList extra = {});
    bool forward_to_successor(DeviceId at, MarketId m, Payload payload);
    /// Re-injects what a snapshot carries when no IMM can take it.
    void salvage(DeviceId d, const ImmSnapshot& snap);
    void become_imm(DeviceId d, MarketId m);
    void on_census_request(DeviceId at, const CensusRequest& c);
    void on_census_reply(DeviceId at, const CensusReply& c);
    void finalize_census(DeviceId d);
    CensusReport report_of(DeviceId d) const;
    void bump_epoch(DeviceId d, std::uint32_t seen);
    void announce(DeviceId d);
    void on_announce(DeviceId at, const ImmAnnounce& a);
    void contact(DeviceId d, const ElectionKey& other);
    void deactivate(DeviceId d, std::string_view reason, DeviceId successor);
    std::shared_ptr<ImmSnapshot> snapshot_of(DeviceId d);
    void on_transfer(DeviceId at, std::shared_ptr<const ImmSnapshot> snap, DeviceId from);
    void on_handoff(DeviceId at, const ImmHandoff& h);
    void absorb(DeviceId d, const ImmSnapshot& snap);
    void start_periodic(DeviceId d);
    void center_tick(DeviceId d, std::uint64_t token);
    void on_center_seek(DeviceId at, const CenterSeekRequest& c);
    void on_center_seek_reply(DeviceId at, const CenterSeekReply& r);
    void close_center_seek(DeviceId d, std::uint64_t token, std::uint64_t round);
    bool hand_off(DeviceId d, DeviceId to);
    void heartbeat_tick(DeviceId d, std::uint64_t token);
    void on_heartbeat(DeviceId at, const HeartbeatPing& h);
    void on_heartbeat_ack(DeviceId at, const HeartbeatAck& a);
    void close_heartbeat(DeviceId d, std::uint64_t token, std::uint64_t round);
    void prune(DeviceId d);
    void absorb_report(DeviceId d, const CensusReport& report);
    void remove_member(DeviceId d, DeviceId gone, std::string_view reason);

    void ship(DeviceId holder, MarketId m, ToMarket request);
    void relay_to_imm(DeviceId x, ToMarket request);
    void relay_send(std::uint64_t relay);
    void relay_timeout(std::uint64_t relay, std::uint64_t attempt);
    void relay_done(std::uint64_t relay);
    void on_imm_request(DeviceId at, const ImmRequest& r);
    void on_request_ack(DeviceId at, const ImmRequestAck& a);
    void accept_request(DeviceId d, const ImmRequest& r);
    void handle_request(DeviceId d, const ImmRequest& r);
    void on_capacity_report(DeviceId at, const CapacityReport& c);

    void ensure_degree(DeviceId d, ItemId item, bool repair);
    PendingPlacement& placement_for(ImmRt& imm, const InfoItem& item);
    void place(DeviceId d, ItemId item);
    void placement_timeout(DeviceId d, std::uint64_t token, ItemId item, DeviceId host, std::uint64_t attempt);
    void close_placement(DeviceId d, ItemId item, std::string_view cause);
    void on_store_cmd(DeviceId at, const StoreCmd& s);
    void on_store_ack(DeviceId at, const StoreAck& a);
    void on_replicate_cmd(DeviceId at, const ReplicateCmd& r);
    void on_replicate_fail(DeviceId at, const ReplicateFail& f);
    void on_unstore(DeviceId at, const UnstoreCmd& u);
    void send_outcome(DeviceId d, PendingPlacement& p, bool accepted);
    void retry_orphans(DeviceId d);
    void forget_expired(DeviceId d);

    // sim_publish.cpp
    void publish(const WorkloadEvent& ev);
    void put(const WorkloadEvent& ev);

    // sim_query.cpp
    void run_sync(const WorkloadEvent& ev);
    void on_sync_probe(DeviceId at, const Message& msg, const SyncProbe& p);
    void on_sync_reply(DeviceId at, const SyncReply& r);
    void sync_deadline(QueryId q);
    void launch_async(const WorkloadEvent& ev);
    void register_query(DeviceId d, const AsyncSmartQuery& q);
    void query_offer(DeviceId d, QueryId q, const InfoItem& item);
    void start_fetch(DeviceId d, QueryId q, ItemId item);
    void fetch_next(DeviceId d, QueryId q, ItemId item);
    void fetch_timeout(DeviceId d, std::uint64_t token, QueryId q, ItemId item, std::uint64_t attempt);
    void emit_chunk(DeviceId d, ResidentQuery& rq, ResultChunk chunk);
    void on_fetch(DeviceId at, const FetchCmd& f);
    void on_fetch_reply(DeviceId at, const FetchReply& r);
    void flush_chunks(DeviceId d, QueryId q);
    void expire_query(DeviceId d, std::uint64_t token, QueryId q);
    void close_query(DeviceId d, QueryId q);
    void close_all_queries(DeviceId d);
    void offer_new_item(DeviceId d, const InfoItem& item);
    void deliver_to_device(DeviceId from, DeviceDelivery delivery);
    void delivery_leg(DeviceId holder, std::shared_ptr<const DeviceDelivery> delivery);
    void delivery_arrived(DeviceId holder, std::shared_ptr<const DeviceDelivery> delivery);
    void locate(DeviceId holder, std::shared_ptr<const DeviceDelivery> delivery, bool waited);
    void locate_timeout(std::uint64_t run);
    void delivery_failed(DeviceId holder, std::shared_ptr<const DeviceDelivery> delivery, std::string_view why);
    void on_locate_probe(DeviceId at, const Message& msg, const LocateProbe& p);
    void on_locate_ack(DeviceId at, const LocateAck& a);
    void receive_delivery(DeviceId at, const DeviceDelivery& d);
    ResponseMeta response_meta(const ImmRt& imm) const;

    Scenario scenario;
    SimOptions options;
    Constants c;
    RngStreams rng;
    Scheduler scheduler;
    World world;
    Trace trace;
    Transport transport;
    std::map<MarketId, MarketSpec> markets;
    std::vector<Dev> devs;

    SimTime ticks_until = 0;
    std::uint64_t next_relay = 1;
    std::uint64_t next_parcel = 1;
    std::uint64_t next_probe = 1;
    std::uint64_t next_token = 1;
    std::uint64_t next_attempt = 1;
    std::uint64_t next_delivery = 1;
    std::uint64_t next_round = 1;

    std::map<std::uint64_t, Relay> relays;
    std::map<std::uint64_t, ProbeRun> probes;
    std::map<ParcelId, Parcel> parcels;
    std::map<QueryId, SyncRun> syncs;
    std::map<QueryId, SyncOutcome> sync_outcomes;
    std::map<std::uint64_t, LocateRun> locates;
    std::size_t deliveries_waiting = 0;
    std::set<DeviceId> powering_off;

    /// Ground truth used only for loss accounting: live copies per item,
    /// counting stored copies and parcels.
    std::map<ItemId, std::int64_t> copies;
    std::map<ItemId, InfoItem> catalog;

    std::function<void(DeviceId, const ImmState&)> rebuild_observer;
};

} // namespace ads
