// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/broker.hpp"
#include "ads/market.hpp"
#include "ads/query.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace ads {

// Protocol payloads. Field lists double as the documentation of each
// message kind; see docs/protocol.md for the exchange sequences.

struct ImmProbe {
    MarketId market = 0;
};
struct ImmProbeReply {
    MarketId market = 0;
    ElectionKey imm;
};
struct ImmAnnounce {
    MarketId market = 0;
    ElectionKey imm;
};
struct CapacityReport {
    MarketId market = 0;
    DeviceId device = kNoDevice;
    std::uint32_t free = 0;
};
struct CensusRequest {
    MarketId market = 0;
    ElectionKey imm;
    std::uint64_t round = 0;
};
struct CensusReply {
    MarketId market = 0;
    std::uint64_t round = 0;
    CensusReport report;
};

struct PublishSubmit {
    InfoItem item;
    DeviceId publisher = kNoDevice;
    Itinerary publisher_itinerary;
};
struct QuerySubmit {
    AsyncSmartQuery query;
};
enum class SignOffReason : std::uint8_t { graceful_leave, graceful_shutdown };
std::string_view to_string(SignOffReason reason);
struct SignOff {
    DeviceId device = kNoDevice;
    SignOffReason reason = SignOffReason::graceful_leave;
    std::vector<ItemId> replicas;
};
/// Assigned items handed back by a departing member, with its sign-off.
struct ItemReturn {
    DeviceId from = kNoDevice;
    std::vector<StoredItem> items;
    std::optional<SignOff> sign_off;
};
using ImmRequestBody = std::variant<PublishSubmit, ItemReturn, QuerySubmit, SignOff>;
std::string_view request_name(const ImmRequestBody& body);

/// Anything headed for a market's IMM from wherever it originated.
struct ToMarket {
    MarketId market = 0;
    /// Non-zero when the body carries items under custody.
    ParcelId parcel = 0;
    ImmRequestBody body;
};
/// In-market leg of a ToMarket delivery, relayed by a member.
struct ImmRequest {
    MarketId market = 0;
    std::uint64_t relay_id = 0;
    DeviceId relay = kNoDevice;
    ParcelId parcel = 0;
    ImmRequestBody body;
};
struct ImmRequestAck {
    MarketId market = 0;
    std::uint64_t relay_id = 0;
};

struct StoreCmd {
    MarketId market = 0;
    ElectionKey imm;
    InfoItem item;
    bool replica = false;
};
struct StoreAck {
    MarketId market = 0;
    ItemId item = 0;
    DeviceId device = kNoDevice;
    std::uint32_t free = 0;
    bool stored = false;
};
struct ReplicateCmd {
    MarketId market = 0;
    ElectionKey imm;
    ItemId item = 0;
    DeviceId target = kNoDevice;
};
struct ReplicateFail {
    MarketId market = 0;
    ItemId item = 0;
    DeviceId source = kNoDevice;
    DeviceId target = kNoDevice;
};
struct UnstoreCmd {
    MarketId market = 0;
    ItemId item = 0;
};
struct FetchCmd {
    MarketId market = 0;
    ElectionKey imm;
    QueryId query = 0;
    ItemId item = 0;
};
struct FetchReply {
    MarketId market = 0;
    QueryId query = 0;
    ItemId item = 0;
    DeviceId host = kNoDevice;
    std::optional<InfoItem> found;
};
struct HeartbeatPing {
    MarketId market = 0;
    ElectionKey imm;
    std::uint64_t round = 0;
};
struct HeartbeatAck {
    MarketId market = 0;
    std::uint64_t round = 0;
    CensusReport report;
};
struct CenterSeekRequest {
    MarketId market = 0;
    ElectionKey imm;
    std::uint64_t round = 0;
};
struct CenterSeekReply {
    MarketId market = 0;
    std::uint64_t round = 0;
    DeviceId device = kNoDevice;
    Position pos;
    std::uint32_t free = 0;
};

/// Market-side bookkeeping for one resident remote query.
struct ResidentQuery {
    AsyncSmartQuery query;
    SimTime expires_at = 0;
    ChunkPlanner planner{4, std::nullopt};
    /// Items being pulled from hosts, with the hosts still left to try.
    std::map<ItemId, std::vector<DeviceId>> fetching;
};

/// Item waiting at the IMM for placement (new, returned, or refused for
/// lack of capacity so far).
struct PendingPlacement {
    InfoItem item;
    ParcelId parcel = 0;
    std::set<DeviceId> tried;
    /// Hosts asked to store a copy, with the attempt that asked them.
    std::map<DeviceId, std::uint64_t> awaiting;
    /// Set for new publications; the outcome goes back to the publisher.
    std::optional<DeviceId> publisher;
    Itinerary publisher_itinerary;
    bool outcome_sent = false;
};

/// Everything an IMM hands to its successor.
struct ImmSnapshot {
    ImmState state;
    std::vector<ResidentQuery> queries;
    std::map<ItemId, PendingPlacement> pending;
    std::set<std::uint64_t> seen_relays;
    /// Requests accepted but not yet processed.
    std::vector<ImmRequest> queued;
};

struct PublishOutcome {
    ItemId item = 0;
    MarketId market = 0;
    bool accepted = false;
};

/// Payload for a moving recipient, routed through rendezvous candidates.
struct DeviceDelivery {
    std::uint64_t id = 0;
    DeviceId recipient = kNoDevice;
    std::vector<Waypoint> candidates;
    std::size_t attempt = 0;
    std::variant<ResultChunk, PublishOutcome> body;
};
struct ImmHandoff {
    std::shared_ptr<const ImmSnapshot> snapshot;
    DeviceId from = kNoDevice;
};
struct ImmStateTransfer {
    std::shared_ptr<const ImmSnapshot> snapshot;
    DeviceId from = kNoDevice;
};
struct LocateProbe {
    std::shared_ptr<const DeviceDelivery> delivery;
    DeviceId holder = kNoDevice;
    std::uint64_t attempt_id = 0;
};
struct LocateAck {
    std::uint64_t attempt_id = 0;
    DeviceId recipient = kNoDevice;
};
struct SyncProbe {
    QueryId query = 0;
    DeviceId origin = kNoDevice;
    Predicate predicate;
};
struct SyncReply {
    QueryId query = 0;
    DeviceId responder = kNoDevice;
    std::vector<InfoItem> items;
};

using Payload = std::variant<ImmProbe, ImmProbeReply, ImmAnnounce, CapacityReport, CensusRequest, CensusReply,
                             ToMarket, ImmRequest, ImmRequestAck, StoreCmd, StoreAck, ReplicateCmd,
                             ReplicateFail, UnstoreCmd, FetchCmd, FetchReply, HeartbeatPing, HeartbeatAck,
                             CenterSeekRequest, CenterSeekReply, ImmHandoff, ImmStateTransfer, DeviceDelivery,
                             LocateProbe, LocateAck, SyncProbe, SyncReply>;

std::string_view kind_name(const Payload& payload);

struct Message {
    MsgId id = 0;
    DeviceId src = kNoDevice;
    /// kNoDevice addresses every recipient in scope.
    DeviceId dst = kNoDevice;
    std::uint32_t hop_count = 0;
    std::uint32_t ttl = 0;
    /// Devices traversed so far, origin first.
    std::vector<DeviceId> route;
    std::shared_ptr<const Payload> payload;

    template <typename T>
    const T* as() const
    {
        return payload ? std::get_if<T>(payload.get()) : nullptr;
    }
    std::string_view kind() const { return payload ? kind_name(*payload) : "empty"; }
};

} // namespace ads
