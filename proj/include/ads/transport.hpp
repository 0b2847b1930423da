// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/message.hpp"
#include "ads/simkernel.hpp"
#include "ads/trace.hpp"
#include "ads/world.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace ads {

/// Geographic destination: reached once the holder is within radius of point.
struct GeoTarget {
    Position point;
    double radius = 1.0;
};

struct TransportParams {
    /// Per-hop latency L in ticks.
    SimTime hop_latency = 1;
    /// Carry handoff margin in meters.
    double carry_margin = 10.0;
    /// Carry re-evaluation period in ticks.
    SimTime carry_period = 5;
    /// Prediction horizon H in ticks.
    SimTime prediction_horizon = 60;
    /// Keep per-flood reach sets after completion (tests and oracles).
    bool keep_flood_records = false;
};

enum class UnicastOutcome : std::uint8_t { scheduled, unreachable };

struct FloodRecord {
    MsgId id = 0;
    DeviceId origin = kNoDevice;
    std::optional<Region> region;
    std::uint32_t ttl = 0;
    /// Processing devices (origin included) with the hop count they saw.
    std::map<DeviceId, std::uint32_t> reached;
    std::size_t duplicates = 0;
    std::size_t transmissions = 0;
    std::size_t outstanding = 0;
};

enum class GeoStep : std::uint8_t { delivered, forward, carry };

struct GeoDecision {
    GeoStep step = GeoStep::carry;
    DeviceId next = kNoDevice;
};

struct CarryDecision {
    bool handoff = false;
    DeviceId to = kNoDevice;
};

enum class GeoDrop : std::uint8_t { holder_crashed, expired };

/// Message movement on the unit-disk graph: one-hop unicast, bounded
/// flooding with duplicate suppression, and greedy geographic forwarding
/// that falls back to predictive carry-and-forward.
class Transport {
public:
    using Handler = std::function<void(DeviceId at, const Message& msg)>;
    using ArriveFn = std::function<void(DeviceId holder, const Message& msg)>;
    using DropFn = std::function<void(DeviceId last_holder, const Message& msg, GeoDrop reason)>;

    Transport(Scheduler& scheduler, World& world, Trace& trace, TransportParams params);

    const TransportParams& params() const { return params_; }

    Message make(DeviceId src, Payload payload, DeviceId dst = kNoDevice);

    /// Link is evaluated now; delivery happens after one hop latency even if
    /// the endpoints move apart meanwhile.
    UnicastOutcome unicast(DeviceId src, DeviceId dst, Message msg, Handler on_deliver);

    /// Floods msg from origin. With a region, only devices inside it process
    /// and rebroadcast. Each device processes a message id at most once;
    /// rebroadcast stops at ttl hops. The handler is not called for origin.
    void flood(DeviceId origin, Message msg, std::optional<Region> region, std::uint32_t ttl, Handler on_receive);
    const FloodRecord* flood_record(MsgId id) const;

    /// Greedy rule: forward to the neighbor closest to the target if it is
    /// strictly closer than best_dist (the best distance reached so far,
    /// never above the holder's own).
    GeoDecision geo_forward(DeviceId holder, const GeoTarget& target, double best_dist) const;
    /// Predictive carry: among holder and neighbors, the device whose
    /// predicted position at now + H is nearest the target; handoff only if
    /// it beats the holder by more than the carry margin.
    CarryDecision carry_select(DeviceId holder, const GeoTarget& target) const;

    /// Takes custody of msg at holder and routes it toward target. Exactly
    /// one of on_arrive / on_drop eventually runs unless the run ends first.
    void geo_send(DeviceId holder, Message msg, GeoTarget target, ArriveFn on_arrive, DropFn on_drop,
                  std::optional<SimTime> deadline = std::nullopt);

    /// Per-tick work after mobility: arrival checks, carry re-evaluation on
    /// neighbor change or every carry period, deadlines.
    void tick();
    /// Drops everything the device holds.
    void crash(DeviceId device);

    std::size_t geo_in_transit() const { return packets_.size(); }
    std::vector<MsgId> geo_held_by(DeviceId device) const;
    std::optional<DeviceId> geo_holder(MsgId id) const;
    /// Scheduled-but-undelivered transmissions.
    std::size_t in_flight() const { return in_flight_; }
    const std::map<std::string, std::uint64_t, std::less<>>& transmissions() const { return tx_by_kind_; }

private:
    struct GeoPacket {
        Message msg;
        GeoTarget target;
        DeviceId holder = kNoDevice;
        bool in_flight = false;
        bool carrying = false;
        double best = 0.0;
        SimTime next_eval = 0;
        std::vector<DeviceId> seen_neighbors;
        ArriveFn on_arrive;
        DropFn on_drop;
        std::optional<SimTime> deadline;
    };

    void transmit(MsgId flood_id, DeviceId from, Message msg);
    void deliver_flood(MsgId flood_id, DeviceId from, const std::vector<DeviceId>& receivers, Message msg);
    void advance(MsgId id);
    void hop(GeoPacket& p, DeviceId to, bool carry);
    void count_tx(std::string_view kind);

    Scheduler& scheduler_;
    World& world_;
    Trace& trace_;
    TransportParams params_;
    MsgId next_id_ = 1;
    std::size_t in_flight_ = 0;
    std::map<MsgId, FloodRecord> floods_;
    std::map<MsgId, Handler> flood_handlers_;
    std::map<MsgId, GeoPacket> packets_;
    std::map<std::string, std::uint64_t, std::less<>> tx_by_kind_;
};

} // namespace ads
