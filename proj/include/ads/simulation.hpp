// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/broker.hpp"
#include "ads/market.hpp"
#include "ads/scenario.hpp"
#include "ads/simkernel.hpp"
#include "ads/trace.hpp"
#include "ads/transport.hpp"
#include "ads/world.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace ads {

enum class Role : std::uint8_t { outside, passive, active, imm };

std::string_view to_string(Role role);

struct SimOptions {
    bool trace = true;
    /// Keep per-flood reach sets for inspection after the flood completes.
    bool keep_flood_records = false;
};

/// Result of a synchronous local query, available once it completes.
struct SyncOutcome {
    DeviceId device = kNoDevice;
    SimTime started = 0;
    SimTime completed = 0;
    std::vector<InfoItem> items;
};

/// One full run of a scenario: world, transport, and every device's broker
/// and market state machine on a single scheduler.
class Simulation {
public:
    explicit Simulation(const Scenario& scenario, SimOptions options = {});
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Runs to the scenario horizon.
    void run();
    /// Advances tick by tick to t (mobility first in every tick).
    void run_until(SimTime t);
    /// No geo packets, transmissions, or protocol exchanges outstanding.
    /// Periodic maintenance timers do not count.
    bool quiescent() const;
    /// Runs until quiescent or the limit; returns whether quiescence was hit.
    bool run_until_quiescent(SimTime limit);

    /// Schedules an extra workload event (tests, generators).
    void inject(const WorkloadEvent& event);

    const Scenario& scenario() const;
    SimTime now() const;
    const Trace& trace() const;
    World& world();
    const World& world() const;
    Scheduler& scheduler();
    Transport& transport();

    std::size_t device_count() const;
    bool alive(DeviceId device) const;
    Role role(DeviceId device) const;
    std::optional<MarketId> membership(DeviceId device) const;
    const LocalStore& store(DeviceId device) const;
    const Directory& directory(DeviceId device) const;
    /// Devices currently holding an IMM instance for the market.
    std::vector<DeviceId> imms(MarketId market) const;
    /// State of the device's IMM instance for its market, if any.
    const ImmState* imm_state(DeviceId device) const;
    const std::map<QueryId, SyncOutcome>& sync_outcomes() const;

    /// Called whenever an IMM finishes rebuilding its state from a census.
    void on_rebuild(std::function<void(DeviceId, const ImmState&)> observer);

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

} // namespace ads
