// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/broker.hpp"
#include "ads/market.hpp"
#include "ads/publish.hpp"
#include "ads/world.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ads {

enum class ReplicationStrategy : std::uint8_t { signoff, periodic };

std::string_view to_string(ReplicationStrategy strategy);
std::optional<ReplicationStrategy> parse_strategy(std::string_view text);

/// Protocol timing and sizing knobs. Every duration is in ticks.
struct Constants {
    SimTime t_probe = 5;
    SimTime t_center = 10;
    SimTime t_heartbeat = 30;
    /// How long a relay waits for the IMM to confirm a request.
    SimTime t_ack = 10;
    SimTime hop_latency = 1;
    /// Hop bound for intra-market floods.
    std::uint32_t ttl = 16;
    std::uint32_t chunk_size = 4;
    double carry_margin = 10.0;
    SimTime carry_period = 5;
    SimTime prediction_horizon = 60;
    SimTime sweep_period = 60;
    ReplicationStrategy strategy = ReplicationStrategy::signoff;

    /// Collection window for census, heartbeat and center-seek replies: one
    /// flood out plus one flood back.
    SimTime reply_window() const { return 2 * hop_latency * ttl; }

    friend bool operator==(const Constants&, const Constants&) = default;
};

struct DeviceSpec {
    DeviceId id = 0;
    std::uint32_t capacity = 10;
    /// nullopt places the device uniformly at random (layout stream).
    std::optional<Position> position;
    MobilityModel mobility = Stationary{};
    std::optional<Itinerary> declared;
    std::vector<MarketId> knows;

    friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

enum class Verb : std::uint8_t { publish, put, query, sync, crash, shutdown, leave };

std::string_view to_string(Verb verb);

struct WorkloadEvent {
    SimTime at = 0;
    Verb verb = Verb::publish;
    DeviceId device = 0;
    // publish, put
    InfoItem item;
    SelectionPolicy policy = SelectionPolicy::nearest_market;
    // publish (explicit choice) and query (target)
    std::optional<MarketId> market;
    // query, sync
    QueryId query = 0;
    Predicate predicate;
    std::uint32_t hop_limit = 0;
    SimTime timeout = 0;
    SimTime active_for = 0;
    std::optional<std::uint32_t> expected;

    friend bool operator==(const WorkloadEvent&, const WorkloadEvent&) = default;
};

struct Scenario {
    std::uint64_t seed = 1;
    Bounds bounds;
    double range = 100.0;
    SimTime horizon = 1000;
    Constants constants;
    std::vector<MarketSpec> markets;
    std::vector<DeviceSpec> devices;
    /// Sorted by time; equal times keep file order.
    std::vector<WorkloadEvent> workload;

    const MarketSpec* market(MarketId id) const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::size_t line, const std::string& what);
    /// 0 for semantic errors that are not tied to one line.
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

Scenario parse_scenario(std::istream& in);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);
/// Checks references and value ranges; throws ScenarioError.
void validate_scenario(const Scenario& scenario);
void write_scenario(std::ostream& out, const Scenario& scenario);
std::string scenario_to_text(const Scenario& scenario);

/// Sets one scenario value by dotted key (seed, range, horizon, or a
/// constant name) from text. Used by parameter sweeps. Throws ScenarioError.
void apply_override(Scenario& scenario, const std::string& key, const std::string& value);

} // namespace ads
