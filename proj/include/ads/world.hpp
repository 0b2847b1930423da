// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/simkernel.hpp"
#include "ads/types.hpp"

#include <array>
#include <optional>
#include <variant>
#include <vector>

namespace ads {

struct Waypoint {
    SimTime arrive_at = 0;
    Position at;

    friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

enum class ItinerarySource : std::uint8_t { declared, inferred };

/// Planned movement as timed waypoints. Between waypoints the device moves in
/// a straight line at constant speed; before the first and after the last it
/// sits at that waypoint.
struct Itinerary {
    std::vector<Waypoint> waypoints;
    ItinerarySource source = ItinerarySource::declared;

    /// Throws std::invalid_argument unless waypoint times strictly increase.
    void validate() const;
    Position position_at(SimTime t) const;
    bool empty() const { return waypoints.empty(); }

    friend bool operator==(const Itinerary&, const Itinerary&) = default;
};

struct Stationary {
    friend bool operator==(const Stationary&, const Stationary&) = default;
};

struct RandomWaypoint {
    double speed_min = 1.0;
    double speed_max = 5.0;
    SimTime pause_min = 0;
    SimTime pause_max = 10;

    friend bool operator==(const RandomWaypoint&, const RandomWaypoint&) = default;
};

struct Scripted {
    Itinerary itinerary;

    friend bool operator==(const Scripted&, const Scripted&) = default;
};

using MobilityModel = std::variant<Stationary, RandomWaypoint, Scripted>;

enum class Confidence : std::uint8_t { declared, inferred };

struct Prediction {
    Position position;
    Confidence confidence = Confidence::inferred;
};

/// Positions, movement and unit-disk connectivity for one simulation.
class World {
public:
    World(Bounds bounds, double radio_range);

    /// Scripted devices without an explicit declared itinerary use their
    /// script, anchored at the initial position, as the declared one.
    DeviceId add_device(Position initial, MobilityModel model,
                        std::optional<Itinerary> declared = std::nullopt);

    std::size_t size() const { return devices_.size(); }
    const Bounds& bounds() const { return bounds_; }
    double radio_range() const { return range_; }
    SimTime now() const { return now_; }

    /// Advances every live device by dt ticks and records an observation.
    /// Returns the devices whose random-waypoint leg changed (for tracing).
    std::vector<DeviceId> step_mobility(SimTime dt, RngStreams& rng);

    const Position& position(DeviceId id) const;
    /// Teleport, used by tests and fault scripts. Records an observation.
    void set_position(DeviceId id, Position p);

    /// All other live devices within the closed radio disk, ascending by id.
    /// Throws std::out_of_range for unknown ids.
    const std::vector<DeviceId>& neighbors(DeviceId id) const;
    bool linked(DeviceId a, DeviceId b) const;

    bool alive(DeviceId id) const;
    void set_alive(DeviceId id, bool alive);

    Prediction predict_position(DeviceId id, SimTime at) const;
    /// Declared itinerary if any, else one inferred from tracking with
    /// waypoints at now + k*horizon for k = 0..3.
    Itinerary itinerary_for(DeviceId id, SimTime horizon) const;
    const std::optional<Itinerary>& declared_itinerary(DeviceId id) const;

    /// Appends a tracked sample (keeps the last three).
    void observe(DeviceId id, SimTime t, Position p);

    const MobilityModel& mobility(DeviceId id) const;

    static constexpr std::size_t kHistory = 3;

private:
    struct Sample {
        SimTime t;
        Position p;
    };
    struct DeviceState {
        Position pos;
        MobilityModel model;
        std::optional<Itinerary> declared;
        bool alive = true;
        // Random-waypoint leg.
        std::optional<Position> target;
        double speed = 0.0;
        SimTime pause_until = 0;
        std::array<Sample, kHistory> history{};
        std::size_t samples = 0;
    };

    DeviceState& at(DeviceId id);
    const DeviceState& at(DeviceId id) const;
    void invalidate() const { cache_valid_ = false; }
    void rebuild_cache() const;

    Bounds bounds_;
    double range_;
    SimTime now_ = 0;
    std::vector<DeviceState> devices_;
    mutable bool cache_valid_ = false;
    mutable std::vector<std::vector<DeviceId>> neighbor_cache_;
};

} // namespace ads
