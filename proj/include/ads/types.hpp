// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace ads {

/// Simulation time in whole ticks. One tick is one simulated second.
using SimTime = std::uint64_t;

inline constexpr SimTime kForever = std::numeric_limits<SimTime>::max();

using DeviceId = std::uint32_t;
using MarketId = std::uint32_t;
using ItemId = std::uint64_t;
using MsgId = std::uint64_t;
using QueryId = std::uint64_t;
using ParcelId = std::uint64_t;

inline constexpr DeviceId kNoDevice = std::numeric_limits<DeviceId>::max();

struct Position {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

inline double distance(const Position& a, const Position& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double distance_sq(const Position& a, const Position& b)
{
    double dx = a.x - b.x;
    double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

/// Axis-aligned world rectangle anchored at the origin.
struct Bounds {
    double width = 1000.0;
    double height = 1000.0;

    Position clamp(Position p) const
    {
        p.x = std::clamp(p.x, 0.0, width);
        p.y = std::clamp(p.y, 0.0, height);
        return p;
    }
    bool contains(const Position& p) const
    {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Closed disk. Used for market areas and geographic delivery targets.
struct Region {
    Position center;
    double radius = 0.0;

    bool contains(const Position& p) const { return distance_sq(p, center) <= radius * radius; }
};

std::string format_position(const Position& p);

} // namespace ads
