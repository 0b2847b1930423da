// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ads {

enum class EventKind : std::uint8_t {
    message_delivery,
    mobility_step,
    timer,
    fault_injection,
    workload,
};

std::string_view to_string(EventKind kind);

struct EventHandle {
    std::uint64_t seq = 0;

    bool valid() const { return seq != 0; }
};

/// Discrete-event core. Events are totally ordered by (fire_at, seq); seq is
/// the insertion counter, so equal-time events fire in scheduling order.
class Scheduler {
public:
    using Action = std::function<void()>;
    using Observer = std::function<void(SimTime, std::uint64_t, EventKind)>;

    SimTime now() const { return now_; }

    /// Throws std::logic_error when fire_at lies in the past.
    EventHandle schedule(SimTime fire_at, EventKind kind, Action action);
    EventHandle schedule_in(SimTime delay, EventKind kind, Action action)
    {
        return schedule(now_ + delay, kind, std::move(action));
    }

    /// Returns false if the event already fired or was cancelled.
    bool cancel(EventHandle handle);

    /// Fires every event with fire_at <= t, including events scheduled by
    /// handlers during the call, then sets the clock to t.
    std::size_t run_until(SimTime t);

    std::size_t pending() const { return live_.size(); }
    bool is_pending(EventHandle handle) const { return live_.count(handle.seq) != 0; }
    std::uint64_t fired() const { return fired_; }

    /// Called for every fired event; used to build replayable event traces.
    void set_observer(Observer observer) { observer_ = std::move(observer); }

private:
    struct Entry {
        SimTime fire_at;
        std::uint64_t seq;
        EventKind kind;
        Action action;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const
        {
            if (a.fire_at != b.fire_at) {
                return a.fire_at > b.fire_at;
            }
            return a.seq > b.seq;
        }
    };

    SimTime now_ = 0;
    std::uint64_t next_seq_ = 1;
    std::uint64_t fired_ = 0;
    std::vector<Entry> heap_;
    std::set<std::uint64_t> live_;
    Observer observer_;
};

/// Independent, seed-derived random streams keyed by subsystem label, so a
/// new consumer never perturbs the draws of an existing one.
class RngStreams {
public:
    explicit RngStreams(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64(std::string_view stream);
    /// Uniform in [0, 1), built from the top 53 bits of the engine output.
    double uniform(std::string_view stream);
    double uniform(std::string_view stream, double lo, double hi);
    /// Uniform integer in [lo, hi].
    std::uint64_t uniform_int(std::string_view stream, std::uint64_t lo, std::uint64_t hi);

private:
    std::mt19937_64& engine(std::string_view stream);

    std::uint64_t seed_;
    std::map<std::string, std::mt19937_64, std::less<>> engines_;
};

namespace streams {
inline constexpr std::string_view mobility = "mobility";
inline constexpr std::string_view workload = "workload";
inline constexpr std::string_view faults = "faults";
inline constexpr std::string_view layout = "layout";
} // namespace streams

} // namespace ads
