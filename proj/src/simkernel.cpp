// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/simkernel.hpp"

#include <algorithm>
#include <stdexcept>

namespace ads {

std::string_view to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::message_delivery:
        return "message-delivery";
    case EventKind::mobility_step:
        return "mobility-step";
    case EventKind::timer:
        return "timer";
    case EventKind::fault_injection:
        return "fault-injection";
    case EventKind::workload:
        return "workload";
    }
    return "unknown";
}

EventHandle Scheduler::schedule(SimTime fire_at, EventKind kind, Action action)
{
    if (fire_at < now_) {
        throw std::logic_error("event scheduled at t=" + std::to_string(fire_at) +
                               " before current clock t=" + std::to_string(now_));
    }
    std::uint64_t seq = next_seq_++;
    heap_.push_back(Entry{fire_at, seq, kind, std::move(action)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    live_.insert(seq);
    return EventHandle{seq};
}

bool Scheduler::cancel(EventHandle handle)
{
    // The heap entry stays behind and is skipped when popped.
    return live_.erase(handle.seq) != 0;
}

std::size_t Scheduler::run_until(SimTime t)
{
    if (t < now_) {
        throw std::logic_error("run_until target precedes current clock");
    }
    std::size_t count = 0;
    while (!heap_.empty() && heap_.front().fire_at <= t) {
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Entry entry = std::move(heap_.back());
        heap_.pop_back();
        if (live_.erase(entry.seq) == 0) {
            continue;
        }
        now_ = entry.fire_at;
        ++count;
        ++fired_;
        if (observer_) {
            observer_(entry.fire_at, entry.seq, entry.kind);
        }
        entry.action();
    }
    now_ = t;
    return count;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::mt19937_64& RngStreams::engine(std::string_view stream)
{
    auto it = engines_.find(stream);
    if (it == engines_.end()) {
        std::uint64_t derived = splitmix64(seed_ ^ splitmix64(fnv1a(stream)));
        it = engines_.emplace(std::string(stream), std::mt19937_64(derived)).first;
    }
    return it->second;
}

std::uint64_t RngStreams::next_u64(std::string_view stream)
{
    return engine(stream)();
}

double RngStreams::uniform(std::string_view stream)
{
    return static_cast<double>(next_u64(stream) >> 11) * 0x1.0p-53;
}

double RngStreams::uniform(std::string_view stream, double lo, double hi)
{
    return lo + (hi - lo) * uniform(stream);
}

std::uint64_t RngStreams::uniform_int(std::string_view stream, std::uint64_t lo, std::uint64_t hi)
{
    if (hi <= lo) {
        return lo;
    }
    std::uint64_t span = hi - lo + 1;
    if (span == 0) {
        return next_u64(stream);
    }
    // Rejection sampling keeps the draw unbiased and platform independent.
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
        x = next_u64(stream);
    } while (x >= limit);
    return lo + x % span;
}

} // namespace ads
