// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/broker.hpp"
#include "ads/market.hpp"
#include "ads/world.hpp"

#include <optional>
#include <set>
#include <vector>

namespace ads {

/// Immediate collection from the local broker plus, when hop_limit > 0,
/// the hop-limited neighborhood until the timeout.
struct SyncLocalQuery {
    QueryId id = 0;
    Predicate predicate;
    std::uint32_t hop_limit = 0;
    SimTime timeout = 0;

    void validate() const;

    friend bool operator==(const SyncLocalQuery&, const SyncLocalQuery&) = default;
};

/// Long-lived query that travels to a market, stays resident there, and
/// streams results back to its moving initiator.
struct AsyncSmartQuery {
    QueryId id = 0;
    Predicate predicate;
    DeviceId initiator = kNoDevice;
    Itinerary initiator_itinerary;
    std::optional<std::uint32_t> expected_results;
    SimTime active_for = 0;
    MarketId target_market = 0;

    void validate() const;
};

struct ResponseMeta {
    std::vector<DirectoryEntry> known_markets;
};

struct ResultChunk {
    QueryId query = 0;
    std::uint32_t seq = 0;
    std::vector<InfoItem> items;
    bool final = false;
    ResponseMeta meta;
    /// Market that produced the chunk.
    MarketId market = 0;
};

/// Market-side batching for one resident query. Items are deduplicated and,
/// with an expected-result count, capped at that count.
class ChunkPlanner {
public:
    ChunkPlanner(std::uint32_t chunk_size, std::optional<std::uint32_t> expected)
        : chunk_size_(std::max<std::uint32_t>(chunk_size, 1)), expected_(expected)
    {
    }

    /// Returns false when the item was already offered or the cap is reached.
    bool offer(InfoItem item);
    /// Full chunks ready to go out now. When the expected count is reached
    /// the remainder is flushed as the final chunk.
    std::vector<ResultChunk> take_ready(QueryId query);
    /// Final chunk carrying whatever is left (possibly nothing).
    ResultChunk finish(QueryId query);

    bool satisfied() const { return expected_ && accepted_ >= *expected_; }
    bool finished() const { return finished_; }
    std::uint32_t emitted_chunks() const { return next_seq_; }
    const std::set<ItemId>& offered() const { return offered_; }

private:
    ResultChunk make(QueryId query, std::size_t count, bool final);

    std::uint32_t chunk_size_;
    std::optional<std::uint32_t> expected_;
    std::uint32_t accepted_ = 0;
    std::uint32_t next_seq_ = 0;
    bool finished_ = false;
    std::set<ItemId> offered_;
    std::vector<InfoItem> buffer_;
};

/// Initiator-side reassembly keyed by chunk sequence number.
class ChunkAssembler {
public:
    /// Returns false for a duplicate chunk.
    bool accept(const ResultChunk& chunk);
    bool complete() const;
    std::vector<InfoItem> items() const;
    std::size_t chunk_count() const { return chunks_.size(); }
    std::optional<std::uint32_t> final_seq() const { return final_seq_; }

private:
    std::map<std::uint32_t, std::vector<InfoItem>> chunks_;
    std::optional<std::uint32_t> final_seq_;
};

/// Union by market id; a newer type summary replaces an older one. Entries
/// learned here are stamped with the responding market and time.
Directory merge_market_knowledge(Directory directory, const ResponseMeta& meta, MarketId via, SimTime now);

/// Rendezvous candidates for results headed to a moving device: the
/// itinerary position at the estimated arrival time (estimate refined once),
/// then every later waypoint.
std::vector<Waypoint> plan_rendezvous(const Itinerary& itinerary, Position from, SimTime now,
                                      double radio_range, SimTime hop_latency);

} // namespace ads
