// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/query.hpp"

#include <cmath>
#include <stdexcept>

namespace ads {

void SyncLocalQuery::validate() const
{
    if (hop_limit > 0 && timeout == 0) {
        throw std::invalid_argument("sync query " + std::to_string(id) + ": timeout must be positive with hop_limit > 0");
    }
}

void AsyncSmartQuery::validate() const
{
    if (initiator == kNoDevice) {
        throw std::invalid_argument("async query " + std::to_string(id) + ": initiator is mandatory");
    }
    if (initiator_itinerary.empty()) {
        throw std::invalid_argument("async query " + std::to_string(id) + ": initiator itinerary is mandatory");
    }
    initiator_itinerary.validate();
    if (active_for == 0) {
        throw std::invalid_argument("async query " + std::to_string(id) + ": active_for must be positive");
    }
}

bool ChunkPlanner::offer(InfoItem item)
{
    if (finished_ || satisfied() || !offered_.insert(item.id).second) {
        return false;
    }
    ++accepted_;
    buffer_.push_back(std::move(item));
    return true;
}

ResultChunk ChunkPlanner::make(QueryId query, std::size_t count, bool final)
{
    ResultChunk chunk;
    chunk.query = query;
    chunk.seq = next_seq_++;
    chunk.final = final;
    chunk.items.assign(std::make_move_iterator(buffer_.begin()),
                       std::make_move_iterator(buffer_.begin() + static_cast<std::ptrdiff_t>(count)));
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(count));
    if (final) {
        finished_ = true;
    }
    return chunk;
}

std::vector<ResultChunk> ChunkPlanner::take_ready(QueryId query)
{
    std::vector<ResultChunk> out;
    if (finished_) {
        return out;
    }
    while (buffer_.size() >= chunk_size_) {
        bool last = satisfied() && buffer_.size() == chunk_size_;
        out.push_back(make(query, chunk_size_, last));
        if (last) {
            return out;
        }
    }
    if (satisfied()) {
        out.push_back(make(query, buffer_.size(), true));
    }
    return out;
}

ResultChunk ChunkPlanner::finish(QueryId query)
{
    if (finished_) {
        throw std::logic_error("chunk planner already finished");
    }
    return make(query, buffer_.size(), true);
}

bool ChunkAssembler::accept(const ResultChunk& chunk)
{
    if (!chunks_.emplace(chunk.seq, chunk.items).second) {
        return false;
    }
    if (chunk.final) {
        final_seq_ = chunk.seq;
    }
    return true;
}

bool ChunkAssembler::complete() const
{
    return final_seq_ && chunks_.size() == *final_seq_ + 1;
}

std::vector<InfoItem> ChunkAssembler::items() const
{
    std::vector<InfoItem> out;
    std::set<ItemId> seen;
    for (const auto& [seq, items] : chunks_) {
        for (const auto& item : items) {
            if (seen.insert(item.id).second) {
                out.push_back(item);
            }
        }
    }
    return out;
}

Directory merge_market_knowledge(Directory directory, const ResponseMeta& meta, MarketId via, SimTime now)
{
    for (const auto& entry : meta.known_markets) {
        auto it = directory.find(entry.spec.id);
        if (it == directory.end()) {
            DirectoryEntry learned = entry;
            learned.source = Provenance::response;
            learned.learned_via = via;
            learned.learned_at = now;
            directory.emplace(entry.spec.id, std::move(learned));
            continue;
        }
        DirectoryEntry& mine = it->second;
        if (entry.summary_at && (!mine.summary_at || *entry.summary_at > *mine.summary_at)) {
            mine.type_summary = entry.type_summary;
            mine.summary_at = entry.summary_at;
        }
    }
    return directory;
}

namespace {

SimTime travel_estimate(Position from, Position to, double range, SimTime hop_latency)
{
    double hops = std::ceil(distance(from, to) / range);
    return static_cast<SimTime>(hops) * hop_latency;
}

} // namespace

std::vector<Waypoint> plan_rendezvous(const Itinerary& itinerary, Position from, SimTime now,
                                      double radio_range, SimTime hop_latency)
{
    std::vector<Waypoint> out;
    if (itinerary.empty()) {
        return out;
    }
    Position current = itinerary.position_at(now);
    SimTime eta = now + travel_estimate(from, current, radio_range, hop_latency);
    out.push_back(Waypoint{eta, itinerary.position_at(eta)});
    for (const auto& wp : itinerary.waypoints) {
        if (wp.arrive_at > eta) {
            out.push_back(wp);
        }
    }
    return out;
}

} // namespace ads
