// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/trace.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ads {

/// A stretch of time during which an item had fewer live assigned copies
/// than its replication degree.
struct DeficitInterval {
    ItemId item = 0;
    SimTime start = 0;
    /// nullopt while still open at the end of the trace.
    std::optional<SimTime> end;
    /// What took the copy away: crash, shutdown, handoff, trim, expired.
    std::string cause;
    std::uint32_t degree = 1;
};

struct QueryStats {
    QueryId query = 0;
    DeviceId initiator = kNoDevice;
    std::vector<ItemId> matched;
    std::vector<ItemId> delivered;
    std::uint32_t chunks_emitted = 0;
    std::uint32_t chunks_delivered = 0;
    std::uint32_t chunks_undelivered = 0;
    double recall = 1.0;
    double precision = 1.0;
    bool closed = false;
};

struct HopStats {
    std::uint64_t messages = 0;
    std::uint64_t transmissions = 0;
    std::uint32_t max_hops = 0;
    double mean_hops = 0.0;
};

struct SeriesPoint {
    SimTime t = 0;
    double survival = 1.0;
    double recall = 1.0;
};

/// Run summary derived from the trace alone.
struct Metrics {
    SimTime end = 0;
    std::uint64_t records = 0;

    std::uint64_t items_published = 0;
    std::uint64_t items_accepted = 0;
    std::uint64_t items_refused = 0;
    std::uint64_t items_lost = 0;
    std::map<std::string, std::uint64_t> loss_causes;
    double survival_rate = 1.0;

    std::vector<DeficitInterval> deficits;
    SimTime max_closed_deficit = 0;
    double mean_closed_deficit = 0.0;
    std::uint64_t open_deficits = 0;

    std::map<QueryId, QueryStats> queries;
    std::uint64_t chunks_emitted = 0;
    std::uint64_t chunks_delivered = 0;
    std::uint64_t chunks_undelivered = 0;
    double chunk_delivery_rate = 1.0;
    double mean_recall = 1.0;
    double mean_precision = 1.0;
    std::uint64_t sync_queries = 0;

    std::map<std::string, HopStats> hops;

    std::uint64_t imm_created = 0;
    std::uint64_t imm_handoffs = 0;
    std::uint64_t imm_elections = 0;
    std::uint64_t imm_recoveries = 0;

    std::vector<SeriesPoint> series;
};

Metrics compute_metrics(const std::vector<TraceRecord>& records);

std::string metrics_to_json(const Metrics& metrics, int indent = 2);
/// Flat scalar view used for sweep tables, in a fixed column order.
std::vector<std::pair<std::string, double>> metrics_scalars(const Metrics& metrics);

} // namespace ads
