// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/trace.hpp"

#include <string>
#include <vector>

namespace ads {

struct Violation {
    std::string audit;
    SimTime time = 0;
    std::uint64_t seq = 0;
    std::string detail;
};

/// Trace-driven invariant checks. Each returns the violations it found.
namespace audit {

/// Every device processes a given flood id at most once.
std::vector<Violation> flood_once(const std::vector<TraceRecord>& records);
/// An IMM's epoch never falls. State only moves to a strictly higher epoch:
/// after absorbing a rival, on a handoff, and past every epoch the census
/// members had seen.
std::vector<Violation> epochs_increase(const std::vector<TraceRecord>& records);
/// No IMM-stamped record carries a token after that token went down.
std::vector<Violation> no_stale_actions(const std::vector<TraceRecord>& records);
/// Store records never show used above capacity.
std::vector<Violation> capacity_respected(const std::vector<TraceRecord>& records);
/// Result chunks are only delivered to the query initiator.
std::vector<Violation> chunks_to_initiator(const std::vector<TraceRecord>& records);
/// Greedy geographic hops always get strictly closer to the target.
std::vector<Violation> greedy_progress(const std::vector<TraceRecord>& records);
/// Markets learned from a chunk were listed in that chunk's metadata.
std::vector<Violation> learned_from_meta(const std::vector<TraceRecord>& records);
/// A crashed device never signs off afterwards.
std::vector<Violation> crash_is_silent(const std::vector<TraceRecord>& records);

/// All of the above, concatenated.
std::vector<Violation> all(const std::vector<TraceRecord>& records);

} // namespace audit

std::string to_string(const Violation& v);

} // namespace ads
