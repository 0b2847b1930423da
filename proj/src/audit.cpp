// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/audit.hpp"

#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace ads {

namespace {

Violation violation(std::string audit, const TraceRecord& r, std::string detail)
{
    return Violation{std::move(audit), r.time, r.seq, std::move(detail)};
}

using ChunkKey = std::pair<std::uint64_t, std::uint64_t>;

} // namespace

namespace audit {

std::vector<Violation> flood_once(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    std::map<std::uint64_t, DeviceId> origin;
    std::set<std::pair<std::uint64_t, DeviceId>> seen;
    for (const auto& r : records) {
        if (r.kind == "flood") {
            origin[r.u64("msg")] = r.device;
        } else if (r.kind == "frx") {
            std::uint64_t msg = r.u64("msg");
            if (!seen.insert({msg, r.device}).second) {
                out.push_back(violation("flood_once", r, "device " + std::to_string(r.device) + " processed msg " +
                                                             std::to_string(msg) + " twice"));
            }
            auto it = origin.find(msg);
            if (it != origin.end() && it->second == r.device) {
                out.push_back(violation("flood_once", r, "origin processed its own msg " + std::to_string(msg)));
            }
        }
    }
    return out;
}

std::vector<Violation> epochs_increase(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    std::map<std::uint64_t, std::uint64_t> last;
    std::map<std::uint64_t, std::uint64_t> must_exceed;
    std::map<DeviceId, std::uint64_t> handed;
    auto fail = [&](const TraceRecord& r, const std::string& what) {
        out.push_back(violation("epochs_increase", r, "device " + std::to_string(r.device) + " " + what));
    };
    for (const auto& r : records) {
        auto token = r.opt_u64("token");
        auto epoch = r.opt_u64("epoch");
        if (!token || !epoch) {
            continue;
        }
        auto prev = last.find(*token);
        if (prev != last.end() && *epoch < prev->second) {
            fail(r, "epoch fell from " + std::to_string(prev->second) + " to " + std::to_string(*epoch));
        }
        last[*token] = *epoch;
        if (r.kind == "imm_absorb") {
            must_exceed[*token] = r.u64("from_epoch");
            continue;
        }
        auto need = must_exceed.find(*token);
        if (need != must_exceed.end()) {
            if (*epoch <= need->second) {
                fail(r, "kept epoch " + std::to_string(*epoch) + " after absorbing epoch " +
                            std::to_string(need->second));
            }
            must_exceed.erase(need);
        }
        if (r.kind == "imm_handoff") {
            handed[static_cast<DeviceId>(r.u64("to"))] = *epoch;
        } else if (r.kind == "imm_up" && r.str("via") == "handoff") {
            auto h = handed.find(r.device);
            if (h == handed.end() || *epoch <= h->second) {
                fail(r, "took over at epoch " + std::to_string(*epoch) + " without a lower predecessor");
            }
            if (h != handed.end()) {
                handed.erase(h);
            }
        } else if (r.kind == "imm_up" && *epoch <= r.u64("floor")) {
            fail(r, "rebuilt at epoch " + std::to_string(*epoch) + " but members knew " + r.str("floor"));
        }
    }
    return out;
}

std::vector<Violation> no_stale_actions(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    std::set<std::uint64_t> down;
    for (const auto& r : records) {
        auto token = r.opt_u64("token");
        if (!token) {
            continue;
        }
        if (down.count(*token)) {
            out.push_back(violation("no_stale_actions", r,
                                    r.kind + " by device " + std::to_string(r.device) + " after token " +
                                        std::to_string(*token) + " went down"));
        }
        if (r.kind == "imm_down") {
            down.insert(*token);
        }
    }
    return out;
}

std::vector<Violation> capacity_respected(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    for (const auto& r : records) {
        if (r.kind == "store" && r.u64("used") > r.u64("capacity")) {
            out.push_back(violation("capacity_respected", r,
                                    "device " + std::to_string(r.device) + " used " + r.str("used") + " of " +
                                        r.str("capacity")));
        }
    }
    return out;
}

std::vector<Violation> chunks_to_initiator(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    std::map<std::uint64_t, DeviceId> initiator;
    std::map<ChunkKey, DeviceId> recipient;
    for (const auto& r : records) {
        if (r.kind == "query_launch") {
            initiator[r.u64("query")] = r.device;
        } else if (r.kind == "chunk_emit") {
            recipient[{r.u64("query"), r.u64("seq")}] = static_cast<DeviceId>(r.u64("recipient"));
        } else if (r.kind == "chunk_delivered") {
            std::uint64_t q = r.u64("query");
            auto it = recipient.find({q, r.u64("seq")});
            bool ok = it != recipient.end() && it->second == r.device;
            auto init = initiator.find(q);
            if (init != initiator.end() && init->second != r.device) {
                ok = false;
            }
            if (!ok) {
                out.push_back(violation("chunks_to_initiator", r,
                                        "query " + std::to_string(q) + " chunk delivered to device " +
                                            std::to_string(r.device)));
            }
        }
    }
    return out;
}

std::vector<Violation> greedy_progress(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    for (const auto& r : records) {
        if (r.kind != "tx" || r.str("geo") != "greedy") {
            continue;
        }
        double from = std::stod(r.str("d_from"));
        double to = std::stod(r.str("d_to"));
        if (!(to < from)) {
            out.push_back(violation("greedy_progress", r,
                                    "msg " + r.str("msg") + " moved from " + r.str("d_from") + " to " + r.str("d_to")));
        }
    }
    return out;
}

std::vector<Violation> learned_from_meta(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    std::map<ChunkKey, std::set<std::uint64_t>> meta;
    std::map<std::uint64_t, ChunkKey> delivery;
    for (const auto& r : records) {
        if (r.kind == "chunk_emit") {
            auto ms = r.list("meta");
            meta[{r.u64("query"), r.u64("seq")}] = std::set<std::uint64_t>(ms.begin(), ms.end());
        } else if (r.kind == "chunk_delivered") {
            delivery[r.u64("delivery")] = {r.u64("query"), r.u64("seq")};
        } else if (r.kind == "learn") {
            std::uint64_t market = r.u64("market");
            auto d = delivery.find(r.u64("delivery"));
            bool ok = d != delivery.end() && meta.count(d->second) && meta[d->second].count(market);
            if (!ok) {
                out.push_back(violation("learned_from_meta", r,
                                        "device " + std::to_string(r.device) + " learned market " +
                                            std::to_string(market) + " outside chunk metadata"));
            }
        }
    }
    return out;
}

std::vector<Violation> crash_is_silent(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    std::set<DeviceId> crashed;
    for (const auto& r : records) {
        if (r.kind == "crash") {
            crashed.insert(r.device);
        } else if (r.kind == "sign_off" && crashed.count(r.device)) {
            out.push_back(violation("crash_is_silent", r, "crashed device " + std::to_string(r.device) + " signed off"));
        }
    }
    return out;
}

std::vector<Violation> all(const std::vector<TraceRecord>& records)
{
    std::vector<Violation> out;
    for (auto* fn : {flood_once, epochs_increase, no_stale_actions, capacity_respected, chunks_to_initiator,
                     greedy_progress, learned_from_meta, crash_is_silent}) {
        auto v = fn(records);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

} // namespace audit

std::string to_string(const Violation& v)
{
    std::ostringstream os;
    os << v.audit << " @" << v.time << "#" << v.seq << ": " << v.detail;
    return os.str();
}

} // namespace ads
