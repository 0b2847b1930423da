// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace ads {

namespace {

struct ItemTrack {
    std::uint32_t degree = 1;
    std::set<DeviceId> holders;
    bool reached = false;
    bool expired = false;
    std::optional<std::size_t> open;
};

double ratio(std::uint64_t num, std::uint64_t den)
{
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

Metrics compute_metrics(const std::vector<TraceRecord>& records)
{
    Metrics m;
    m.records = records.size();
    std::map<ItemId, ItemTrack> items;
    std::map<DeviceId, std::set<ItemId>> held;
    std::set<ItemId> accepted;
    std::set<ItemId> refused;
    std::set<ItemId> lost;
    std::set<std::pair<QueryId, std::uint32_t>> emitted;
    std::set<std::pair<QueryId, std::uint32_t>> delivered;
    std::set<std::pair<QueryId, std::uint32_t>> undelivered;
    std::map<QueryId, std::set<ItemId>> delivered_items;
    std::uint64_t emitted_items = 0;
    std::uint64_t delivered_item_count = 0;
    struct MsgHops {
        std::string kind;
        std::uint32_t hops = 0;
        std::uint64_t tx = 0;
    };
    std::map<MsgId, MsgHops> msgs;
    std::set<MarketId> had_leader;

    auto sample = [&](SimTime t) {
        double survival = ratio(m.items_published - lost.size(), m.items_published);
        double recall = ratio(delivered_item_count, emitted_items);
        if (!m.series.empty() && m.series.back().t == t) {
            m.series.back().survival = survival;
            m.series.back().recall = recall;
        } else {
            m.series.push_back(SeriesPoint{t, survival, recall});
        }
    };

    auto drop_copy = [&](SimTime t, ItemId id, DeviceId dev, const std::string& cause) {
        auto it = items.find(id);
        if (it == items.end()) {
            return;
        }
        ItemTrack& tr = it->second;
        if (tr.holders.erase(dev) == 0) {
            return;
        }
        if (cause == "expired") {
            tr.expired = true;
            if (tr.open) {
                m.deficits[*tr.open].end = t;
                tr.open.reset();
            }
            return;
        }
        if (tr.reached && !tr.open && tr.holders.size() < tr.degree && !tr.expired) {
            tr.open = m.deficits.size();
            m.deficits.push_back(DeficitInterval{id, t, std::nullopt, cause, tr.degree});
        }
    };

    for (const auto& r : records) {
        m.end = std::max(m.end, r.time);
        const std::string& k = r.kind;
        if (k == "publish") {
            ++m.items_published;
            ItemTrack& tr = items[r.u64("item")];
            tr.degree = static_cast<std::uint32_t>(r.u64("degree"));
            sample(r.time);
        } else if (k == "publish_outcome") {
            (r.u64("accepted") ? accepted : refused).insert(r.u64("item"));
        } else if (k == "item_gone") {
            if (lost.insert(r.u64("item")).second) {
                ++m.loss_causes[r.str("cause")];
                sample(r.time);
            }
        } else if (k == "store") {
            ItemId id = r.u64("item");
            auto it = items.find(id);
            if (it == items.end() || r.u64("assigned") == 0) {
                continue;
            }
            held[r.device].insert(id);
            ItemTrack& tr = it->second;
            tr.holders.insert(r.device);
            if (tr.holders.size() >= tr.degree) {
                tr.reached = true;
                if (tr.open) {
                    m.deficits[*tr.open].end = r.time;
                    tr.open.reset();
                }
            }
        } else if (k == "unstore") {
            held[r.device].erase(r.u64("item"));
            drop_copy(r.time, r.u64("item"), r.device, r.str("reason"));
        } else if (k == "expire") {
            held[r.device].erase(r.u64("item"));
            drop_copy(r.time, r.u64("item"), r.device, "expired");
        } else if (k == "crash" || k == "power_off") {
            auto ids = std::move(held[r.device]);
            held.erase(r.device);
            for (ItemId id : ids) {
                drop_copy(r.time, id, r.device, k == "crash" ? "crash" : "shutdown");
            }
        } else if (k == "query_launch") {
            QueryStats& q = m.queries[r.u64("query")];
            q.query = r.u64("query");
            q.initiator = r.device;
        } else if (k == "chunk_emit") {
            auto key = std::make_pair(r.u64("query"), static_cast<std::uint32_t>(r.u64("seq")));
            if (emitted.insert(key).second) {
                emitted_items += r.list("items").size();
                sample(r.time);
            }
        } else if (k == "chunk_delivered") {
            auto key = std::make_pair(r.u64("query"), static_cast<std::uint32_t>(r.u64("seq")));
            if (delivered.insert(key).second) {
                for (auto id : r.list("items")) {
                    delivered_items[key.first].insert(id);
                }
                delivered_item_count += r.list("items").size();
                sample(r.time);
            }
        } else if (k == "chunk_undelivered") {
            undelivered.insert({r.u64("query"), static_cast<std::uint32_t>(r.u64("seq"))});
        } else if (k == "query_close") {
            QueryStats& q = m.queries[r.u64("query")];
            q.query = r.u64("query");
            q.closed = true;
            auto matched = r.list("matched");
            q.matched.assign(matched.begin(), matched.end());
        } else if (k == "sync_start") {
            ++m.sync_queries;
        } else if (k == "tx") {
            MsgHops& h = msgs[r.u64("msg")];
            h.kind = r.str("kind");
            h.hops = std::max(h.hops, static_cast<std::uint32_t>(r.u64("hop")));
            ++h.tx;
        } else if (k == "imm_tentative") {
            ++m.imm_created;
        } else if (k == "imm_up") {
            MarketId mk = static_cast<MarketId>(r.u64("market"));
            if (r.str("via") == "handoff") {
                ++m.imm_created;
            } else if (had_leader.count(mk)) {
                ++m.imm_recoveries;
            }
            had_leader.insert(mk);
        } else if (k == "imm_handoff") {
            ++m.imm_handoffs;
        } else if (k == "imm_down" && r.str("reason") == "lost-election") {
            ++m.imm_elections;
        }
    }

    m.items_accepted = accepted.size();
    m.items_refused = refused.size();
    m.items_lost = lost.size();
    m.survival_rate = ratio(m.items_published - m.items_lost, m.items_published);

    SimTime total = 0;
    std::uint64_t closed = 0;
    for (const auto& d : m.deficits) {
        if (d.end) {
            SimTime len = *d.end - d.start;
            m.max_closed_deficit = std::max(m.max_closed_deficit, len);
            total += len;
            ++closed;
        } else {
            ++m.open_deficits;
        }
    }
    m.mean_closed_deficit = closed == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(closed);

    for (const auto& key : emitted) {
        QueryStats& q = m.queries[key.first];
        q.query = key.first;
        ++q.chunks_emitted;
        if (delivered.count(key)) {
            ++q.chunks_delivered;
        } else if (undelivered.count(key)) {
            ++q.chunks_undelivered;
        }
    }
    double recall_sum = 0.0;
    double precision_sum = 0.0;
    for (auto& [id, q] : m.queries) {
        const auto& got = delivered_items[id];
        q.delivered.assign(got.begin(), got.end());
        std::set<ItemId> matched(q.matched.begin(), q.matched.end());
        std::uint64_t hit = 0;
        for (ItemId i : got) {
            hit += matched.count(i);
        }
        q.recall = ratio(hit, matched.size());
        q.precision = ratio(hit, got.size());
        recall_sum += q.recall;
        precision_sum += q.precision;
        m.chunks_emitted += q.chunks_emitted;
        m.chunks_delivered += q.chunks_delivered;
        m.chunks_undelivered += q.chunks_undelivered;
    }
    if (!m.queries.empty()) {
        m.mean_recall = recall_sum / static_cast<double>(m.queries.size());
        m.mean_precision = precision_sum / static_cast<double>(m.queries.size());
    }
    m.chunk_delivery_rate = ratio(m.chunks_delivered, m.chunks_emitted);

    std::map<std::string, std::uint64_t> hop_sum;
    for (const auto& [id, h] : msgs) {
        HopStats& s = m.hops[h.kind];
        ++s.messages;
        s.transmissions += h.tx;
        s.max_hops = std::max(s.max_hops, h.hops);
        hop_sum[h.kind] += h.hops;
    }
    for (auto& [kind, s] : m.hops) {
        s.mean_hops = static_cast<double>(hop_sum[kind]) / static_cast<double>(s.messages);
    }
    return m;
}

std::string metrics_to_json(const Metrics& m, int indent)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["end"] = m.end;
    j["records"] = m.records;
    j["items"] = {
        {"published", m.items_published}, {"accepted", m.items_accepted}, {"refused", m.items_refused},
        {"lost", m.items_lost},           {"loss_causes", m.loss_causes}, {"survival_rate", m.survival_rate},
    };
    ordered_json deficits = ordered_json::array();
    for (const auto& d : m.deficits) {
        ordered_json e = {{"item", d.item}, {"start", d.start}, {"cause", d.cause}, {"degree", d.degree}};
        e["end"] = d.end ? ordered_json(*d.end) : ordered_json(nullptr);
        deficits.push_back(std::move(e));
    }
    j["replica_deficits"] = {
        {"intervals", std::move(deficits)},
        {"max_closed", m.max_closed_deficit},
        {"mean_closed", m.mean_closed_deficit},
        {"open", m.open_deficits},
    };
    ordered_json queries = ordered_json::array();
    for (const auto& [id, q] : m.queries) {
        queries.push_back({{"query", q.query},
                           {"initiator", q.initiator == kNoDevice ? ordered_json(nullptr) : ordered_json(q.initiator)},
                           {"matched", q.matched},
                           {"delivered", q.delivered},
                           {"chunks_emitted", q.chunks_emitted},
                           {"chunks_delivered", q.chunks_delivered},
                           {"chunks_undelivered", q.chunks_undelivered},
                           {"recall", q.recall},
                           {"precision", q.precision},
                           {"closed", q.closed}});
    }
    j["queries"] = {
        {"async", std::move(queries)},
        {"sync_count", m.sync_queries},
        {"chunks_emitted", m.chunks_emitted},
        {"chunks_delivered", m.chunks_delivered},
        {"chunks_undelivered", m.chunks_undelivered},
        {"chunk_delivery_rate", m.chunk_delivery_rate},
        {"mean_recall", m.mean_recall},
        {"mean_precision", m.mean_precision},
    };
    ordered_json hops;
    for (const auto& [kind, s] : m.hops) {
        hops[kind] = {{"messages", s.messages},
                      {"transmissions", s.transmissions},
                      {"max_hops", s.max_hops},
                      {"mean_hops", s.mean_hops}};
    }
    j["hops"] = hops.is_null() ? ordered_json::object() : std::move(hops);
    j["imm"] = {
        {"created", m.imm_created},
        {"handoffs", m.imm_handoffs},
        {"elections", m.imm_elections},
        {"recoveries", m.imm_recoveries},
    };
    ordered_json series = ordered_json::array();
    for (const auto& p : m.series) {
        series.push_back({{"t", p.t}, {"survival", p.survival}, {"recall", p.recall}});
    }
    j["series"] = std::move(series);
    return j.dump(indent);
}

std::vector<std::pair<std::string, double>> metrics_scalars(const Metrics& m)
{
    auto d = [](auto v) { return static_cast<double>(v); };
    return {
        {"published", d(m.items_published)},
        {"accepted", d(m.items_accepted)},
        {"lost", d(m.items_lost)},
        {"survival_rate", m.survival_rate},
        {"max_deficit", d(m.max_closed_deficit)},
        {"open_deficits", d(m.open_deficits)},
        {"chunks_emitted", d(m.chunks_emitted)},
        {"chunk_delivery_rate", m.chunk_delivery_rate},
        {"mean_recall", m.mean_recall},
        {"mean_precision", m.mean_precision},
        {"imm_handoffs", d(m.imm_handoffs)},
        {"imm_elections", d(m.imm_elections)},
    };
}

} // namespace ads
