// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/publish.hpp"

namespace ads {

std::string_view to_string(SelectionPolicy policy)
{
    return policy == SelectionPolicy::best_fit_type ? "best-fit-type" : "nearest-market";
}

std::optional<SelectionPolicy> parse_policy(std::string_view text)
{
    if (text == "best-fit-type") {
        return SelectionPolicy::best_fit_type;
    }
    if (text == "nearest-market") {
        return SelectionPolicy::nearest_market;
    }
    return std::nullopt;
}

std::optional<MarketId> select_market(const Directory& directory, Position from, const PublishRequest& request)
{
    std::optional<MarketId> best;
    std::uint32_t best_count = 0;
    double best_dist = 0.0;
    for (const auto& [id, entry] : directory) {
        double d = distance(from, entry.spec.center);
        std::uint32_t count = 0;
        if (request.policy == SelectionPolicy::best_fit_type) {
            auto it = entry.type_summary.find(request.item.type_tag);
            count = it == entry.type_summary.end() ? 0 : it->second;
        }
        // Directory iterates in ascending id, so strict comparisons keep the
        // lower id on exact ties.
        bool better = !best || count > best_count || (count == best_count && d < best_dist);
        if (better) {
            best = id;
            best_count = count;
            best_dist = d;
        }
    }
    return best;
}

} // namespace ads
