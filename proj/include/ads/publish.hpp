// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/broker.hpp"
#include "ads/market.hpp"

#include <optional>
#include <string_view>

namespace ads {

enum class SelectionPolicy : std::uint8_t { best_fit_type, nearest_market };

std::string_view to_string(SelectionPolicy policy);
std::optional<SelectionPolicy> parse_policy(std::string_view text);

struct PublishRequest {
    InfoItem item;
    SelectionPolicy policy = SelectionPolicy::nearest_market;
};

/// best-fit-type: most items of the request's tag in the market's summary,
/// ties to the nearer market. nearest-market: closest center, ties to the
/// lower id. Returns nullopt for an empty directory.
std::optional<MarketId> select_market(const Directory& directory, Position from, const PublishRequest& request);

} // namespace ads
