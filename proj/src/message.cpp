// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/message.hpp"

namespace ads {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

} // namespace

std::string_view to_string(SignOffReason reason)
{
    return reason == SignOffReason::graceful_leave ? "graceful-leave" : "graceful-shutdown";
}

std::string_view request_name(const ImmRequestBody& body)
{
    return std::visit(overloaded{
                          [](const PublishSubmit&) { return std::string_view("publish"); },
                          [](const ItemReturn&) { return std::string_view("item-return"); },
                          [](const QuerySubmit&) { return std::string_view("query"); },
                          [](const SignOff&) { return std::string_view("sign-off"); },
                      },
                      body);
}

std::string_view kind_name(const Payload& payload)
{
    static constexpr std::string_view names[] = {
        "imm-probe",      "probe-reply",     "imm-announce",       "capacity-report",   "census-request",
        "census-reply",   "to-market",       "imm-request",        "imm-request-ack",   "store-cmd",
        "store-ack",      "replicate-cmd",   "replicate-fail",     "unstore-cmd",       "fetch-cmd",
        "fetch-reply",    "heartbeat-ping",  "heartbeat-ack",      "center-seek",       "center-seek-reply",
        "imm-handoff",    "imm-transfer",    "device-delivery",    "locate-probe",      "locate-ack",
        "sync-probe",     "sync-reply",
    };
    static_assert(std::size(names) == std::variant_size_v<Payload>);
    return names[payload.index()];
}

} // namespace ads
