// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ads/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <string_view>
#include <utility>
#include <vector>

namespace ads {

/// One line of the run trace. Fields keep insertion order so the text form
/// is stable across runs.
struct TraceRecord {
    SimTime time = 0;
    std::uint64_t seq = 0;
    DeviceId device = kNoDevice;
    std::string kind;
    std::vector<std::pair<std::string, std::string>> fields;

    const std::string* get(std::string_view key) const;
    std::string str(std::string_view key) const;
    std::uint64_t u64(std::string_view key) const;
    std::optional<std::uint64_t> opt_u64(std::string_view key) const;
    std::vector<std::uint64_t> list(std::string_view key) const;

    /// time<TAB>seq<TAB>device<TAB>kind<TAB>key=value...
    std::string to_line() const;
    static TraceRecord parse_line(std::string_view line);

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

class FieldList {
public:
    FieldList& add(std::string key, std::string value)
    {
        fields_.emplace_back(std::move(key), std::move(value));
        return *this;
    }
    FieldList& add(std::string key, const char* value) { return add(std::move(key), std::string(value)); }
    FieldList& add(std::string key, std::string_view value) { return add(std::move(key), std::string(value)); }
    template <typename T>
        requires std::is_arithmetic_v<T>
    FieldList& add(std::string key, T value)
    {
        if constexpr (std::is_floating_point_v<T>) {
            return add(std::move(key), format_double(static_cast<double>(value)));
        } else {
            return add(std::move(key), std::to_string(value));
        }
    }
    template <typename Range>
    FieldList& add_list(std::string key, const Range& values)
    {
        std::string out;
        for (const auto& v : values) {
            if (!out.empty()) {
                out += ',';
            }
            out += std::to_string(v);
        }
        return add(std::move(key), out.empty() ? std::string("-") : out);
    }
    FieldList& add(std::string key, const Position& p) { return add(std::move(key), format_position(p)); }

    std::vector<std::pair<std::string, std::string>> take() { return std::move(fields_); }

    static std::string format_double(double v);

private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

/// Append-only run trace. Records are ordered by (time, seq).
class Trace {
public:
    void set_enabled(bool enabled) { enabled_ = enabled; }
    bool enabled() const { return enabled_; }

    const TraceRecord& append(SimTime time, DeviceId device, std::string kind, FieldList fields = {});

    const std::vector<TraceRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    void write(std::ostream& out) const;
    std::string to_text() const;
    /// 64-bit FNV-1a over the text form.
    std::uint64_t digest() const;

    static std::vector<TraceRecord> read(std::istream& in);

private:
    bool enabled_ = true;
    std::uint64_t next_seq_ = 0;
    std::vector<TraceRecord> records_;
    TraceRecord scratch_;
};

} // namespace ads
