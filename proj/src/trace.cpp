// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/trace.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ads {

std::string format_position(const Position& p)
{
    return FieldList::format_double(p.x) + "," + FieldList::format_double(p.y);
}

std::string FieldList::format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

const std::string* TraceRecord::get(std::string_view key) const
{
    for (const auto& [k, v] : fields) {
        if (k == key) {
            return &v;
        }
    }
    return nullptr;
}

std::string TraceRecord::str(std::string_view key) const
{
    const std::string* v = get(key);
    return v ? *v : std::string();
}

std::optional<std::uint64_t> TraceRecord::opt_u64(std::string_view key) const
{
    const std::string* v = get(key);
    if (!v || v->empty() || *v == "-") {
        return std::nullopt;
    }
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc()) {
        return std::nullopt;
    }
    return out;
}

std::uint64_t TraceRecord::u64(std::string_view key) const
{
    auto v = opt_u64(key);
    if (!v) {
        throw std::runtime_error("trace record '" + kind + "' lacks numeric field " + std::string(key));
    }
    return *v;
}

std::vector<std::uint64_t> TraceRecord::list(std::string_view key) const
{
    std::vector<std::uint64_t> out;
    const std::string* v = get(key);
    if (!v || *v == "-") {
        return out;
    }
    std::string_view rest = *v;
    while (!rest.empty()) {
        auto comma = rest.find(',');
        std::string_view tok = rest.substr(0, comma);
        std::uint64_t x = 0;
        std::from_chars(tok.data(), tok.data() + tok.size(), x);
        out.push_back(x);
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::string TraceRecord::to_line() const
{
    std::string out = std::to_string(time);
    out += '\t';
    out += std::to_string(seq);
    out += '\t';
    out += device == kNoDevice ? std::string("-") : std::to_string(device);
    out += '\t';
    out += kind;
    for (const auto& [k, v] : fields) {
        out += '\t';
        out += k;
        out += '=';
        out += v;
    }
    return out;
}

TraceRecord TraceRecord::parse_line(std::string_view line)
{
    std::vector<std::string_view> cols;
    while (true) {
        auto tab = line.find('\t');
        cols.push_back(line.substr(0, tab));
        if (tab == std::string_view::npos) {
            break;
        }
        line.remove_prefix(tab + 1);
    }
    if (cols.size() < 4) {
        throw std::runtime_error("malformed trace line");
    }
    TraceRecord r;
    std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), r.time);
    std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), r.seq);
    if (cols[2] != "-") {
        std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), r.device);
    }
    r.kind = std::string(cols[3]);
    for (std::size_t i = 4; i < cols.size(); ++i) {
        auto eq = cols[i].find('=');
        if (eq == std::string_view::npos) {
            throw std::runtime_error("malformed trace field '" + std::string(cols[i]) + "'");
        }
        r.fields.emplace_back(std::string(cols[i].substr(0, eq)), std::string(cols[i].substr(eq + 1)));
    }
    return r;
}

const TraceRecord& Trace::append(SimTime time, DeviceId device, std::string kind, FieldList fields)
{
    if (!enabled_) {
        scratch_ = TraceRecord{time, next_seq_++, device, std::move(kind), fields.take()};
        return scratch_;
    }
    records_.push_back(TraceRecord{time, next_seq_++, device, std::move(kind), fields.take()});
    return records_.back();
}

void Trace::write(std::ostream& out) const
{
    for (const auto& r : records_) {
        out << r.to_line() << '\n';
    }
}

std::string Trace::to_text() const
{
    std::ostringstream out;
    write(out);
    return out.str();
}

std::uint64_t Trace::digest() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& r : records_) {
        for (unsigned char c : r.to_line()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= '\n';
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<TraceRecord> Trace::read(std::istream& in)
{
    std::vector<TraceRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(TraceRecord::parse_line(line));
        }
    }
    return out;
}

} // namespace ads
