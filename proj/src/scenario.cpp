// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ads {

std::string_view to_string(ReplicationStrategy strategy)
{
    return strategy == ReplicationStrategy::signoff ? "signoff" : "periodic";
}

std::optional<ReplicationStrategy> parse_strategy(std::string_view text)
{
    if (text == "signoff") {
        return ReplicationStrategy::signoff;
    }
    if (text == "periodic") {
        return ReplicationStrategy::periodic;
    }
    return std::nullopt;
}

std::string_view to_string(Verb verb)
{
    switch (verb) {
    case Verb::publish: return "publish";
    case Verb::put: return "put";
    case Verb::query: return "query";
    case Verb::sync: return "sync";
    case Verb::crash: return "crash";
    case Verb::shutdown: return "shutdown";
    case Verb::leave: return "leave";
    }
    return "?";
}

namespace {

std::optional<Verb> parse_verb(std::string_view text)
{
    for (Verb v : {Verb::publish, Verb::put, Verb::query, Verb::sync, Verb::crash, Verb::shutdown, Verb::leave}) {
        if (to_string(v) == text) {
            return v;
        }
    }
    return std::nullopt;
}

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(std::string(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> words(std::string_view s)
{
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) {
        out.push_back(w);
    }
    return out;
}

std::string fmt(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class Parser {
public:
    explicit Parser(std::size_t line) : line_(line) {}

    [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(line_, what); }

    template <typename T>
    T integer(std::string_view text, std::string_view what) const
    {
        T v{};
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
            fail("bad " + std::string(what) + " '" + std::string(text) + "'");
        }
        return v;
    }

    double real(std::string_view text, std::string_view what) const
    {
        double v = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
            fail("bad " + std::string(what) + " '" + std::string(text) + "'");
        }
        return v;
    }

    Position position(std::string_view text) const
    {
        auto parts = words(text);
        if (parts.size() == 1) {
            parts = split(parts[0], ',');
        }
        if (parts.size() != 2) {
            fail("position needs two coordinates");
        }
        return Position{real(parts[0], "x"), real(parts[1], "y")};
    }

    Itinerary itinerary(const std::vector<std::string>& tokens) const
    {
        Itinerary it;
        for (const auto& tok : tokens) {
            auto at = tok.find('@');
            if (at == std::string::npos) {
                fail("waypoint must look like t@x,y");
            }
            Waypoint w;
            w.arrive_at = integer<SimTime>(std::string_view(tok).substr(0, at), "waypoint time");
            w.at = position(std::string_view(tok).substr(at + 1));
            it.waypoints.push_back(w);
        }
        try {
            it.validate();
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
        return it;
    }

    MobilityModel mobility(std::string_view text) const
    {
        auto toks = words(text);
        if (toks.empty()) {
            fail("empty mobility");
        }
        if (toks[0] == "stationary") {
            if (toks.size() != 1) {
                fail("stationary takes no parameters");
            }
            return Stationary{};
        }
        if (toks[0] == "random-waypoint") {
            RandomWaypoint rw;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                auto [key, value] = key_value(toks[i]);
                auto range = split(value, ':');
                if (range.size() != 2) {
                    fail(key + " needs lo:hi");
                }
                if (key == "speed") {
                    rw.speed_min = real(range[0], "speed");
                    rw.speed_max = real(range[1], "speed");
                } else if (key == "pause") {
                    rw.pause_min = integer<SimTime>(range[0], "pause");
                    rw.pause_max = integer<SimTime>(range[1], "pause");
                } else {
                    fail("unknown random-waypoint parameter '" + key + "'");
                }
            }
            if (!(rw.speed_min > 0.0) || rw.speed_max < rw.speed_min || rw.pause_max < rw.pause_min) {
                fail("random-waypoint ranges must be positive and ordered");
            }
            return rw;
        }
        if (toks[0] == "scripted") {
            return Scripted{itinerary(std::vector<std::string>(toks.begin() + 1, toks.end()))};
        }
        fail("unknown mobility model '" + toks[0] + "'");
    }

    std::pair<std::string, std::string> key_value(std::string_view tok) const
    {
        auto eq = tok.find('=');
        if (eq == std::string_view::npos) {
            fail("expected key=value, got '" + std::string(tok) + "'");
        }
        return {std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1))};
    }

    std::set<ItemId> id_list(std::string_view text) const
    {
        std::set<ItemId> out;
        if (text == "-") {
            return out;
        }
        for (const auto& part : split(text, ',')) {
            out.insert(integer<ItemId>(part, "id"));
        }
        return out;
    }

private:
    std::size_t line_;
};

void set_constant(Constants& c, const std::string& key, const std::string& value, const Parser& p)
{
    auto ticks = [&](SimTime& slot) { slot = p.integer<SimTime>(value, key); };
    if (key == "t_probe") {
        ticks(c.t_probe);
    } else if (key == "t_center") {
        ticks(c.t_center);
    } else if (key == "t_heartbeat") {
        ticks(c.t_heartbeat);
    } else if (key == "t_ack") {
        ticks(c.t_ack);
    } else if (key == "hop_latency") {
        ticks(c.hop_latency);
    } else if (key == "ttl") {
        c.ttl = p.integer<std::uint32_t>(value, key);
    } else if (key == "chunk_size") {
        c.chunk_size = p.integer<std::uint32_t>(value, key);
    } else if (key == "carry_margin") {
        c.carry_margin = p.real(value, key);
    } else if (key == "carry_period") {
        ticks(c.carry_period);
    } else if (key == "prediction_horizon") {
        ticks(c.prediction_horizon);
    } else if (key == "sweep_period") {
        ticks(c.sweep_period);
    } else if (key == "strategy") {
        auto s = parse_strategy(value);
        if (!s) {
            p.fail("strategy must be signoff or periodic");
        }
        c.strategy = *s;
    } else {
        p.fail("unknown constant '" + key + "'");
    }
}

void set_device_key(DeviceSpec& d, const std::string& key, const std::string& value, const Parser& p)
{
    if (key == "capacity") {
        d.capacity = p.integer<std::uint32_t>(value, key);
    } else if (key == "position") {
        if (value == "random") {
            d.position.reset();
        } else {
            d.position = p.position(value);
        }
    } else if (key == "mobility") {
        d.mobility = p.mobility(value);
    } else if (key == "itinerary") {
        d.declared = p.itinerary(words(value));
    } else if (key == "knows") {
        d.knows.clear();
        if (value != "-") {
            for (const auto& part : split(value, ',')) {
                d.knows.push_back(p.integer<MarketId>(trim(part), "market id"));
            }
        }
    } else {
        p.fail("unknown device key '" + key + "'");
    }
}

WorkloadEvent parse_workload_line(const std::vector<std::string>& toks, const Parser& p)
{
    if (toks.size() < 3 || toks[0] != "at") {
        p.fail("workload lines look like: at <time> <verb> key=value...");
    }
    WorkloadEvent ev;
    ev.at = p.integer<SimTime>(toks[1], "time");
    auto verb = parse_verb(toks[2]);
    if (!verb) {
        p.fail("unknown workload verb '" + toks[2] + "'");
    }
    ev.verb = *verb;
    bool have_device = false;
    bool have_item = false;
    bool have_query = false;
    for (std::size_t i = 3; i < toks.size(); ++i) {
        auto [key, value] = p.key_value(toks[i]);
        if (key == "device") {
            ev.device = p.integer<DeviceId>(value, key);
            have_device = true;
        } else if (key == "item") {
            ev.item.id = p.integer<ItemId>(value, key);
            have_item = true;
        } else if (key == "tag" && (ev.verb == Verb::publish || ev.verb == Verb::put)) {
            ev.item.type_tag = value;
        } else if (key == "tag") {
            ev.predicate.type_tag = value;
        } else if (key == "items") {
            ev.predicate.item_ids = p.id_list(value);
        } else if (key == "size") {
            ev.item.size = p.integer<std::uint32_t>(value, key);
        } else if (key == "lifetime") {
            if (value == "inf") {
                ev.item.lifetime.reset();
            } else {
                ev.item.lifetime = p.integer<SimTime>(value, key);
            }
        } else if (key == "degree") {
            ev.item.replication_degree = p.integer<std::uint32_t>(value, key);
        } else if (key == "importance") {
            auto imp = parse_importance(value);
            if (!imp) {
                p.fail("importance must be low, normal or high");
            }
            ev.item.importance = *imp;
        } else if (key == "payload") {
            ev.item.payload = value;
        } else if (key == "policy") {
            auto pol = parse_policy(value);
            if (!pol) {
                p.fail("policy must be best-fit-type or nearest-market");
            }
            ev.policy = *pol;
        } else if (key == "market") {
            ev.market = p.integer<MarketId>(value, key);
        } else if (key == "id") {
            ev.query = p.integer<QueryId>(value, key);
            have_query = true;
        } else if (key == "hops") {
            ev.hop_limit = p.integer<std::uint32_t>(value, key);
        } else if (key == "timeout") {
            ev.timeout = p.integer<SimTime>(value, key);
        } else if (key == "active") {
            ev.active_for = p.integer<SimTime>(value, key);
        } else if (key == "expected") {
            ev.expected = p.integer<std::uint32_t>(value, key);
        } else {
            p.fail("unknown workload key '" + key + "'");
        }
    }
    if (!have_device) {
        p.fail("workload event needs device=");
    }
    bool item_verb = ev.verb == Verb::publish || ev.verb == Verb::put;
    bool query_verb = ev.verb == Verb::query || ev.verb == Verb::sync;
    if (item_verb && !have_item) {
        p.fail(std::string(to_string(ev.verb)) + " needs item=");
    }
    if (query_verb && !have_query) {
        p.fail(std::string(to_string(ev.verb)) + " needs id=");
    }
    if (ev.verb == Verb::query && !ev.market) {
        p.fail("query needs market=");
    }
    if (item_verb) {
        ev.item.created_at = ev.at;
        ev.item.origin = ev.device;
        try {
            ev.item.validate();
        } catch (const std::invalid_argument& e) {
            p.fail(e.what());
        }
    }
    return ev;
}

} // namespace

ScenarioError::ScenarioError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line)
{
}

const MarketSpec* Scenario::market(MarketId id) const
{
    for (const auto& m : markets) {
        if (m.id == id) {
            return &m;
        }
    }
    return nullptr;
}

Scenario parse_scenario(std::istream& in)
{
    Scenario sc;
    enum class Section { none, scenario, constants, market, devices, workload };
    Section section = Section::none;
    std::map<DeviceId, DeviceSpec> devices;
    std::vector<DeviceId> current_devices;
    MarketSpec* current_market = nullptr;
    std::map<MarketId, bool> core_given;
    std::vector<std::pair<std::size_t, WorkloadEvent>> workload;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        Parser p(lineno);
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                p.fail("unterminated section header");
            }
            auto head = words(line.substr(1, line.size() - 2));
            if (head.empty()) {
                p.fail("empty section header");
            }
            current_market = nullptr;
            current_devices.clear();
            if (head[0] == "scenario" && head.size() == 1) {
                section = Section::scenario;
            } else if (head[0] == "constants" && head.size() == 1) {
                section = Section::constants;
            } else if (head[0] == "workload" && head.size() == 1) {
                section = Section::workload;
            } else if (head[0] == "market" && head.size() == 2) {
                section = Section::market;
                MarketId id = p.integer<MarketId>(head[1], "market id");
                if (sc.market(id)) {
                    p.fail("duplicate market " + head[1]);
                }
                sc.markets.push_back(MarketSpec{id, {}, 0.0, 0.0});
                current_market = &sc.markets.back();
                core_given[id] = false;
            } else if ((head[0] == "device" || head[0] == "devices") && head.size() == 2) {
                section = Section::devices;
                auto range = split(head[1], '-');
                if (range.size() > 2 || (head[0] == "device" && range.size() != 1)) {
                    p.fail("bad device id or range '" + head[1] + "'");
                }
                DeviceId lo = p.integer<DeviceId>(range[0], "device id");
                DeviceId hi = range.size() == 2 ? p.integer<DeviceId>(range[1], "device id") : lo;
                if (hi < lo) {
                    p.fail("empty device range");
                }
                for (DeviceId id = lo; id <= hi; ++id) {
                    if (devices.count(id)) {
                        p.fail("duplicate device " + std::to_string(id));
                    }
                    DeviceSpec d;
                    d.id = id;
                    devices.emplace(id, d);
                    current_devices.push_back(id);
                }
            } else {
                p.fail("unknown section '" + line + "'");
            }
            continue;
        }
        if (section == Section::workload) {
            workload.emplace_back(lineno, parse_workload_line(words(line), p));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            p.fail("expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        switch (section) {
        case Section::none:
            p.fail("key outside of any section");
        case Section::scenario:
            if (key == "seed") {
                sc.seed = p.integer<std::uint64_t>(value, key);
            } else if (key == "world") {
                auto wh = words(value);
                if (wh.size() != 2) {
                    p.fail("world needs width and height");
                }
                sc.bounds = Bounds{p.real(wh[0], "width"), p.real(wh[1], "height")};
            } else if (key == "range") {
                sc.range = p.real(value, key);
            } else if (key == "horizon") {
                sc.horizon = p.integer<SimTime>(value, key);
            } else {
                p.fail("unknown scenario key '" + key + "'");
            }
            break;
        case Section::constants:
            set_constant(sc.constants, key, value, p);
            break;
        case Section::market:
            if (key == "center") {
                current_market->center = p.position(value);
            } else if (key == "radius") {
                current_market->radius = p.real(value, key);
            } else if (key == "core_radius") {
                current_market->core_radius = p.real(value, key);
                core_given[current_market->id] = true;
            } else {
                p.fail("unknown market key '" + key + "'");
            }
            break;
        case Section::devices:
            for (DeviceId id : current_devices) {
                set_device_key(devices.at(id), key, value, p);
            }
            break;
        case Section::workload:
            break;
        }
    }
    for (auto& m : sc.markets) {
        if (!core_given[m.id]) {
            m.core_radius = m.radius / 4.0;
        }
    }
    for (auto& [id, d] : devices) {
        sc.devices.push_back(std::move(d));
    }
    std::stable_sort(workload.begin(), workload.end(),
                     [](const auto& a, const auto& b) { return a.second.at < b.second.at; });
    for (auto& [line, ev] : workload) {
        sc.workload.push_back(std::move(ev));
    }
    validate_scenario(sc);
    return sc;
}

Scenario parse_scenario_text(const std::string& text)
{
    std::istringstream in(text);
    return parse_scenario(in);
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError(0, "cannot open scenario file '" + path + "'");
    }
    return parse_scenario(in);
}

void validate_scenario(const Scenario& sc)
{
    std::vector<std::string> problems;
    const Constants& c = sc.constants;
    if (!(sc.bounds.width > 0.0) || !(sc.bounds.height > 0.0)) {
        problems.push_back("world size must be positive");
    }
    if (!(sc.range > 0.0)) {
        problems.push_back("range must be positive");
    }
    if (sc.horizon == 0) {
        problems.push_back("horizon must be positive");
    }
    if (c.t_probe == 0 || c.t_center == 0 || c.t_heartbeat == 0 || c.t_ack == 0 || c.hop_latency == 0 ||
        c.ttl == 0 || c.chunk_size == 0 || !(c.carry_margin > 0.0) || c.carry_period == 0 ||
        c.prediction_horizon == 0 || c.sweep_period == 0) {
        problems.push_back("all constants must be positive");
    }
    for (const auto& m : sc.markets) {
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            problems.push_back("market " + std::to_string(m.id) + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i < sc.devices.size(); ++i) {
        const DeviceSpec& d = sc.devices[i];
        if (d.id != i) {
            problems.push_back("device ids must be contiguous from 0 (missing " + std::to_string(i) + ")");
            break;
        }
        if (d.position && !sc.bounds.contains(*d.position)) {
            problems.push_back("device " + std::to_string(d.id) + " starts outside the world");
        }
        for (MarketId m : d.knows) {
            if (!sc.market(m)) {
                problems.push_back("device " + std::to_string(d.id) + " knows undefined market " + std::to_string(m));
            }
        }
    }
    std::set<ItemId> items;
    std::set<QueryId> queries;
    for (const auto& ev : sc.workload) {
        std::string where = "workload at " + std::to_string(ev.at) + " " + std::string(to_string(ev.verb));
        if (ev.device >= sc.devices.size()) {
            problems.push_back(where + ": undefined device " + std::to_string(ev.device));
        }
        if (ev.market && !sc.market(*ev.market)) {
            problems.push_back(where + ": undefined market " + std::to_string(*ev.market));
        }
        if (ev.verb == Verb::publish || ev.verb == Verb::put) {
            if (!items.insert(ev.item.id).second) {
                problems.push_back(where + ": duplicate item " + std::to_string(ev.item.id));
            }
        }
        if (ev.verb == Verb::query || ev.verb == Verb::sync) {
            if (!queries.insert(ev.query).second) {
                problems.push_back(where + ": duplicate query " + std::to_string(ev.query));
            }
        }
        if (ev.verb == Verb::sync && ev.hop_limit > 0 && ev.timeout == 0) {
            problems.push_back(where + ": timeout must be positive when hops > 0");
        }
        if (ev.verb == Verb::query && ev.active_for == 0) {
            problems.push_back(where + ": active must be positive");
        }
    }
    if (!problems.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& p : problems) {
            msg += "\n  " + p;
        }
        throw ScenarioError(0, msg);
    }
}

namespace {

std::string itinerary_text(const Itinerary& it)
{
    std::string out;
    for (const auto& w : it.waypoints) {
        if (!out.empty()) {
            out += ' ';
        }
        out += std::to_string(w.arrive_at) + "@" + fmt(w.at.x) + "," + fmt(w.at.y);
    }
    return out;
}

std::string mobility_text(const MobilityModel& m)
{
    if (std::holds_alternative<Stationary>(m)) {
        return "stationary";
    }
    if (const auto* rw = std::get_if<RandomWaypoint>(&m)) {
        return "random-waypoint speed=" + fmt(rw->speed_min) + ":" + fmt(rw->speed_max) +
               " pause=" + std::to_string(rw->pause_min) + ":" + std::to_string(rw->pause_max);
    }
    return "scripted " + itinerary_text(std::get<Scripted>(m).itinerary);
}

std::string ids_text(const std::set<ItemId>& ids)
{
    std::string out;
    for (ItemId id : ids) {
        if (!out.empty()) {
            out += ',';
        }
        out += std::to_string(id);
    }
    return out.empty() ? "-" : out;
}

} // namespace

void write_scenario(std::ostream& out, const Scenario& sc)
{
    const Constants& c = sc.constants;
    out << "[scenario]\n"
        << "seed = " << sc.seed << "\n"
        << "world = " << fmt(sc.bounds.width) << " " << fmt(sc.bounds.height) << "\n"
        << "range = " << fmt(sc.range) << "\n"
        << "horizon = " << sc.horizon << "\n\n";
    out << "[constants]\n"
        << "t_probe = " << c.t_probe << "\n"
        << "t_center = " << c.t_center << "\n"
        << "t_heartbeat = " << c.t_heartbeat << "\n"
        << "t_ack = " << c.t_ack << "\n"
        << "hop_latency = " << c.hop_latency << "\n"
        << "ttl = " << c.ttl << "\n"
        << "chunk_size = " << c.chunk_size << "\n"
        << "carry_margin = " << fmt(c.carry_margin) << "\n"
        << "carry_period = " << c.carry_period << "\n"
        << "prediction_horizon = " << c.prediction_horizon << "\n"
        << "sweep_period = " << c.sweep_period << "\n"
        << "strategy = " << to_string(c.strategy) << "\n";
    for (const auto& m : sc.markets) {
        out << "\n[market " << m.id << "]\n"
            << "center = " << fmt(m.center.x) << " " << fmt(m.center.y) << "\n"
            << "radius = " << fmt(m.radius) << "\n"
            << "core_radius = " << fmt(m.core_radius) << "\n";
    }
    for (const auto& d : sc.devices) {
        out << "\n[device " << d.id << "]\n"
            << "capacity = " << d.capacity << "\n"
            << "position = " << (d.position ? fmt(d.position->x) + " " + fmt(d.position->y) : "random") << "\n"
            << "mobility = " << mobility_text(d.mobility) << "\n";
        if (d.declared) {
            out << "itinerary = " << itinerary_text(*d.declared) << "\n";
        }
        std::string knows;
        for (MarketId m : d.knows) {
            if (!knows.empty()) {
                knows += ',';
            }
            knows += std::to_string(m);
        }
        out << "knows = " << (knows.empty() ? "-" : knows) << "\n";
    }
    out << "\n[workload]\n";
    for (const auto& ev : sc.workload) {
        out << "at " << ev.at << " " << to_string(ev.verb) << " device=" << ev.device;
        switch (ev.verb) {
        case Verb::publish:
        case Verb::put:
            out << " item=" << ev.item.id << " tag=" << ev.item.type_tag << " size=" << ev.item.size
                << " lifetime=" << (ev.item.lifetime ? std::to_string(*ev.item.lifetime) : "inf");
            out << " degree=" << ev.item.replication_degree << " importance=" << to_string(ev.item.importance);
            if (ev.verb == Verb::publish) {
                out << " policy=" << to_string(ev.policy);
                if (ev.market) {
                    out << " market=" << *ev.market;
                }
            }
            if (!ev.item.payload.empty()) {
                out << " payload=" << ev.item.payload;
            }
            break;
        case Verb::query:
        case Verb::sync:
            out << " id=" << ev.query;
            if (ev.predicate.type_tag) {
                out << " tag=" << *ev.predicate.type_tag;
            }
            if (!ev.predicate.item_ids.empty()) {
                out << " items=" << ids_text(ev.predicate.item_ids);
            }
            if (ev.verb == Verb::query) {
                out << " market=" << *ev.market << " active=" << ev.active_for;
                if (ev.expected) {
                    out << " expected=" << *ev.expected;
                }
            } else {
                out << " hops=" << ev.hop_limit << " timeout=" << ev.timeout;
            }
            break;
        default:
            break;
        }
        out << "\n";
    }
}

std::string scenario_to_text(const Scenario& scenario)
{
    std::ostringstream out;
    write_scenario(out, scenario);
    return out.str();
}

void apply_override(Scenario& sc, const std::string& key, const std::string& value)
{
    Parser p(0);
    if (key == "seed") {
        sc.seed = p.integer<std::uint64_t>(value, key);
    } else if (key == "range") {
        sc.range = p.real(value, key);
    } else if (key == "horizon") {
        sc.horizon = p.integer<SimTime>(value, key);
    } else {
        set_constant(sc.constants, key, value, p);
    }
    validate_scenario(sc);
}

} // namespace ads
