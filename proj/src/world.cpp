// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/world.hpp"

#include <stdexcept>

namespace ads {

void Itinerary::validate() const
{
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (waypoints[i].arrive_at <= waypoints[i - 1].arrive_at) {
            throw std::invalid_argument("itinerary waypoint times must strictly increase");
        }
    }
}

Position Itinerary::position_at(SimTime t) const
{
    if (waypoints.empty()) {
        throw std::logic_error("position_at on empty itinerary");
    }
    if (t <= waypoints.front().arrive_at) {
        return waypoints.front().at;
    }
    if (t >= waypoints.back().arrive_at) {
        return waypoints.back().at;
    }
    auto next = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                 [](SimTime v, const Waypoint& w) { return v < w.arrive_at; });
    const Waypoint& b = *next;
    const Waypoint& a = *(next - 1);
    double f = static_cast<double>(t - a.arrive_at) / static_cast<double>(b.arrive_at - a.arrive_at);
    return Position{a.at.x + f * (b.at.x - a.at.x), a.at.y + f * (b.at.y - a.at.y)};
}

World::World(Bounds bounds, double radio_range) : bounds_(bounds), range_(radio_range)
{
    if (!(radio_range > 0.0)) {
        throw std::invalid_argument("radio range must be positive");
    }
}

DeviceId World::add_device(Position initial, MobilityModel model, std::optional<Itinerary> declared)
{
    DeviceState s;
    s.pos = bounds_.clamp(initial);
    if (auto* scripted = std::get_if<Scripted>(&model)) {
        scripted->itinerary.validate();
        auto& wps = scripted->itinerary.waypoints;
        if (wps.empty() || wps.front().arrive_at > now_) {
            wps.insert(wps.begin(), Waypoint{now_, s.pos});
        }
        scripted->itinerary.source = ItinerarySource::declared;
        if (!declared) {
            declared = scripted->itinerary;
        }
        s.pos = bounds_.clamp(scripted->itinerary.position_at(now_));
    }
    if (declared) {
        declared->validate();
        declared->source = ItinerarySource::declared;
    }
    s.model = std::move(model);
    s.declared = std::move(declared);
    s.history[0] = Sample{now_, s.pos};
    s.samples = 1;
    devices_.push_back(std::move(s));
    invalidate();
    return static_cast<DeviceId>(devices_.size() - 1);
}

World::DeviceState& World::at(DeviceId id)
{
    if (id >= devices_.size()) {
        throw std::out_of_range("unknown device id " + std::to_string(id));
    }
    return devices_[id];
}

const World::DeviceState& World::at(DeviceId id) const
{
    if (id >= devices_.size()) {
        throw std::out_of_range("unknown device id " + std::to_string(id));
    }
    return devices_[id];
}

std::vector<DeviceId> World::step_mobility(SimTime dt, RngStreams& rng)
{
    if (dt < 1) {
        throw std::invalid_argument("step_mobility requires dt >= 1");
    }
    std::vector<DeviceId> new_legs;
    for (SimTime tick = 0; tick < dt; ++tick) {
        ++now_;
        for (DeviceId id = 0; id < devices_.size(); ++id) {
            DeviceState& s = devices_[id];
            if (!s.alive) {
                continue;
            }
            if (auto* rw = std::get_if<RandomWaypoint>(&s.model)) {
                if (now_ > s.pause_until) {
                    if (!s.target) {
                        s.target = Position{rng.uniform(streams::mobility, 0.0, bounds_.width),
                                            rng.uniform(streams::mobility, 0.0, bounds_.height)};
                        s.speed = rng.uniform(streams::mobility, rw->speed_min, rw->speed_max);
                        new_legs.push_back(id);
                    }
                    double remaining = distance(s.pos, *s.target);
                    if (s.speed < remaining) {
                        double f = s.speed / remaining;
                        s.pos.x += f * (s.target->x - s.pos.x);
                        s.pos.y += f * (s.target->y - s.pos.y);
                    } else {
                        s.pos = *s.target;
                        s.target.reset();
                        s.pause_until = now_ + rng.uniform_int(streams::mobility, rw->pause_min, rw->pause_max);
                    }
                }
            } else if (auto* sc = std::get_if<Scripted>(&s.model)) {
                s.pos = sc->itinerary.position_at(now_);
            }
            s.pos = bounds_.clamp(s.pos);
            observe(id, now_, s.pos);
        }
    }
    invalidate();
    return new_legs;
}

const Position& World::position(DeviceId id) const
{
    return at(id).pos;
}

void World::set_position(DeviceId id, Position p)
{
    DeviceState& s = at(id);
    s.pos = bounds_.clamp(p);
    observe(id, now_, s.pos);
    invalidate();
}

void World::observe(DeviceId id, SimTime t, Position p)
{
    DeviceState& s = at(id);
    if (s.samples > 0 && s.history[(s.samples - 1) % kHistory].t == t) {
        s.history[(s.samples - 1) % kHistory].p = p;
        return;
    }
    s.history[s.samples % kHistory] = Sample{t, p};
    ++s.samples;
}

void World::rebuild_cache() const
{
    std::size_t n = devices_.size();
    neighbor_cache_.assign(n, {});
    double r2 = range_ * range_;
    for (DeviceId a = 0; a < n; ++a) {
        if (!devices_[a].alive) {
            continue;
        }
        for (DeviceId b = a + 1; b < n; ++b) {
            if (devices_[b].alive && distance_sq(devices_[a].pos, devices_[b].pos) <= r2) {
                neighbor_cache_[a].push_back(b);
                neighbor_cache_[b].push_back(a);
            }
        }
    }
    // Pushes happen in ascending order of the other id for both endpoints.
    cache_valid_ = true;
}

const std::vector<DeviceId>& World::neighbors(DeviceId id) const
{
    (void)at(id);
    if (!cache_valid_) {
        rebuild_cache();
    }
    return neighbor_cache_[id];
}

bool World::linked(DeviceId a, DeviceId b) const
{
    if (a == b || !alive(a) || !alive(b)) {
        return false;
    }
    return distance_sq(position(a), position(b)) <= range_ * range_;
}

bool World::alive(DeviceId id) const
{
    return at(id).alive;
}

void World::set_alive(DeviceId id, bool alive)
{
    at(id).alive = alive;
    invalidate();
}

const std::optional<Itinerary>& World::declared_itinerary(DeviceId id) const
{
    return at(id).declared;
}

const MobilityModel& World::mobility(DeviceId id) const
{
    return at(id).model;
}

Prediction World::predict_position(DeviceId id, SimTime t) const
{
    const DeviceState& s = at(id);
    if (s.declared) {
        return Prediction{bounds_.clamp(s.declared->position_at(t)), Confidence::declared};
    }
    if (s.samples < 2) {
        return Prediction{s.pos, Confidence::inferred};
    }
    std::size_t k = std::min(s.samples, kHistory);
    const Sample& newest = s.history[(s.samples - 1) % kHistory];
    const Sample& oldest = s.history[(s.samples - k) % kHistory];
    if (newest.t == oldest.t || t <= newest.t) {
        return Prediction{newest.p, Confidence::inferred};
    }
    double span = static_cast<double>(newest.t - oldest.t);
    double ahead = static_cast<double>(t - newest.t);
    Position p{newest.p.x + (newest.p.x - oldest.p.x) / span * ahead,
               newest.p.y + (newest.p.y - oldest.p.y) / span * ahead};
    return Prediction{bounds_.clamp(p), Confidence::inferred};
}

Itinerary World::itinerary_for(DeviceId id, SimTime horizon) const
{
    const DeviceState& s = at(id);
    if (s.declared) {
        return *s.declared;
    }
    Itinerary it;
    it.source = ItinerarySource::inferred;
    SimTime step = std::max<SimTime>(horizon, 1);
    for (SimTime k = 0; k < 4; ++k) {
        SimTime t = now_ + k * step;
        it.waypoints.push_back(Waypoint{t, predict_position(id, t).position});
    }
    return it;
}

} // namespace ads
