#include "mcsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "mcsim/kernels.hpp"

namespace mcsim {

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "completed";
        case RunStatus::Collision: return "collision";
        case RunStatus::Timeout: return "timeout";
    }
    return "?";
}

void collect_occupants(const World& w,
                       const std::optional<LaneChangeMotion>& ego_change,
                       int skip_id, double vehicle_length,
                       std::vector<Occupant>& out) {
    out.clear();
    for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
        const VehicleState& veh = w.vehicles[i];
        if (veh.id == skip_id) continue;
        Occupant o{veh.s, vehicle_length, veh.lane, veh.v,
                   static_cast<int>(i)};
        out.push_back(o);
        if (veh.id == 0 && ego_change) {
            // mid-change the ego blocks both straddled lanes
            int other = ego_change->from_lane == veh.lane
                            ? ego_change->to_lane
                            : ego_change->from_lane;
            if (other != veh.lane) {
                o.lane = other;
                out.push_back(o);
            }
        }
    }
    sort_occupants(out);
}

LaneObservation observe_lane(const World& w, const VehicleState& ego, int lane,
                             std::span<const Occupant> others,
                             const SimConfig& cfg) {
    double qs = std::min(ego.s, w.road.total_length());
    RoadAttributes attrs = w.road.query(qs);
    bool found = false;
    double best_gap = 0.0;
    double best_v = 0.0;
    for (const Occupant& o : others) {
        if (o.lane != lane || o.s <= ego.s) continue;
        double gap = o.s - o.length - ego.s;
        if (gap > cfg.sensor_range) continue;
        if (!found || gap < best_gap) {
            found = true;
            best_gap = gap;
            best_v = o.v;
        }
    }
    if (found)
        return LaneObservation{true, best_gap, best_v, attrs.speed_limit,
                               attrs.grade, attrs.curvature};
    return LaneObservation::free_lane(attrs.speed_limit, attrs.grade,
                                      attrs.curvature, cfg.d_free);
}

Observations observe_lanes(const World& w, const VehicleState& ego,
                           std::span<const Occupant> others,
                           const SimConfig& cfg) {
    Observations obs;
    obs.current = observe_lane(w, ego, ego.lane, others, cfg);
    double qs = std::min(ego.s, w.road.total_length());
    auto [left, right] = w.road.neighbor_lanes(LanePosition{qs, ego.lane});
    if (left) obs.left = observe_lane(w, ego, *left, others, cfg);
    if (right) obs.right = observe_lane(w, ego, *right, others, cfg);
    return obs;
}

namespace {

double freeflow_trip_time(const RoadNetwork& road, const CruiseConfig& cfg) {
    double t = 0.0;
    for (const RoadSegment& seg : road.segments()) {
        double curve_cap =
            std::sqrt(cfg.a_lat_max / std::max(std::abs(seg.curvature), 1e-12));
        double v = std::min(seg.speed_limit, curve_cap);
        t += seg.length / v;
    }
    return t;
}

std::string controller_name(ControllerType c) {
    switch (c) {
        case ControllerType::MultiCruise: return "multicruise";
        case ControllerType::LaneFollowing: return "lane_following";
        case ControllerType::Ambient: return "ambient";
    }
    return "?";
}

}  // namespace

Simulation::Simulation(const Scenario& sc, ControllerType ego_controller)
    : scenario_(sc),
      world_{build_road(sc), {}, 0.0, sc.seed},
      controller_(ego_controller) {
    if (ego_controller == ControllerType::Ambient)
        throw ScenarioError({"ego.controller: ambient is not a valid ego "
                             "controller"});

    if (sc.fuel_table_path)
        fuel_ = FuelMap::load_table_csv(*sc.fuel_table_path);
    else
        fuel_ = FuelMap::polynomial(sc.fuel);

    VehicleState ego;
    ego.id = 0;
    ego.s = sc.ego.s;
    ego.lane = sc.ego.lane;
    ego.v = sc.ego.v;
    ego.controller = ego_controller;
    world_.vehicles.push_back(ego);

    auto add_ambient = [&](const VehicleSpec& spec) {
        VehicleState v;
        v.id = static_cast<int>(world_.vehicles.size());
        v.s = spec.s;
        v.lane = spec.lane;
        v.v = spec.v;
        v.controller = ControllerType::Ambient;
        v.desired_speed = spec.desired_speed;
        world_.vehicles.push_back(v);
    };
    for (const VehicleSpec& spec : sc.vehicles) add_ambient(spec);
    if (sc.ambient)
        for (const VehicleSpec& spec : expand_ambient(sc)) add_ambient(spec);

    // reject spawns that already overlap in-lane
    collect_occupants(world_, std::nullopt, -1, sc.sim.vehicle_length,
                      occupants_);
    for (std::size_t k = 1; k < occupants_.size(); ++k) {
        const Occupant& a = occupants_[k - 1];
        const Occupant& b = occupants_[k];
        if (a.lane == b.lane && b.s - b.length - a.s < 0.0) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "vehicles: initial same-lane overlap between "
                          "vehicle %d and vehicle %d in lane %d",
                          a.vehicle, b.vehicle, a.lane);
            throw ScenarioError({buf});
        }
    }

    max_time_ = sc.sim.max_time > 0.0
                    ? sc.sim.max_time
                    : 3.0 * freeflow_trip_time(world_.road, sc.cruise);

    policy_state_.route_lane = ego.lane;
    start_s_ = ego.s;
    prev_s_ = ego.s;
    prev_time_ = 0.0;
    prev_rate_ = fuel_.rate(ego.v, 0.0);
    trace_.initial = StepRecord{0.0,   ego.s, ego.lane,   ego.v,
                                0.0,   0.0,   prev_rate_, false,
                                0.0,   0.0,   0.0,        0.0,
                                Action::Stay, Reason::BelowThreshold};
    trace_.summary.seed = sc.seed;
    trace_.summary.controller = controller_name(ego_controller);
    if (sc.sim.record_vehicles)
        trace_.snapshots.push_back({0.0, world_.vehicles});
}

double Simulation::ego_command(const Observations& obs,
                               std::span<const Occupant> others,
                               PolicyOutput& out) {
    VehicleState& ego = world_.vehicles[0];
    if (controller_ == ControllerType::MultiCruise) {
        PolicyInput pin;
        pin.ego = ego;
        pin.left = obs.left;
        pin.current = obs.current;
        pin.right = obs.right;
        pin.others = others;
        pin.d_nav = world_.road.distance_to_navigation_end(
            std::min(ego.s, world_.road.total_length()));
        pin.now = world_.time;
        pin.dt = scenario_.sim.dt;
        pin.lane_change_duration = scenario_.sim.lane_change_duration;
        out = policy_step(pin, policy_state_, scenario_.policy,
                          scenario_.cruise, fuel_);
        if (out.initiated) {
            const LaneChangeMotion& m = *policy_state_.active_change;
            LaneChangeEvent ev;
            ev.time = world_.time;
            ev.s = ego.s;
            ev.d_nav = pin.d_nav;
            ev.from_lane = m.from_lane;
            ev.to_lane = m.to_lane;
            ev.reason = policy_state_.last_decision.reason;
            ev.others.assign(others.begin(), others.end());
            trace_.events.push_back(std::move(ev));
        }
        return out.a_cmd;
    }
    return following_accel(ego.v, obs.current, scenario_.cruise);
}

bool Simulation::detect_collision() {
    collect_occupants(world_, policy_state_.active_change, -1,
                      scenario_.sim.vehicle_length, occupants_);
    for (std::size_t k = 1; k < occupants_.size(); ++k) {
        const Occupant& a = occupants_[k - 1];
        const Occupant& b = occupants_[k];
        if (a.lane != b.lane || a.vehicle == b.vehicle) continue;
        if (b.s - b.length - a.s < -1e-9) {
            trace_.collision =
                CollisionEvent{world_.time, a.vehicle, b.vehicle, a.lane};
            return true;
        }
    }
    return false;
}

void Simulation::finish(RunStatus status, double trip_time, double fuel,
                        double distance) {
    done_ = true;
    Summary& s = trace_.summary;
    s.status = status;
    s.trip_time_s = trip_time;
    s.consumed_fuel_g = fuel;
    s.distance_m = distance;
    s.lane_changes = static_cast<int>(trace_.events.size());
}

bool Simulation::step() {
    if (done_) return false;
    const SimConfig& sim = scenario_.sim;
    const double dt = sim.dt;
    const double t = world_.time;
    const double route_len = world_.road.total_length();
    VehicleState& ego = world_.vehicles[0];

    collect_occupants(world_, policy_state_.active_change, -1,
                      sim.vehicle_length, occupants_);
    collect_occupants(world_, std::nullopt, 0, sim.vehicle_length, others_);

    Observations obs = observe_lanes(world_, ego, others_, sim);
    PolicyOutput pout;
    double a_cmd = ego_command(obs, others_, pout);

    ambient_accel_.resize(world_.vehicles.size());
    AmbientPassInput kin;
    kin.vehicles = world_.vehicles;
    kin.sorted_occupants = occupants_;
    kin.road = &world_.road;
    kin.cruise = &scenario_.cruise;
    kin.sensor_range = sim.sensor_range;
    kin.d_free = sim.d_free;
    ambient_accel_parallel(kin, ambient_accel_);

    for (std::size_t i = 0; i < world_.vehicles.size(); ++i) {
        double a = i == 0 ? a_cmd : ambient_accel_[i];
        world_.vehicles[i] = step_longitudinal(world_.vehicles[i], a, dt);
    }
    world_.time = t + dt;

    if (policy_state_.active_change) {
        const LaneChangeMotion& m = *policy_state_.active_change;
        double end = m.start_time + m.duration;
        if (world_.time >= end - 1e-9) {
            ego.lane = m.to_lane;
            ego.lateral_offset = 0.0;
            ego.yaw = 0.0;
        } else {
            LateralSample ls =
                lateral_profile(m, world_.time, sim.lane_width, ego.v);
            double delta =
                m.to_lane > m.from_lane ? sim.lane_width : -sim.lane_width;
            if (ego.lane == m.from_lane &&
                world_.time - m.start_time >= 0.5 * m.duration)
                ego.lane = m.to_lane;
            ego.lateral_offset =
                ego.lane == m.to_lane ? ls.offset - delta : ls.offset;
            ego.yaw = ls.yaw;
        }
    }

    StepRecord rec;
    rec.time = world_.time;
    rec.s = ego.s;
    rec.lane = ego.lane;
    rec.v = ego.v;
    rec.a = ego.a;
    rec.yaw = ego.yaw;
    rec.fuel_rate = fuel_.rate(ego.v, ego.a);
    if (pout.evaluated) {
        const Decision& d = policy_state_.last_decision;
        rec.evaluated = true;
        rec.c_left = d.costs.c_left;
        rec.c_current = d.costs.c_current;
        rec.c_right = d.costs.c_right;
        rec.c_thr = d.c_thr;
        rec.action = d.action;
        rec.reason = d.reason;
    }
    trace_.records.push_back(rec);
    trace_.summary.yaw_max_abs =
        std::max(trace_.summary.yaw_max_abs, std::abs(ego.yaw));
    if (sim.record_vehicles)
        trace_.snapshots.push_back({world_.time, world_.vehicles});

    if (ego.s >= route_len && ego.s > prev_s_) {
        // interpolate the crossing inside this step
        double theta = (route_len - prev_s_) / (ego.s - prev_s_);
        double rate_x = prev_rate_ + theta * (rec.fuel_rate - prev_rate_);
        double fuel = fuel_acc_ + 0.5 * (prev_rate_ + rate_x) * theta * dt;
        finish(RunStatus::Completed, prev_time_ + theta * dt, fuel,
               route_len - start_s_);
        return false;
    }

    fuel_acc_ += 0.5 * (prev_rate_ + rec.fuel_rate) * dt;
    prev_rate_ = rec.fuel_rate;
    prev_s_ = ego.s;
    prev_time_ = world_.time;

    if (detect_collision()) {
        finish(RunStatus::Collision, world_.time, fuel_acc_,
               ego.s - start_s_);
        return false;
    }
    if (world_.time >= max_time_ - 1e-9) {
        finish(RunStatus::Timeout, world_.time, fuel_acc_, ego.s - start_s_);
        return false;
    }
    return true;
}

void Simulation::run() {
    while (step()) {
    }
}

SimTrace run_scenario(const Scenario& sc, ControllerType ego_controller) {
    Simulation sim(sc, ego_controller);
    sim.run();
    return sim.take_trace();
}

}  // namespace mcsim
