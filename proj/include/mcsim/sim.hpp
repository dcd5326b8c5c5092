#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcsim/policy.hpp"
#include "mcsim/road.hpp"
#include "mcsim/scenario.hpp"
#include "mcsim/vehicle.hpp"

namespace mcsim {

enum class RunStatus { Completed, Collision, Timeout };
const char* to_string(RunStatus s);

// Ego sample per step; cost/decision fields are filled only on steps where
// the policy re-evaluated.
struct StepRecord {
    double time = 0.0;
    double s = 0.0;
    int lane = 0;
    double v = 0.0;
    double a = 0.0;
    double yaw = 0.0;
    double fuel_rate = 0.0;
    bool evaluated = false;
    double c_left = 0.0;
    double c_current = 0.0;
    double c_right = 0.0;
    double c_thr = 0.0;
    Action action = Action::Stay;
    Reason reason = Reason::BelowThreshold;
};

struct LaneChangeEvent {
    double time = 0.0;
    double s = 0.0;
    double d_nav = 0.0;
    int from_lane = 0;
    int to_lane = 0;
    Reason reason = Reason::ArgminNeighbor;
    // occupants (excluding the ego) at initiation, for later auditing
    std::vector<Occupant> others;
};

struct CollisionEvent {
    double time = 0.0;
    int vehicle_a = 0;
    int vehicle_b = 0;
    int lane = 0;
};

struct Summary {
    double consumed_fuel_g = 0.0;
    double distance_m = 0.0;
    double trip_time_s = 0.0;
    int lane_changes = 0;
    double yaw_max_abs = 0.0;
    RunStatus status = RunStatus::Completed;
    std::uint64_t seed = 0;
    std::string controller;
};

// Per-step snapshot of every vehicle (kept only when record_vehicles is on).
struct VehicleSnapshot {
    double time = 0.0;
    std::vector<VehicleState> vehicles;
};

struct SimTrace {
    StepRecord initial; // ego state at t = 0 (no decision fields)
    std::vector<StepRecord> records; // one per step
    std::vector<LaneChangeEvent> events;
    std::optional<CollisionEvent> collision;
    std::vector<VehicleSnapshot> snapshots;
    Summary summary;
};

struct World {
    RoadNetwork road;
    std::vector<VehicleState> vehicles; // index 0 is the ego
    double time = 0.0;
    std::uint64_t seed = 0;
};

// Expand the world into per-lane occupants; a vehicle mid-lane-change
// contributes an occupant in both straddled lanes. `skip_id` (usually the
// ego) is left out.
void collect_occupants(const World& w, const std::optional<LaneChangeMotion>& ego_change,
                       int skip_id, double vehicle_length,
                       std::vector<Occupant>& out);

// Nearest-occupant-ahead observation of one lane from the ego's position.
LaneObservation observe_lane(const World& w, const VehicleState& ego, int lane,
                             std::span<const Occupant> others,
                             const SimConfig& cfg);

struct Observations {
    std::optional<LaneObservation> left;
    LaneObservation current;
    std::optional<LaneObservation> right;
};

Observations observe_lanes(const World& w, const VehicleState& ego,
                           std::span<const Occupant> others,
                           const SimConfig& cfg);

// Closed-loop simulation of one scenario. Steps until the ego crosses the
// route end, a collision occurs, or max_time elapses.
class Simulation {
  public:
    Simulation(const Scenario& sc, ControllerType ego_controller);

    // Advance one step; false once the run has ended.
    bool step();

    void run();

    const World& world() const { return world_; }
    const SimTrace& trace() const { return trace_; }
    SimTrace take_trace() { return std::move(trace_); }
    double max_time() const { return max_time_; }

  private:
    void finish(RunStatus status, double trip_time, double fuel,
                double distance);
    double ego_command(const Observations& obs,
                       std::span<const Occupant> others, PolicyOutput& out);
    bool detect_collision();

    Scenario scenario_;
    World world_;
    SimTrace trace_;
    PolicyState policy_state_;
    FuelMap fuel_;
    ControllerType controller_;
    double max_time_ = 0.0;
    bool done_ = false;
    double start_s_ = 0.0;
    double fuel_acc_ = 0.0;
    double prev_rate_ = 0.0;
    double prev_s_ = 0.0;
    double prev_time_ = 0.0;
    // scratch reused across steps
    std::vector<Occupant> occupants_; // whole fleet, sorted
    std::vector<Occupant> others_;    // ego excluded, sorted
    std::vector<double> ambient_accel_;
};

SimTrace run_scenario(const Scenario& sc, ControllerType ego_controller);

} // namespace mcsim
