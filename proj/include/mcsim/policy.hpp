#pragma once

#include <optional>
#include <span>
#include <string>

#include "mcsim/cruise.hpp"
#include "mcsim/vehicle.hpp"

namespace mcsim {

struct PolicyConfig {
    double s_scale = 2.0;        // lane-change penalty scale (s in P = s*v/t)
    double c_thr_factor = 1.03;  // threshold as multiple of free-flow cost
    double c_thr_absolute = -1;  // > 0 overrides the relative threshold
    double lane_ok_factor = 1.08; // neighbor eligibility: its pre-penalty
                                  // cost must stay within this multiple of
                                  // the free-flow cost
    double switch_margin = 0.02; // neighbor must undercut current by this
    int confirm_evals = 1;       // consecutive over-threshold evaluations
                                 // required before a neighbor may win
    double d_thr = 500.0;        // m, navigation lock distance
    double t_delta_floor = 0.5;  // s, floor on elapsed-since-change
    double box_ahead = 30.0;     // m, space-check box ahead of the ego
    double box_behind = 20.0;    // m, space-check box behind the ego
    double policy_period = 1.0;  // s between decision evaluations
    double return_hold = 3.0;    // s in the excursion lane before returning
    double return_margin = 0.02; // relative cost slack for the return
    double headroom_margin = 10.0; // m, origin-lane headroom at initiation
};

// Lane-change reluctance penalty P(t_delta, v) = s * v / max(t_delta, floor).
// t_delta is the time since the last completed change; pass infinity (or any
// huge value) for "never changed", which yields 0 by definition.
double penalty(double t_delta, double v_ego, const PolicyConfig& cfg);

// Candidate-lane costs. A lane that does not exist carries +infinity and a
// zeroed breakdown.
struct LaneCosts {
    double c_left = 0.0;
    double c_current = 0.0;
    double c_right = 0.0;
    GammaBreakdown gamma_left;
    GammaBreakdown gamma_current;
    GammaBreakdown gamma_right;
    double penalty_value = 0.0; // applied to both neighbor lanes
};

/// Evaluate the three candidate lanes: Gamma of the rolled-out trajectory per
// lane, plus the reluctance penalty on the neighbors.
LaneCosts lane_costs(double v_ego, double a_ego,
                     const std::optional<LaneObservation>& left,
                     const LaneObservation& current,
                     const std::optional<LaneObservation>& right,
                     double t_delta, const PolicyConfig& pcfg,
                     const CruiseConfig& ccfg, const FuelMap& map);

enum class Action { Stay, ChangeLeft, ChangeRight };

enum class Reason {
    NavigationLock, // too close to the route end to maneuver
    BelowThreshold, // current lane is cheap enough; don't bother
    ArgminCurrent,  // evaluated, current lane still wins
    ArgminNeighbor, // a neighbor lane wins
    SpaceVeto,      // winner vetoed by the space check
    RouteReturn     // reverting to the navigation lane after an overtake
};

struct Decision {
    Action action = Action::Stay;
    Reason reason = Reason::BelowThreshold;
    LaneCosts costs;
    double c_thr = 0.0; // threshold the evaluation used
    int target_lane = 0;
};

const char* to_string(Action a);
const char* to_string(Reason r);

/// The selection gate sequence: navigation lock, cost threshold, then argmin
// over the three lanes with ties broken toward the current lane and then the
// rightmost. A neighbor is eligible only while its pre-penalty lane cost
// stays under lane_ok (the move must lead somewhere satisfactory, not merely
// less congested), and congested_evals -- the caller-tracked run of
// consecutive over-threshold evaluations including this one -- must reach
// confirm_evals. Pure function of its inputs; the space check runs
// afterwards.
Decision decide(const LaneCosts& costs, double d_nav, double c_thr,
                double lane_ok, int congested_evals, const PolicyConfig& cfg);

// Longitudinal extent of one vehicle in one lane; a mid-change vehicle
// contributes one occupant per lane it straddles.
struct Occupant {
    double s = 0.0;      // front position
    double length = 0.0; // body length behind s
    int lane = 0;
    double v = 0.0;      // owner's speed
    int vehicle = -1;    // owner's index in the world
};

// True iff no occupant of the target lane intersects the box
// [ego.s - box_behind, ego.s + box_ahead].
bool space_check(const VehicleState& ego, int target_lane,
                 std::span<const Occupant> others, const PolicyConfig& cfg);

// Mutable state the policy carries between steps.
struct PolicyState {
    int route_lane = 0; // navigation-assigned lane (the ego's start lane)
    std::optional<LaneChangeMotion> active_change;
    std::optional<double> last_change_completed_at;
    double next_eval_time = 0.0;
    int congested_evals = 0;  // consecutive evaluations above the threshold
                              // under a stable free-flow reference
    double last_c_thr = -1.0; // threshold seen by the previous evaluation
    Decision last_decision;

    double t_delta(double now) const;
};

// Snapshot of what the policy can see this step. During a maneuver the
// straddled lanes' observations are recovered from left/current/right.
struct PolicyInput {
    VehicleState ego;
    std::optional<LaneObservation> left;
    LaneObservation current;
    std::optional<LaneObservation> right;
    std::span<const Occupant> others;
    double d_nav = 0.0;
    double now = 0.0;
    double dt = 0.0;
    double lane_change_duration = 4.0;
};

struct PolicyOutput {
    Decision decision;   // last evaluated decision (carried between periods)
    bool evaluated = false;
    bool initiated = false;
    bool completed = false; // an active maneuver finished this call
    double a_cmd = 0.0;
};

/// One control step: finish a due maneuver, re-evaluate the lane decision at
// the policy period (route reversion first, then the discretionary gates,
// then the space veto), and always emit a car-following command against the
// committed lane's lead.
PolicyOutput policy_step(const PolicyInput& in, PolicyState& st,
                         const PolicyConfig& pcfg, const CruiseConfig& ccfg,
                         const FuelMap& map);

} // namespace mcsim
