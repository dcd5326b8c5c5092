#pragma once

#include <vector>

#include "mcsim/fuel.hpp"

namespace mcsim {

// What the ego can sense about one lane: the nearest vehicle ahead (if any
// inside sensor range) plus the local road attributes. A free lane carries
// the sentinel gap d_free and the lane speed limit as the phantom lead speed.
struct LaneObservation {
    bool lead_exists = false;
    double d = 0.0;      // front-to-rear gap to the lead, m
    double v_lead = 0.0; // m/s
    double lane_speed_limit = 0.0;
    double grade = 0.0;
    double curvature = 0.0;

    static LaneObservation free_lane(double speed_limit, double grade,
                                     double curvature, double d_free) {
        return {false, d_free, speed_limit, speed_limit, grade, curvature};
    }
};

struct CruiseConfig {
    // car-following
    double a_max = 1.5;      // m/s^2
    double b_comf = 2.0;     // m/s^2
    double b_max = 4.0;      // m/s^2
    double t_headway = 1.5;  // s
    double min_gap = 2.0;    // m (d0)
    double a_lat_max = 3.0;  // m/s^2, caps curve speed
    // trajectory screening
    double horizon = 15.0;   // s
    double traj_dt = 0.5;    // s
    // cost weights
    double w_fuel = 1.0;
    double w_progress = 20.0;
    double w_comfort = 0.1;
    double k_grade = 4.0;    // grade multiplier slope on the fuel cost
};

// Speed the controller aims for in a lane: the lane limit capped by the
// lateral-acceleration-limited curve speed.
double desired_speed(const LaneObservation& obs, const CruiseConfig& cfg);

// IDM acceleration command for the given speed and lane observation, clamped
// to [-b_max, a_max]. A non-positive gap to an existing lead commands the
// full emergency braking -b_max. Without a lead in range only the free-road
// term applies, so v == desired speed is an exact fixed point.
double following_accel(double v_ego, const LaneObservation& obs,
                       const CruiseConfig& cfg);

// Gap at which following_accel is exactly zero for steady following at v
// (lead at the same speed). Defined for 0 <= v < desired speed.
double equilibrium_gap(double v, const LaneObservation& obs,
                       const CruiseConfig& cfg);

struct SpeedSample {
    double v = 0.0;
    double a = 0.0; // accel applied over the sample's interval
};

// Constant-dt speed profile; samples.front() is the current state and each
// next speed is exactly v + a*dt of its predecessor.
struct SpeedTrajectory {
    double dt = 0.0;
    std::vector<SpeedSample> samples;
};

// Roll the car-following model forward over the horizon against the observed
// lane, assuming the lead holds its speed. Exactly ceil(horizon/dt) samples,
// each owning one dt interval; the first continues the ego's current (v, a).
SpeedTrajectory generate_trajectory(double v_ego, double a_ego,
                                    const LaneObservation& obs, double horizon,
                                    double dt, const CruiseConfig& cfg);

// Cost of driving a candidate trajectory, per the weighted decomposition.
struct GammaBreakdown {
    double fuel_cost = 0.0;     // grams, grade-corrected
    double progress_cost = 0.0; // mean speed shortfall fraction
    double comfort_cost = 0.0;  // integrated squared jerk
    double total = 0.0;
};

GammaBreakdown gamma(const SpeedTrajectory& traj, const LaneObservation& obs,
                     const FuelMap& map, const CruiseConfig& cfg);

} // namespace mcsim
