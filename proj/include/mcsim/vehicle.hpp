#pragma once

namespace mcsim {

enum class ControllerType { MultiCruise, LaneFollowing, Ambient };

// Kinematic state of one vehicle. `s` is the front-bumper arclength; the body
// extends `length` meters behind it. `lateral_offset` is measured from the
// center of the current lane, positive toward the left.
struct VehicleState {
    int id = 0;
    double s = 0.0;
    int lane = 0;
    double lateral_offset = 0.0;
    double v = 0.0;   // m/s, >= 0
    double a = 0.0;   // m/s^2, applied accel of the last step
    double yaw = 0.0; // rad, relative to road axis
    ControllerType controller = ControllerType::Ambient;
    double desired_speed = 0.0; // driver's own cap, m/s (0 = uncapped)
};

struct KinematicLimits {
    double a_max_abs = 4.0; // hard actuation clamp, m/s^2
};

// Advance the longitudinal state by one step: clamp the command, forbid
// reversing, and move s by the trapezoidal mean speed. Returns the state with
// s, v and a updated (a holds the clamped command actually applied).
VehicleState step_longitudinal(VehicleState st, double a_cmd, double dt,
                               const KinematicLimits& lim = {});

// One lateral lane-change maneuver, executed over a fixed duration.
struct LaneChangeMotion {
    double start_time = 0.0;
    double duration = 0.0; // s, > 0
    int from_lane = 0;
    int to_lane = 0; // adjacent to from_lane
};

struct LateralSample {
    double offset = 0.0;        // m from the from_lane center, signed
    double lateral_velocity = 0.0;
    double lateral_accel = 0.0;
    double yaw = 0.0;           // rad
};

// Minimum-jerk (quintic) lateral displacement across one lane width.
// `t` is absolute time; before the start the sample is all-zero, after the
// end it holds the full offset. Yaw is atan(lateral velocity / forward
// speed), with the forward speed floored to keep it defined near standstill.
LateralSample lateral_profile(const LaneChangeMotion& m, double t,
                              double lane_width, double v,
                              double v_floor = 1.0);

} // namespace mcsim
