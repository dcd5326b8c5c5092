#include "mcsim/vehicle.hpp"

#include <algorithm>
#include <cmath>

namespace mcsim {

VehicleState step_longitudinal(VehicleState st, double a_cmd, double dt,
                               const KinematicLimits& lim) {
    double a = std::clamp(a_cmd, -lim.a_max_abs, lim.a_max_abs);
    double v_next = std::max(0.0, st.v + a * dt);
    st.s += 0.5 * (st.v + v_next) * dt;
    st.a = a;
    st.v = v_next;
    return st;
}

LateralSample lateral_profile(const LaneChangeMotion& m, double t,
                              double lane_width, double v, double v_floor) {
    const double delta = (m.to_lane > m.from_lane ? lane_width : -lane_width);
    LateralSample out;
    double tau = (t - m.start_time) / m.duration;
    if (tau <= 0.0) {
        out.offset = 0.0;
        return out;
    }
    if (tau >= 1.0) {
        out.offset = delta;
        return out;
    }
    const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
    out.offset = delta * (10.0 * t3 - 15.0 * t4 + 6.0 * t5);
    out.lateral_velocity =
        delta * (30.0 * t2 - 60.0 * t3 + 30.0 * t4) / m.duration;
    out.lateral_accel =
        delta * (60.0 * tau - 180.0 * t2 + 120.0 * t3) / (m.duration * m.duration);
    out.yaw = std::atan2(out.lateral_velocity, std::max(v, v_floor));
    return out;
}

} // namespace mcsim
