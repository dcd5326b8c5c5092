#include "mcsim/cruise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcsim {

namespace {

constexpr double kCurvatureEps = 1e-12;

// Effective accel of one step: pick it so that v + a_eff*dt reproduces the
// clamped next speed bit-exactly and never lands below zero.
double effective_accel(double v, double a_cmd, double dt) {
    double v_next = std::max(0.0, v + a_cmd * dt);
    double a_eff = (v_next - v) / dt;
    while (v + a_eff * dt < 0.0)
        a_eff = std::nextafter(a_eff, std::numeric_limits<double>::infinity());
    return a_eff;
}

} // namespace

double desired_speed(const LaneObservation& obs, const CruiseConfig& cfg) {
    double curve_cap =
        std::sqrt(cfg.a_lat_max / std::max(std::abs(obs.curvature), kCurvatureEps));
    return std::min(obs.lane_speed_limit, curve_cap);
}

double following_accel(double v_ego, const LaneObservation& obs,
                       const CruiseConfig& cfg) {
    if (obs.lead_exists && obs.d <= 0.0) return -cfg.b_max;
    double v_des = desired_speed(obs, cfg);
    double ratio = v_ego / v_des;
    double free_term = 1.0 - ratio * ratio * ratio * ratio;
    double a = cfg.a_max * free_term;
    if (obs.lead_exists) {
        double dv = v_ego - obs.v_lead;
        double dyn = v_ego * cfg.t_headway +
                     v_ego * dv / (2.0 * std::sqrt(cfg.a_max * cfg.b_comf));
        double s_star = cfg.min_gap + std::max(0.0, dyn);
        double z = s_star / obs.d;
        a -= cfg.a_max * z * z;
    }
    return std::clamp(a, -cfg.b_max, cfg.a_max);
}

double equilibrium_gap(double v, const LaneObservation& obs,
                       const CruiseConfig& cfg) {
    double v_des = desired_speed(obs, cfg);
    double ratio = v / v_des;
    double denom = 1.0 - ratio * ratio * ratio * ratio;
    double s_star = cfg.min_gap + v * cfg.t_headway;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return s_star / std::sqrt(denom);
}

SpeedTrajectory generate_trajectory(double v_ego, double a_ego,
                                    const LaneObservation& obs, double horizon,
                                    double dt, const CruiseConfig& cfg) {
    SpeedTrajectory traj;
    traj.dt = dt;
    const int n = static_cast<int>(std::ceil(horizon / dt));
    traj.samples.reserve(static_cast<std::size_t>(n));

    double v = v_ego;
    double d = obs.d;
    // the first interval continues the currently applied acceleration
    double a_cmd = std::clamp(a_ego, -cfg.b_max, cfg.a_max);
    for (int k = 0; k < n; ++k) {
        if (k > 0) {
            LaneObservation cur = obs;
            cur.d = d;
            a_cmd = following_accel(v, cur, cfg);
        }
        double a_eff = effective_accel(v, a_cmd, dt);
        double v_next = v + a_eff * dt;
        traj.samples.push_back({v, a_eff});
        if (obs.lead_exists)
            d += (obs.v_lead - 0.5 * (v + v_next)) * dt;
        v = v_next;
    }
    return traj;
}

GammaBreakdown gamma(const SpeedTrajectory& traj, const LaneObservation& obs,
                     const FuelMap& map, const CruiseConfig& cfg) {
    GammaBreakdown out;
    if (traj.samples.empty()) return out;
    const double dt = traj.dt;
    const double span = dt * static_cast<double>(traj.samples.size());
    const double v_des = desired_speed(obs, cfg);
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const SpeedSample& smp = traj.samples[k];
        double mult =
            smp.v > 0.0 ? std::max(0.0, 1.0 + cfg.k_grade * obs.grade) : 1.0;
        out.fuel_cost += map.rate(smp.v, smp.a) * mult * dt;
        out.progress_cost += std::max(0.0, v_des - smp.v) / v_des * dt / span;
        if (k + 1 < traj.samples.size()) {
            double jerk = (traj.samples[k + 1].a - smp.a) / dt;
            out.comfort_cost += jerk * jerk * dt;
        }
    }
    out.total = cfg.w_fuel * out.fuel_cost + cfg.w_progress * out.progress_cost +
                cfg.w_comfort * out.comfort_cost;
    return out;
}

} // namespace mcsim
