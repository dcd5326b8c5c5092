#include "mcsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double penalty(double t_delta, double v_ego, const PolicyConfig& cfg) {
    // finite / inf == 0, which is exactly the "never changed" case
    return cfg.s_scale * v_ego / std::max(t_delta, cfg.t_delta_floor);
}

double PolicyState::t_delta(double now) const {
    if (!last_change_completed_at) return kInf;
    return now - *last_change_completed_at;
}

LaneCosts lane_costs(double v_ego, double a_ego,
                     const std::optional<LaneObservation>& left,
                     const LaneObservation& current,
                     const std::optional<LaneObservation>& right,
                     double t_delta, const PolicyConfig& pcfg,
                     const CruiseConfig& ccfg, const FuelMap& map) {
    LaneCosts out;
    out.penalty_value = penalty(t_delta, v_ego, pcfg);
    auto eval = [&](const LaneObservation& obs) {
        return gamma(generate_trajectory(v_ego, a_ego, obs, ccfg.horizon,
                                         ccfg.traj_dt, ccfg),
                     obs, map, ccfg);
    };
    out.gamma_current = eval(current);
    out.c_current = out.gamma_current.total;
    if (left) {
        out.gamma_left = eval(*left);
        out.c_left = out.gamma_left.total + out.penalty_value;
    } else {
        out.c_left = kInf;
    }
    if (right) {
        out.gamma_right = eval(*right);
        out.c_right = out.gamma_right.total + out.penalty_value;
    } else {
        out.c_right = kInf;
    }
    return out;
}

const char* to_string(Action a) {
    switch (a) {
        case Action::Stay: return "stay";
        case Action::ChangeLeft: return "change_left";
        case Action::ChangeRight: return "change_right";
    }
    return "?";
}

const char* to_string(Reason r) {
    switch (r) {
        case Reason::NavigationLock: return "navigation_lock";
        case Reason::BelowThreshold: return "below_threshold";
        case Reason::ArgminCurrent: return "argmin_current";
        case Reason::ArgminNeighbor: return "argmin_neighbor";
        case Reason::SpaceVeto: return "space_veto";
        case Reason::RouteReturn: return "route_return";
    }
    return "?";
}

Decision decide(const LaneCosts& costs, double d_nav, double c_thr,
                double lane_ok, int congested_evals, const PolicyConfig& cfg) {
    Decision d;
    d.costs = costs;
    d.c_thr = c_thr;
    if (d_nav <= cfg.d_thr) {
        d.action = Action::Stay;
        d.reason = Reason::NavigationLock;
        return d;
    }
    if (costs.c_current <= c_thr) {
        d.action = Action::Stay;
        d.reason = Reason::BelowThreshold;
        return d;
    }
    // a neighbor wins only if its own lane quality (cost before the
    // reluctance penalty) undercuts the threshold -- hopping between two
    // congested lanes trades a real maneuver for a gain the short horizon
    // overstates -- and only by undercutting the current lane with margin
    // after the congestion has been confirmed across evaluations; ties
    // between the two neighbors break toward the rightmost
    double c_left = costs.gamma_left.total < lane_ok ? costs.c_left : kInf;
    double c_right = costs.gamma_right.total < lane_ok ? costs.c_right : kInf;
    double best_side = std::min(c_left, c_right);
    if (congested_evals < cfg.confirm_evals ||
        best_side >= costs.c_current * (1.0 - cfg.switch_margin)) {
        d.action = Action::Stay;
        d.reason = Reason::ArgminCurrent;
    } else if (c_right <= c_left) {
        d.action = Action::ChangeRight;
        d.reason = Reason::ArgminNeighbor;
    } else {
        d.action = Action::ChangeLeft;
        d.reason = Reason::ArgminNeighbor;
    }
    return d;
}

bool space_check(const VehicleState& ego, int target_lane,
                 std::span<const Occupant> others, const PolicyConfig& cfg) {
    const double lo = ego.s - cfg.box_behind;
    const double hi = ego.s + cfg.box_ahead;
    for (const Occupant& o : others) {
        if (o.lane != target_lane) continue;
        if (o.s >= lo && o.s - o.length <= hi) return false;
    }
    return true;
}

namespace {

// Enough room to the lane-to-be-left's lead to cover the closure accumulated
// while the ego still straddles it.
bool initiation_headroom_ok(double v_ego, const LaneObservation& origin,
                            double maneuver_duration, const PolicyConfig& cfg) {
    if (!origin.lead_exists) return true;
    double closure =
        std::max(0.0, v_ego - origin.v_lead) * 0.5 * maneuver_duration;
    return origin.d > closure + cfg.headroom_margin;
}

const std::optional<LaneObservation>&
side_toward(const PolicyInput& in, int lane) {
    static const std::optional<LaneObservation> none;
    if (lane > in.ego.lane) return in.left;
    if (lane < in.ego.lane) return in.right;
    return none;
}

} // namespace

PolicyOutput policy_step(const PolicyInput& in, PolicyState& st,
                         const PolicyConfig& pcfg, const CruiseConfig& ccfg,
                         const FuelMap& map) {
    PolicyOutput out;

    // finish a due maneuver, starting the reluctance clock
    if (st.active_change) {
        double end = st.active_change->start_time + st.active_change->duration;
        if (in.now >= end - 1e-9) {
            st.last_change_completed_at = end;
            st.active_change.reset();
            out.completed = true;
        }
    }

    bool due = in.now >= st.next_eval_time - 0.5 * in.dt;
    if (due) st.next_eval_time += pcfg.policy_period;

    if (due && !st.active_change) {
        out.evaluated = true;
        const double t_delta = st.t_delta(in.now);

        // threshold: steady free-flow cost of this road section at its
        // desired speed. Anchoring it to the current (possibly already
        // degraded) speed would let the reference chase the congestion it
        // is supposed to flag.
        LaneObservation free_obs = in.current;
        free_obs.lead_exists = false;
        free_obs.v_lead = free_obs.lane_speed_limit;
        const double v_ref = desired_speed(free_obs, ccfg);
        double gamma_free =
            gamma(generate_trajectory(v_ref, 0.0, free_obs, ccfg.horizon,
                                      ccfg.traj_dt, ccfg),
                  free_obs, map, ccfg)
                .total;
        double c_thr = pcfg.c_thr_absolute > 0.0 ? pcfg.c_thr_absolute
                                                 : pcfg.c_thr_factor * gamma_free;
        double lane_ok = pcfg.lane_ok_factor * gamma_free;

        LaneCosts costs = lane_costs(in.ego.v, in.ego.a, in.left, in.current,
                                     in.right, t_delta, pcfg, ccfg, map);
        // the congestion streak restarts whenever the free-flow reference
        // shifts (a speed-limit, curvature or grade step under the ego), so
        // lane choices compare costs against a settled local context
        bool ref_stable = st.last_c_thr > 0.0 &&
                          std::abs(c_thr - st.last_c_thr) <= 0.01 * c_thr;
        st.last_c_thr = c_thr;
        st.congested_evals = ref_stable && costs.c_current > c_thr
                                 ? st.congested_evals + 1
                                 : 0;
        Decision d =
            decide(costs, in.d_nav, c_thr, lane_ok, st.congested_evals, pcfg);
        d.target_lane = in.ego.lane;

        // route reversion: drift back to the navigation lane once the
        // overtaken stretch is cleared and the move costs nothing
        if (in.d_nav > pcfg.d_thr && in.ego.lane != st.route_lane &&
            t_delta >= pcfg.return_hold) {
            int step_lane = in.ego.lane + (st.route_lane > in.ego.lane ? 1 : -1);
            const auto& side = side_toward(in, step_lane);
            if (side) {
                double g_home = step_lane > in.ego.lane
                                    ? costs.gamma_left.total
                                    : costs.gamma_right.total;
                bool neutral = g_home <= costs.gamma_current.total *
                                             (1.0 + pcfg.return_margin);
                if (neutral &&
                    initiation_headroom_ok(in.ego.v, in.current,
                                           in.lane_change_duration, pcfg) &&
                    space_check(in.ego, step_lane, in.others, pcfg)) {
                    d.action = step_lane > in.ego.lane ? Action::ChangeLeft
                                                       : Action::ChangeRight;
                    d.reason = Reason::RouteReturn;
                    d.target_lane = step_lane;
                }
            }
        }

        if (d.action != Action::Stay && d.reason != Reason::RouteReturn) {
            int target =
                in.ego.lane + (d.action == Action::ChangeLeft ? 1 : -1);
            if (initiation_headroom_ok(in.ego.v, in.current,
                                       in.lane_change_duration, pcfg) &&
                space_check(in.ego, target, in.others, pcfg)) {
                d.target_lane = target;
            } else {
                d.action = Action::Stay;
                d.reason = Reason::SpaceVeto;
                d.target_lane = in.ego.lane;
            }
        }

        if (d.action != Action::Stay) {
            st.active_change = LaneChangeMotion{
                in.now, in.lane_change_duration, in.ego.lane, d.target_lane};
            st.congested_evals = 0;
            out.initiated = true;
        }
        st.last_decision = d;
    }

    out.decision = st.last_decision;

    // longitudinal command: follow the committed lane's lead; while
    // straddling, avoid closing out the origin lane's lead
    if (st.active_change) {
        const LaneChangeMotion& m = *st.active_change;
        const LaneObservation* target = &in.current;
        const LaneObservation* origin = &in.current;
        if (in.ego.lane == m.from_lane) {
            const auto& side = side_toward(in, m.to_lane);
            if (side) target = &*side;
        } else {
            const auto& side = side_toward(in, m.from_lane);
            if (side) origin = &*side;
        }
        double a = following_accel(in.ego.v, *target, ccfg);
        if (origin != target && origin->lead_exists) {
            double t_rem = std::max(0.0, m.start_time + m.duration - in.now);
            double gap_proj =
                origin->d - std::max(0.0, in.ego.v - origin->v_lead) * t_rem;
            if (gap_proj < 2.0 * ccfg.min_gap)
                a = std::min(a, following_accel(in.ego.v, *origin, ccfg));
        }
        out.a_cmd = a;
    } else {
        out.a_cmd = following_accel(in.ego.v, in.current, ccfg);
    }
    return out;
}

} // namespace mcsim
