#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mcsim/policy.hpp"

using namespace mcsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// deterministic 64-bit mix, local to the tests
struct Mix64 {
    std::uint64_t x;
    explicit Mix64(std::uint64_t seed) : x(seed) {}
    double unit() {
        x += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }
    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
};

LaneObservation free_obs(double limit, double grade = 0.0) {
    return LaneObservation::free_lane(limit, grade, 0.0, 400.0);
}

LaneObservation lead_obs(double gap, double v_lead, double limit) {
    return LaneObservation{true, gap, v_lead, limit, 0.0, 0.0};
}

} // namespace

TEST_CASE("the reluctance penalty matches its closed form") {
    PolicyConfig cfg;
    Mix64 rng(7);
    for (int k = 0; k < 300; ++k) {
        double t = rng.range(0.0, 40.0);
        double v = rng.range(0.0, 40.0);
        long double ref = static_cast<long double>(cfg.s_scale) * v /
                          std::max<long double>(t, cfg.t_delta_floor);
        double got = penalty(t, v, cfg);
        CHECK(std::abs(got - static_cast<double>(ref)) <=
              1e-12 * std::max(1.0, std::abs(static_cast<double>(ref))));
    }
}

TEST_CASE("penalty edge cases: the floor and the never-changed zero") {
    PolicyConfig cfg; // s_scale 2, floor 0.5
    CHECK(penalty(kInf, 30.0, cfg) == 0.0);
    CHECK(penalty(1e300, 30.0, cfg) < 1e-290);
    CHECK(penalty(0.0, 30.0, cfg) == 2.0 * 30.0 / 0.5);
    CHECK(penalty(0.2, 30.0, cfg) == penalty(0.0, 30.0, cfg));
    CHECK(penalty(4.0, 30.0, cfg) == 2.0 * 30.0 / 4.0);
    CHECK(penalty(4.0, 0.0, cfg) == 0.0);
}

TEST_CASE("lane costs compose trajectory cost and penalty") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    LaneObservation left = free_obs(30.0);
    LaneObservation cur = lead_obs(60.0, 20.0, 30.0);
    LaneObservation right = lead_obs(90.0, 24.0, 30.0);
    double t_delta = 3.0;
    LaneCosts c = lane_costs(27.0, 0.0, left, cur, right, t_delta, pcfg, ccfg,
                             map);

    double pen = penalty(t_delta, 27.0, pcfg);
    CHECK(c.penalty_value == pen);
    CHECK(c.c_current == c.gamma_current.total); // never penalized
    CHECK(c.c_left == c.gamma_left.total + pen);
    CHECK(c.c_right == c.gamma_right.total + pen);

    auto direct = [&](const LaneObservation& obs) {
        return gamma(generate_trajectory(27.0, 0.0, obs, ccfg.horizon,
                                         ccfg.traj_dt, ccfg),
                     obs, map, ccfg)
            .total;
    };
    CHECK(c.gamma_left.total == direct(left));
    CHECK(c.gamma_current.total == direct(cur));
    CHECK(c.gamma_right.total == direct(right));
    // the free lane should look strictly better here
    CHECK(c.gamma_left.total < c.gamma_current.total);
}

TEST_CASE("a missing lane costs infinity with a zeroed breakdown") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    LaneCosts c = lane_costs(27.0, 0.0, std::nullopt, free_obs(30.0),
                             std::nullopt, kInf, pcfg, ccfg, map);
    CHECK(c.c_left == kInf);
    CHECK(c.c_right == kInf);
    CHECK(c.gamma_left.total == 0.0);
    CHECK(c.gamma_right.total == 0.0);
    CHECK(c.penalty_value == 0.0); // never changed
}

namespace {

// hand-rolled LaneCosts for the selection-gate table
LaneCosts costs_of(double c_left, double c_cur, double c_right,
                   double g_left, double g_right) {
    LaneCosts c;
    c.c_left = c_left;
    c.c_current = c_cur;
    c.c_right = c_right;
    c.gamma_left.total = g_left;
    c.gamma_current.total = c_cur;
    c.gamma_right.total = g_right;
    return c;
}

struct GateRow {
    const char* label;
    LaneCosts costs;
    double d_nav;
    int streak;
    Action action;
    Reason reason;
};

} // namespace

TEST_CASE("the decision gates follow the selection table") {
    PolicyConfig cfg; // d_thr 500, switch_margin 0.02, confirm_evals 1
    const double thr = 10.0;
    const double ok = 10.8; // eligibility bound on the pre-penalty cost
    const GateRow rows[] = {
        {"navigation lock beats everything",
         costs_of(1.0, 50.0, 1.0, 1.0, 1.0), 400.0, 5, Action::Stay,
         Reason::NavigationLock},
        {"lock boundary: d_nav == d_thr still locks",
         costs_of(1.0, 50.0, 1.0, 1.0, 1.0), 500.0, 5, Action::Stay,
         Reason::NavigationLock},
        {"cheap current lane stays put",
         costs_of(1.0, 9.0, 1.0, 1.0, 1.0), 600.0, 5, Action::Stay,
         Reason::BelowThreshold},
        {"threshold boundary: equality still counts as cheap",
         costs_of(1.0, 10.0, 1.0, 1.0, 1.0), 600.0, 5, Action::Stay,
         Reason::BelowThreshold},
        {"congestion not yet confirmed",
         costs_of(8.0, 10.5, 8.0, 8.0, 8.0), 600.0, 0, Action::Stay,
         Reason::ArgminCurrent},
        {"no eligible neighbor: both lanes nearly as congested",
         costs_of(9.0, 10.5, 9.0, 11.5, 11.5), 600.0, 3, Action::Stay,
         Reason::ArgminCurrent},
        {"eligibility boundary: pre-penalty cost == lane_ok is not eligible",
         costs_of(9.0, 10.5, 50.0, 10.8, 50.0), 600.0, 3, Action::Stay,
         Reason::ArgminCurrent},
        {"eligible left lane wins",
         costs_of(9.0, 10.5, 50.0, 8.0, 50.0), 600.0, 1, Action::ChangeLeft,
         Reason::ArgminNeighbor},
        {"eligible right lane wins",
         costs_of(50.0, 10.5, 9.0, 50.0, 8.0), 600.0, 1, Action::ChangeRight,
         Reason::ArgminNeighbor},
        {"neighbor tie breaks to the right",
         costs_of(9.0, 10.5, 9.0, 8.0, 8.0), 600.0, 1, Action::ChangeRight,
         Reason::ArgminNeighbor},
        {"left preferred only when strictly cheaper",
         costs_of(9.0, 10.5, 9.1, 8.0, 8.0), 600.0, 1, Action::ChangeLeft,
         Reason::ArgminNeighbor},
        {"margin: a hair under the current cost is not enough",
         costs_of(10.4, 10.5, 50.0, 8.0, 50.0), 600.0, 3, Action::Stay,
         Reason::ArgminCurrent},
        {"margin boundary: exactly (1 - margin) * current stays",
         costs_of(10.5 * (1.0 - 0.02), 10.5, 50.0, 8.0, 50.0), 600.0, 3,
         Action::Stay, Reason::ArgminCurrent},
        {"both neighbors missing",
         costs_of(kInf, 10.5, kInf, 0.0, 0.0), 600.0, 3, Action::Stay,
         Reason::ArgminCurrent},
        {"one missing lane never blocks the other",
         costs_of(kInf, 10.5, 9.0, 0.0, 8.0), 600.0, 1, Action::ChangeRight,
         Reason::ArgminNeighbor},
    };
    for (const GateRow& row : rows) {
        CAPTURE(row.label);
        Decision d = decide(row.costs, row.d_nav, thr, ok, row.streak, cfg);
        CHECK(d.action == row.action);
        CHECK(d.reason == row.reason);
        CHECK(d.c_thr == thr);
    }
}

TEST_CASE("a longer confirmation requirement delays the switch") {
    PolicyConfig cfg;
    cfg.confirm_evals = 3;
    LaneCosts c = costs_of(8.0, 10.5, 50.0, 8.0, 50.0);
    CHECK(decide(c, 600.0, 10.0, 10.8, 2, cfg).reason ==
          Reason::ArgminCurrent);
    CHECK(decide(c, 600.0, 10.0, 10.8, 3, cfg).action == Action::ChangeLeft);
}

TEST_CASE("randomized decisions satisfy the gate invariants") {
    PolicyConfig cfg;
    Mix64 rng(99);
    for (int k = 0; k < 2000; ++k) {
        double c_cur = rng.range(5.0, 15.0);
        double g_left = rng.range(4.0, 16.0);
        double g_right = rng.range(4.0, 16.0);
        double pen = rng.range(0.0, 3.0);
        bool has_left = rng.unit() < 0.8;
        bool has_right = rng.unit() < 0.8;
        LaneCosts c = costs_of(has_left ? g_left + pen : kInf, c_cur,
                               has_right ? g_right + pen : kInf,
                               has_left ? g_left : 0.0,
                               has_right ? g_right : 0.0);
        double d_nav = rng.range(0.0, 2000.0);
        double thr = rng.range(5.0, 15.0);
        double ok = rng.range(5.0, 15.0);
        int streak = static_cast<int>(rng.range(0.0, 3.999));
        Decision d = decide(c, d_nav, thr, ok, streak, cfg);

        if (d_nav <= cfg.d_thr) {
            CHECK(d.reason == Reason::NavigationLock);
            CHECK(d.action == Action::Stay);
            continue;
        }
        if (c_cur <= thr) {
            CHECK(d.reason == Reason::BelowThreshold);
            CHECK(d.action == Action::Stay);
            continue;
        }
        if (d.action == Action::Stay) {
            CHECK(d.reason == Reason::ArgminCurrent);
        } else {
            CHECK(d.reason == Reason::ArgminNeighbor);
            CHECK(streak >= cfg.confirm_evals);
            double c_win = d.action == Action::ChangeLeft ? c.c_left
                                                          : c.c_right;
            double g_win = d.action == Action::ChangeLeft
                               ? c.gamma_left.total
                               : c.gamma_right.total;
            CHECK(g_win < ok);
            CHECK(c_win < c_cur * (1.0 - cfg.switch_margin));
            if (d.action == Action::ChangeLeft) {
                // the right lane must have been worse or ineligible
                bool right_eligible = has_right && g_right < ok;
                CHECK((!right_eligible || c.c_right > c.c_left));
            } else {
                bool left_eligible = has_left && g_left < ok;
                CHECK((!left_eligible || c.c_right <= c.c_left));
            }
        }
    }
}

TEST_CASE("space check boxes the target lane around the ego") {
    PolicyConfig cfg; // box_behind 20, box_ahead 30
    VehicleState ego;
    ego.s = 1000.0;
    ego.lane = 1;
    auto occ = [](double s, int lane) {
        return Occupant{s, 4.5, lane, 20.0, 7};
    };
    std::vector<Occupant> none;
    CHECK(space_check(ego, 2, none, cfg));

    std::vector<Occupant> mid{occ(1005.0, 2)};
    CHECK_FALSE(space_check(ego, 2, mid, cfg));
    CHECK(space_check(ego, 0, mid, cfg)); // other lane is irrelevant

    // rear bumper exactly on the leading box edge: still blocked
    std::vector<Occupant> at_front{occ(1030.0 + 4.5, 2)};
    CHECK_FALSE(space_check(ego, 2, at_front, cfg));
    std::vector<Occupant> past_front{occ(1030.0 + 4.5 + 0.001, 2)};
    CHECK(space_check(ego, 2, past_front, cfg));

    // front bumper exactly on the trailing box edge: still blocked
    std::vector<Occupant> at_back{occ(980.0, 2)};
    CHECK_FALSE(space_check(ego, 2, at_back, cfg));
    std::vector<Occupant> past_back{occ(979.999, 2)};
    CHECK(space_check(ego, 2, past_back, cfg));
}

TEST_CASE("space check agrees with interval overlap on random traffic") {
    PolicyConfig cfg;
    Mix64 rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        VehicleState ego;
        ego.s = rng.range(100.0, 2000.0);
        int target = static_cast<int>(rng.range(0.0, 2.999));
        std::vector<Occupant> others;
        int n = static_cast<int>(rng.range(0.0, 8.999));
        for (int i = 0; i < n; ++i)
            others.push_back({rng.range(ego.s - 80.0, ego.s + 80.0), 4.5,
                              static_cast<int>(rng.range(0.0, 2.999)), 20.0,
                              i + 1});
        bool got = space_check(ego, target, others, cfg);

        // oracle: the occupant interval [s - length, s] must not intersect
        // [ego.s - box_behind, ego.s + box_ahead]
        bool blocked = false;
        for (const Occupant& o : others) {
            if (o.lane != target) continue;
            double lo = std::max(ego.s - cfg.box_behind, o.s - o.length);
            double hi = std::min(ego.s + cfg.box_ahead, o.s);
            if (lo <= hi) blocked = true;
        }
        CHECK(got == !blocked);
    }
}

namespace {

PolicyInput base_input(double now, const LaneObservation& cur) {
    PolicyInput in;
    in.ego.id = 0;
    in.ego.s = 1000.0;
    in.ego.lane = 1;
    in.ego.v = 30.0;
    in.current = cur;
    in.d_nav = 5000.0;
    in.now = now;
    in.dt = 0.05;
    in.lane_change_duration = 4.0;
    return in;
}

} // namespace

TEST_CASE("evaluations run on the policy period") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 1;
    int evals = 0;
    for (int k = 0; k <= 41; ++k) { // 0 .. 2.05 s
        PolicyInput in = base_input(0.05 * k, free_obs(30.0));
        in.left = free_obs(30.0);
        in.right = free_obs(30.0);
        PolicyOutput out = policy_step(in, st, pcfg, ccfg, map);
        if (out.evaluated) ++evals;
        CHECK_FALSE(out.initiated); // free road never initiates
        CHECK(out.a_cmd ==
              following_accel(in.ego.v, in.current, ccfg));
    }
    CHECK(evals == 3); // t = 0, 1, 2
    CHECK(st.last_decision.reason == Reason::BelowThreshold);
}

TEST_CASE("t_delta counts from the last completed change") {
    PolicyState st;
    CHECK(st.t_delta(5.0) == kInf);
    st.last_change_completed_at = 2.0;
    CHECK(st.t_delta(5.0) == 3.0);
}

namespace {

// current lane stuck behind slow traffic, free left lane, no right lane
PolicyInput congested_input(double now) {
    PolicyInput in = base_input(now, lead_obs(60.0, 12.0, 30.0));
    in.left = free_obs(30.0);
    in.right = std::nullopt;
    return in;
}

} // namespace

TEST_CASE("sustained congestion initiates an escape to the free lane") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 1;

    // first evaluation: reference not yet settled, no move
    PolicyOutput o0 = policy_step(congested_input(0.0), st, pcfg, ccfg, map);
    CHECK(o0.evaluated);
    CHECK_FALSE(o0.initiated);
    CHECK(o0.decision.reason == Reason::ArgminCurrent);
    CHECK(st.congested_evals == 0);

    // second evaluation: stable reference, streak reaches one, move fires
    PolicyOutput o1 = policy_step(congested_input(1.0), st, pcfg, ccfg, map);
    CHECK(o1.evaluated);
    CHECK(o1.initiated);
    CHECK(o1.decision.action == Action::ChangeLeft);
    CHECK(o1.decision.reason == Reason::ArgminNeighbor);
    CHECK(o1.decision.target_lane == 2);
    REQUIRE(st.active_change.has_value());
    CHECK(st.active_change->from_lane == 1);
    CHECK(st.active_change->to_lane == 2);
    CHECK(st.active_change->start_time == 1.0);
    CHECK(st.congested_evals == 0); // consumed by the initiation

    // while the maneuver runs there are no evaluations
    PolicyOutput o2 = policy_step(congested_input(2.0), st, pcfg, ccfg, map);
    CHECK_FALSE(o2.evaluated);
    CHECK_FALSE(o2.completed);

    // completion at start + duration starts the reluctance clock
    PolicyOutput o5 = policy_step(congested_input(5.0), st, pcfg, ccfg, map);
    CHECK(o5.completed);
    CHECK_FALSE(st.active_change.has_value());
    CHECK(st.last_change_completed_at == 5.0);
}

TEST_CASE("an occupied target lane vetoes the initiation") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 1;
    policy_step(congested_input(0.0), st, pcfg, ccfg, map);

    PolicyInput in = congested_input(1.0);
    std::vector<Occupant> blocker{{in.ego.s + 10.0, 4.5, 2, 20.0, 3}};
    in.others = blocker;
    PolicyOutput out = policy_step(in, st, pcfg, ccfg, map);
    CHECK(out.evaluated);
    CHECK_FALSE(out.initiated);
    CHECK(out.decision.action == Action::Stay);
    CHECK(out.decision.reason == Reason::SpaceVeto);
    CHECK_FALSE(st.active_change.has_value());
}

TEST_CASE("insufficient origin-lane headroom vetoes the initiation") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 1;
    // closure over the maneuver: (30 - 12) * 0.5 * 4 = 36 m, margin 10
    // a 60 m gap clears it; a 40 m gap does not
    auto tight = [&](double now) {
        PolicyInput in = base_input(now, lead_obs(40.0, 12.0, 30.0));
        in.left = free_obs(30.0);
        return in;
    };
    policy_step(tight(0.0), st, pcfg, ccfg, map);
    PolicyOutput out = policy_step(tight(1.0), st, pcfg, ccfg, map);
    CHECK(out.evaluated);
    CHECK_FALSE(out.initiated);
    CHECK(out.decision.reason == Reason::SpaceVeto);
}

TEST_CASE("the ego drifts back to its route lane when the move is free") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 0;
    st.last_change_completed_at = 10.0;
    st.next_eval_time = 20.0;

    PolicyInput in = base_input(20.0, free_obs(30.0));
    in.right = free_obs(30.0); // toward the route lane
    in.left = free_obs(30.0);
    PolicyOutput out = policy_step(in, st, pcfg, ccfg, map);
    CHECK(out.evaluated);
    CHECK(out.initiated);
    CHECK(out.decision.action == Action::ChangeRight);
    CHECK(out.decision.reason == Reason::RouteReturn);
    CHECK(out.decision.target_lane == 0);
}

TEST_CASE("route return waits for the hold time") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 0;
    st.last_change_completed_at = 18.0; // only 2 s ago, hold is 3
    st.next_eval_time = 20.0;
    PolicyInput in = base_input(20.0, free_obs(30.0));
    in.right = free_obs(30.0);
    PolicyOutput out = policy_step(in, st, pcfg, ccfg, map);
    CHECK(out.evaluated);
    CHECK_FALSE(out.initiated);
    CHECK(out.decision.reason == Reason::BelowThreshold);
}

TEST_CASE("route return never fires under navigation lock") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 0;
    st.last_change_completed_at = 10.0;
    st.next_eval_time = 20.0;
    PolicyInput in = base_input(20.0, free_obs(30.0));
    in.right = free_obs(30.0);
    in.d_nav = 300.0; // inside the lock distance
    PolicyOutput out = policy_step(in, st, pcfg, ccfg, map);
    CHECK(out.evaluated);
    CHECK_FALSE(out.initiated);
    CHECK(out.decision.reason == Reason::NavigationLock);
}

TEST_CASE("route return declines a clearly worse home lane") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 0;
    st.last_change_completed_at = 10.0;
    st.next_eval_time = 20.0;
    PolicyInput in = base_input(20.0, free_obs(30.0));
    in.right = lead_obs(25.0, 8.0, 30.0); // home lane is jammed
    PolicyOutput out = policy_step(in, st, pcfg, ccfg, map);
    CHECK(out.evaluated);
    CHECK_FALSE(out.initiated);
    CHECK(out.decision.reason == Reason::BelowThreshold);
}

TEST_CASE("mid-change the command follows the target lane's lead") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 1;
    st.active_change = LaneChangeMotion{0.0, 4.0, 1, 2};
    st.next_eval_time = 100.0; // keep evaluations out of the way

    PolicyInput in = base_input(1.0, free_obs(30.0));
    in.left = lead_obs(45.0, 22.0, 30.0); // target lane
    PolicyOutput out = policy_step(in, st, pcfg, ccfg, map);
    CHECK_FALSE(out.evaluated);
    CHECK(out.a_cmd == following_accel(30.0, *in.left, ccfg));
}

TEST_CASE("mid-change the origin lane's lead still caps the command") {
    PolicyConfig pcfg;
    CruiseConfig ccfg;
    FuelMap map;
    PolicyState st;
    st.route_lane = 1;
    st.active_change = LaneChangeMotion{0.0, 4.0, 1, 2};
    st.next_eval_time = 100.0;

    // origin lane lead collapsing onto the ego; target lane free
    PolicyInput in = base_input(1.0, lead_obs(6.0, 10.0, 30.0));
    in.left = free_obs(30.0);
    PolicyOutput out = policy_step(in, st, pcfg, ccfg, map);
    double origin_a = following_accel(30.0, in.current, ccfg);
    double target_a = following_accel(30.0, *in.left, ccfg);
    CHECK(out.a_cmd == std::min(origin_a, target_a));
    CHECK(out.a_cmd == origin_a); // the origin brake binds
}
