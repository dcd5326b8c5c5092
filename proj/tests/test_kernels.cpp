#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <vector>

#include "mcsim/kernels.hpp"

using namespace mcsim;

namespace {

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
    int below(int n) { return static_cast<int>(unit() * n) % n; }
};

std::vector<Occupant> random_fleet(Mix64& rng, int n, int lanes,
                                   double length = 4.5) {
    std::vector<Occupant> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back({rng.range(0.0, 3000.0), length, rng.below(lanes),
                       rng.range(5.0, 35.0), i});
    return out;
}

} // namespace

TEST_CASE("occupants sort by lane, then position, then owner") {
    Mix64 rng(3);
    std::vector<Occupant> occ = random_fleet(rng, 200, 4);
    occ.push_back(occ.back()); // duplicate position, same vehicle id twice
    sort_occupants(occ);
    for (std::size_t k = 1; k < occ.size(); ++k) {
        const Occupant& a = occ[k - 1];
        const Occupant& b = occ[k];
        bool ordered = a.lane < b.lane ||
                       (a.lane == b.lane &&
                        (a.s < b.s || (a.s == b.s && a.vehicle <= b.vehicle)));
        CHECK(ordered);
    }
}

TEST_CASE("find_lead agrees with a linear scan on random fleets") {
    Mix64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        int lanes = 1 + trial % 4;
        std::vector<Occupant> occ = random_fleet(rng, 1 + trial % 60, lanes);
        sort_occupants(occ);
        double s = rng.range(-100.0, 3100.0);
        int lane = rng.below(lanes);
        int self = trial % 8 == 0 ? trial % 30 : -1;
        double range = trial % 3 == 0 ? 120.0 : 400.0;

        LeadInfo got = find_lead(occ, lane, s, self, range);

        // oracle: nearest strictly-ahead front position in the lane
        const Occupant* best = nullptr;
        for (const Occupant& o : occ) {
            if (o.lane != lane || o.vehicle == self || o.s <= s) continue;
            if (!best || o.s < best->s) best = &o;
        }
        if (best && best->s - best->length - s <= range) {
            CHECK(got.exists);
            CHECK(got.gap == best->s - best->length - s);
            CHECK(got.v == best->v);
        } else {
            CHECK_FALSE(got.exists);
        }
    }
}

TEST_CASE("find_lead skips the querying vehicle itself") {
    std::vector<Occupant> occ{{100.0, 4.5, 0, 20.0, 1},
                              {120.0, 4.5, 0, 22.0, 2}};
    sort_occupants(occ);
    LeadInfo self_ahead = find_lead(occ, 0, 95.0, 1, 400.0);
    CHECK(self_ahead.exists);
    CHECK(self_ahead.gap == 120.0 - 4.5 - 95.0);
    CHECK(self_ahead.v == 22.0);
    LeadInfo normal = find_lead(occ, 0, 95.0, -1, 400.0);
    CHECK(normal.gap == 100.0 - 4.5 - 95.0);
}

TEST_CASE("vehicles at the exact same position are not ahead") {
    std::vector<Occupant> occ{{100.0, 4.5, 0, 20.0, 1}};
    LeadInfo at = find_lead(occ, 0, 100.0, -1, 400.0);
    CHECK_FALSE(at.exists);
    LeadInfo behind = find_lead(occ, 0, 99.999, -1, 400.0);
    CHECK(behind.exists);
}

TEST_CASE("the sensor range cuts off distant leads") {
    std::vector<Occupant> occ{{504.5, 4.5, 0, 20.0, 1}};
    CHECK(find_lead(occ, 0, 100.0, -1, 400.0).exists);
    CHECK_FALSE(find_lead(occ, 0, 99.0, -1, 400.0).exists);
}

namespace {

struct Fixture {
    std::vector<VehicleState> vehicles;
    std::vector<Occupant> occupants;
    RoadNetwork road;
    CruiseConfig cruise;

    explicit Fixture(std::uint64_t seed, int n)
        : road({{1500.0, 33.0, 0.01, 0.0},
                {1500.0, 27.0, -0.02, 0.001},
                {1000.0, 30.0, 0.0, 0.0}},
               3) {
        Mix64 rng(seed);
        for (int i = 0; i < n; ++i) {
            VehicleState v;
            v.id = i;
            v.s = rng.range(0.0, road.total_length());
            v.lane = rng.below(3);
            v.v = rng.range(5.0, 33.0);
            v.controller = i == 0 ? ControllerType::MultiCruise
                                  : ControllerType::Ambient;
            v.desired_speed = i % 4 == 0 ? 0.0 : rng.range(20.0, 33.0);
            vehicles.push_back(v);
        }
        for (std::size_t i = 0; i < vehicles.size(); ++i)
            occupants.push_back({vehicles[i].s, 4.5, vehicles[i].lane,
                                 vehicles[i].v, static_cast<int>(i)});
        sort_occupants(occupants);
    }

    AmbientPassInput input() const {
        AmbientPassInput in;
        in.vehicles = vehicles;
        in.sorted_occupants = occupants;
        in.road = &road;
        in.cruise = &cruise;
        return in;
    }
};

} // namespace

TEST_CASE("serial and parallel ambient passes are bit-identical") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Fixture fx(seed, 500);
        std::vector<double> serial(fx.vehicles.size(), -1.0);
        std::vector<double> parallel(fx.vehicles.size(), -2.0);
        ambient_accel_serial(fx.input(), serial);
        ambient_accel_parallel(fx.input(), parallel);
        REQUIRE(serial.size() == parallel.size());
        CHECK(std::memcmp(serial.data(), parallel.data(),
                          serial.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("non-ambient slots are left at zero") {
    Fixture fx(9, 50);
    std::vector<double> out(fx.vehicles.size(), -1.0);
    ambient_accel_serial(fx.input(), out);
    CHECK(out[0] == 0.0); // the ego slot
    for (std::size_t i = 1; i < out.size(); ++i) {
        CHECK(out[i] <= fx.cruise.a_max);
        CHECK(out[i] >= -fx.cruise.b_max);
    }
}

TEST_CASE("ambient commands respect each driver's own speed cap") {
    // one car alone on an empty road, already at its desired speed
    RoadNetwork road({{2000.0, 33.0, 0.0, 0.0}}, 2);
    CruiseConfig cruise;
    std::vector<VehicleState> vehicles(1);
    vehicles[0].id = 0;
    vehicles[0].s = 500.0;
    vehicles[0].v = 25.0;
    vehicles[0].desired_speed = 25.0;
    vehicles[0].controller = ControllerType::Ambient;
    std::vector<Occupant> occ{{500.0, 4.5, 0, 25.0, 0}};
    AmbientPassInput in;
    in.vehicles = vehicles;
    in.sorted_occupants = occ;
    in.road = &road;
    in.cruise = &cruise;
    std::vector<double> out(1);
    ambient_accel_serial(in, out);
    CHECK(out[0] == 0.0); // exact fixed point at the personal cap

    vehicles[0].desired_speed = 0.0; // uncapped: the limit binds instead
    ambient_accel_serial(in, out);
    CHECK(out[0] > 0.0);
}

TEST_CASE("an ambient driver brakes for its lead") {
    RoadNetwork road({{2000.0, 33.0, 0.0, 0.0}}, 1);
    CruiseConfig cruise;
    std::vector<VehicleState> vehicles(2);
    vehicles[0].id = 0;
    vehicles[0].s = 500.0;
    vehicles[0].v = 30.0;
    vehicles[0].controller = ControllerType::Ambient;
    vehicles[1].id = 1;
    vehicles[1].s = 512.0;
    vehicles[1].v = 5.0;
    vehicles[1].controller = ControllerType::Ambient;
    std::vector<Occupant> occ{{500.0, 4.5, 0, 30.0, 0},
                              {512.0, 4.5, 0, 5.0, 1}};
    sort_occupants(occ);
    AmbientPassInput in;
    in.vehicles = vehicles;
    in.sorted_occupants = occ;
    in.road = &road;
    in.cruise = &cruise;
    std::vector<double> out(2);
    ambient_accel_serial(in, out);
    CHECK(out[0] == -cruise.b_max); // 7.5 m gap, 25 m/s closure
    CHECK(out[1] > 0.0);            // free ahead
}
