#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "mcsim/kernels.hpp"
#include "mcsim/scenario.hpp"

using namespace mcsim;

namespace {

double now_s() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch())
        .count();
#endif
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ambient car-following kernel: serial vs parallel"};
    int vehicles = 2000;
    int steps = 200;
    std::uint64_t seed = 7;
    app.add_option("--vehicles", vehicles, "approximate fleet size");
    app.add_option("--steps", steps, "timed passes per variant");
    app.add_option("--seed", seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    // a heavy-density highway long enough to hold the requested fleet
    double km = static_cast<double>(vehicles) * 50.0 / 1000.0 + 1.0;
    Scenario sc = gen_highway(km, Density::Heavy, seed, Profile::Rolling);
    RoadNetwork road = build_road(sc);

    std::vector<VehicleState> fleet;
    int id = 0;
    for (const VehicleSpec& spec : expand_ambient(sc)) {
        VehicleState v;
        v.id = id++;
        v.s = spec.s;
        v.lane = spec.lane;
        v.v = spec.v;
        v.controller = ControllerType::Ambient;
        v.desired_speed = spec.desired_speed;
        fleet.push_back(v);
    }
    std::printf("fleet: %zu vehicles on %.1f km, %d passes per variant\n",
                fleet.size(), km, steps);

    std::vector<Occupant> occupants;
    std::vector<double> a_serial(fleet.size());
    std::vector<double> a_parallel(fleet.size());
    double t_serial = 0.0;
    double t_parallel = 0.0;
    double checksum = 0.0;
    bool identical = true;

    for (int r = 0; r < steps; ++r) {
        occupants.clear();
        for (std::size_t i = 0; i < fleet.size(); ++i)
            occupants.push_back({fleet[i].s, sc.sim.vehicle_length,
                                 fleet[i].lane, fleet[i].v,
                                 static_cast<int>(i)});
        sort_occupants(occupants);

        AmbientPassInput in;
        in.vehicles = fleet;
        in.sorted_occupants = occupants;
        in.road = &road;
        in.cruise = &sc.cruise;
        in.sensor_range = sc.sim.sensor_range;
        in.d_free = sc.sim.d_free;

        double t0 = now_s();
        ambient_accel_serial(in, a_serial);
        double t1 = now_s();
        ambient_accel_parallel(in, a_parallel);
        double t2 = now_s();
        t_serial += t1 - t0;
        t_parallel += t2 - t1;

        if (std::memcmp(a_serial.data(), a_parallel.data(),
                        a_serial.size() * sizeof(double)) != 0)
            identical = false;

        for (std::size_t i = 0; i < fleet.size(); ++i) {
            fleet[i] = step_longitudinal(fleet[i], a_serial[i], sc.sim.dt);
            checksum += fleet[i].v;
        }
    }

    int threads = 1;
#ifdef _OPENMP
#pragma omp parallel
    {
#pragma omp single
        threads = omp_get_num_threads();
    }
#endif
    double ms_serial = 1e3 * t_serial / steps;
    double ms_parallel = 1e3 * t_parallel / steps;
    std::printf("serial:   %8.3f ms/pass\n", ms_serial);
    std::printf("parallel: %8.3f ms/pass  (%d threads)\n", ms_parallel,
                threads);
    std::printf("speedup:  %.2fx\n",
                ms_parallel > 0.0 ? ms_serial / ms_parallel : 0.0);
    std::printf("checksum: %.6f\n", checksum);
    std::printf("outputs bitwise-identical: %s\n", identical ? "yes" : "no");
    return identical ? 0 : 1;
}
