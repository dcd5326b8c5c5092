#pragma once

#include <span>
#include <vector>

#include "mcsim/cruise.hpp"
#include "mcsim/policy.hpp"
#include "mcsim/road.hpp"
#include "mcsim/vehicle.hpp"

namespace mcsim {

// Nearest vehicle ahead in a lane, by front-to-rear gap.
struct LeadInfo {
    bool exists = false;
    double gap = 0.0;
    double v = 0.0;
};

// Sort occupants by (lane, s, vehicle) so per-lane neighbours are adjacent.
void sort_occupants(std::vector<Occupant>& occupants);

// Binary search over occupants sorted by (lane, s). Entries owned by
// `self_vehicle` are skipped; leads farther than `sensor_range` (gap) are
// reported as absent.
LeadInfo find_lead(std::span<const Occupant> sorted, int lane, double s,
                   int self_vehicle, double sensor_range);

// One ambient car-following pass over the whole fleet. Slots whose vehicle
// is not Ambient are left at zero.
struct AmbientPassInput {
    std::span<const VehicleState> vehicles;
    std::span<const Occupant> sorted_occupants;
    const RoadNetwork* road = nullptr;
    const CruiseConfig* cruise = nullptr;
    double sensor_range = 400.0;
    double d_free = 400.0;
};

void ambient_accel_serial(const AmbientPassInput& in, std::span<double> out);
void ambient_accel_parallel(const AmbientPassInput& in, std::span<double> out);

}  // namespace mcsim
