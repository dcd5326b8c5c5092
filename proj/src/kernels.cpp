#include "mcsim/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace mcsim {

void sort_occupants(std::vector<Occupant>& occupants) {
    std::sort(occupants.begin(), occupants.end(),
              [](const Occupant& a, const Occupant& b) {
                  if (a.lane != b.lane) return a.lane < b.lane;
                  if (a.s != b.s) return a.s < b.s;
                  return a.vehicle < b.vehicle;
              });
}

LeadInfo find_lead(std::span<const Occupant> sorted, int lane, double s,
                   int self_vehicle, double sensor_range) {
    const Occupant* first = sorted.data();
    const Occupant* last = first + sorted.size();
    // First occupant in `lane` strictly ahead of s.
    const Occupant* it = std::upper_bound(
        first, last, std::pair<int, double>{lane, s},
        [](const std::pair<int, double>& key, const Occupant& o) {
            if (key.first != o.lane) return key.first < o.lane;
            return key.second < o.s;
        });
    for (; it != last && it->lane == lane; ++it) {
        if (it->vehicle == self_vehicle) continue;
        double gap = it->s - it->length - s;
        if (gap > sensor_range) break;  // entries ahead are even farther
        return LeadInfo{true, gap, it->v};
    }
    return LeadInfo{};
}

namespace {

double ambient_command(const AmbientPassInput& in, const VehicleState& veh) {
    double qs = std::min(veh.s, in.road->total_length());
    RoadAttributes attrs = in.road->query(qs);
    double cap = attrs.speed_limit;
    if (veh.desired_speed > 0.0) cap = std::min(cap, veh.desired_speed);

    LaneObservation obs;
    obs.lane_speed_limit = cap;
    obs.grade = attrs.grade;
    obs.curvature = attrs.curvature;
    LeadInfo lead = find_lead(in.sorted_occupants, veh.lane, veh.s, veh.id,
                              in.sensor_range);
    if (lead.exists) {
        obs.lead_exists = true;
        obs.d = lead.gap;
        obs.v_lead = lead.v;
    } else {
        obs.lead_exists = false;
        obs.d = in.d_free;
        obs.v_lead = cap;
    }
    return following_accel(veh.v, obs, *in.cruise);
}

}  // namespace

void ambient_accel_serial(const AmbientPassInput& in, std::span<double> out) {
    for (std::size_t i = 0; i < in.vehicles.size(); ++i) {
        const VehicleState& veh = in.vehicles[i];
        out[i] = veh.controller == ControllerType::Ambient
                     ? ambient_command(in, veh)
                     : 0.0;
    }
}

void ambient_accel_parallel(const AmbientPassInput& in, std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.vehicles.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const VehicleState& veh = in.vehicles[i];
        out[i] = veh.controller == ControllerType::Ambient
                     ? ambient_command(in, veh)
                     : 0.0;
    }
}

}  // namespace mcsim
