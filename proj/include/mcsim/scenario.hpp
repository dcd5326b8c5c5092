#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsim/cruise.hpp"
#include "mcsim/fuel.hpp"
#include "mcsim/policy.hpp"
#include "mcsim/road.hpp"

namespace mcsim {

inline constexpr int kSchemaVersion = 1;

struct SimConfig {
    double dt = 0.05;            // s
    double max_time = 0.0;       // s; 0 = auto (3x free-flow trip time)
    double sensor_range = 400.0; // m
    double d_free = 400.0;       // m, free-lane gap sentinel
    double vehicle_length = 4.5; // m
    double lane_width = 3.5;     // m
    double lane_change_duration = 4.0; // s
    bool record_vehicles = false; // keep per-step ambient snapshots
};

struct SegmentSpec {
    double length = 0.0;
    double speed_limit = 0.0;
    double grade = 0.0;
    double curvature = 0.0;
};

struct RoadSpec {
    int lanes = 0;
    double max_curvature = 0.1;
    std::vector<SegmentSpec> segments;
};

struct EgoSpec {
    double s = 0.0;
    int lane = 0;
    double v = 0.0;
    std::optional<ControllerType> controller; // run flag may override
};

struct VehicleSpec {
    double s = 0.0;
    int lane = 0;
    double v = 0.0;
    double desired_speed = 0.0;
};

enum class Density { Moderate, Heavy };

// Seeded ambient-traffic population: one vehicle per `spacing` meters of
// road (jittered), dealt to random lanes with random desired speeds.
struct AmbientSpec {
    Density density = Density::Moderate;
    double jitter = 0.2;        // +-20% spacing jitter
    double speed_frac_min = 0.85;
    double speed_frac_max = 1.0;
    double start_s = 150.0;     // first placement
    double end_margin = 200.0;  // keep clear of the route end
    double min_lane_gap = 35.0; // per-lane spawn separation
    double ego_clear_ahead = 300.0;  // clean air ahead of the ego at spawn
    double ego_clear_behind = 60.0;  // and behind it, in its lane
};

double density_spacing(Density d); // m/vehicle along the road

struct Scenario {
    int version = kSchemaVersion;
    std::string name;
    std::uint64_t seed = 0;
    SimConfig sim;
    RoadSpec road;
    EgoSpec ego;
    std::vector<VehicleSpec> vehicles; // explicit ambient vehicles
    std::optional<AmbientSpec> ambient; // seeded population, if any
    CruiseConfig cruise;
    PolicyConfig policy;
    FuelPolynomial fuel;
    std::optional<std::string> fuel_table_path; // overrides the polynomial
};

// Validation failure carrying one diagnostic per violated field, each
// prefixed with its field path.
class ScenarioError : public std::runtime_error {
  public:
    explicit ScenarioError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const { return issues_; }

  private:
    std::vector<std::string> issues_;
};

// Parse + validate a scenario from the canonical text format, or from the
// equivalent JSON document (detected by the leading '{'). Throws
// ScenarioError listing every violation.
Scenario parse_scenario(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

// Every semantic violation in the scenario, one diagnostic per field
// (empty when the scenario is valid).
std::vector<std::string> validate_scenario(const Scenario& s);

// Canonical text serialization; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

// Deterministic expansion of the seeded ambient population into explicit
// vehicles (explicit vehicles from the scenario are not included).
std::vector<VehicleSpec> expand_ambient(const Scenario& s);

// Build the validated road network.
RoadNetwork build_road(const Scenario& s);

// Straight 3-lane road, 2500 m at 31.1 m/s; ego enters mid-lane at the
// limit with a 19.4 m/s lead 450 m ahead in its lane.
Scenario gen_simple_overtake();

enum class Profile { Flat, Rolling };

// Multi-segment highway with seeded limits, grades, curvatures and ambient
// traffic of the requested density. Deterministic in its arguments.
Scenario gen_highway(double length_km, Density density, std::uint64_t seed,
                     Profile profile = Profile::Rolling);

const char* to_string(Density d);
const char* to_string(Profile p);

} // namespace mcsim
