#include "mcsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mcsim {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::string msg = "invalid scenario:";
    for (const std::string& s : issues) {
        msg += "\n  - ";
        msg += s;
    }
    return msg;
}

std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// Deterministic, platform-independent generator (splitmix64).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

// ---------------------------------------------------------------------------
// shared key dispatch for the text and JSON front ends

struct Value {
    enum class Kind { Number, String, Bool } kind = Kind::Number;
    double num = 0.0;
    std::uint64_t unum = 0;
    bool has_unum = false;
    std::string str;
    bool b = false;
};

using Issues = std::vector<std::string>;

bool take_f64(const Value& v, const std::string& path, Issues& issues,
              double& dst) {
    if (v.kind != Value::Kind::Number) {
        issues.push_back(path + ": expected a number");
        return false;
    }
    if (!std::isfinite(v.num)) {
        issues.push_back(path + ": must be finite");
        return false;
    }
    dst = v.num;
    return true;
}

bool take_i32(const Value& v, const std::string& path, Issues& issues,
              int& dst) {
    if (v.kind != Value::Kind::Number || v.num != std::floor(v.num) ||
        std::abs(v.num) > 1e9) {
        issues.push_back(path + ": expected an integer");
        return false;
    }
    dst = static_cast<int>(v.num);
    return true;
}

bool take_u64(const Value& v, const std::string& path, Issues& issues,
              std::uint64_t& dst) {
    if (v.kind == Value::Kind::Number && v.has_unum) {
        dst = v.unum;
        return true;
    }
    issues.push_back(path + ": expected a non-negative integer");
    return false;
}

bool take_bool(const Value& v, const std::string& path, Issues& issues,
               bool& dst) {
    if (v.kind != Value::Kind::Bool) {
        issues.push_back(path + ": expected true or false");
        return false;
    }
    dst = v.b;
    return true;
}

bool take_str(const Value& v, const std::string& path, Issues& issues,
              std::string& dst) {
    if (v.kind != Value::Kind::String) {
        issues.push_back(path + ": expected a string");
        return false;
    }
    dst = v.str;
    return true;
}

// Returns false if the key is unknown in its section.
bool apply_key(Scenario& sc, const std::string& section,
               const std::string& key, const Value& v, const std::string& path,
               Issues& issues) {
    auto f64 = [&](double& dst) { take_f64(v, path, issues, dst); };
    auto i32 = [&](int& dst) { take_i32(v, path, issues, dst); };

    if (section.empty()) {
        if (key == "version") {
            i32(sc.version);
        } else if (key == "name") {
            take_str(v, path, issues, sc.name);
        } else if (key == "seed") {
            take_u64(v, path, issues, sc.seed);
        } else {
            return false;
        }
        return true;
    }
    if (section == "sim") {
        SimConfig& c = sc.sim;
        if (key == "dt") f64(c.dt);
        else if (key == "max_time") f64(c.max_time);
        else if (key == "sensor_range") f64(c.sensor_range);
        else if (key == "d_free") f64(c.d_free);
        else if (key == "vehicle_length") f64(c.vehicle_length);
        else if (key == "lane_width") f64(c.lane_width);
        else if (key == "lane_change_duration") f64(c.lane_change_duration);
        else if (key == "record_vehicles") take_bool(v, path, issues, c.record_vehicles);
        else return false;
        return true;
    }
    if (section == "road") {
        if (key == "lanes") i32(sc.road.lanes);
        else if (key == "max_curvature") f64(sc.road.max_curvature);
        else return false;
        return true;
    }
    if (section == "segment") {
        SegmentSpec& seg = sc.road.segments.back();
        if (key == "length") f64(seg.length);
        else if (key == "speed_limit") f64(seg.speed_limit);
        else if (key == "grade") f64(seg.grade);
        else if (key == "curvature") f64(seg.curvature);
        else return false;
        return true;
    }
    if (section == "ego") {
        if (key == "s") f64(sc.ego.s);
        else if (key == "lane") i32(sc.ego.lane);
        else if (key == "v") f64(sc.ego.v);
        else if (key == "controller") {
            std::string str;
            if (take_str(v, path, issues, str)) {
                if (str == "multicruise")
                    sc.ego.controller = ControllerType::MultiCruise;
                else if (str == "lane_following")
                    sc.ego.controller = ControllerType::LaneFollowing;
                else
                    issues.push_back(path +
                                     ": expected multicruise or lane_following");
            }
        } else return false;
        return true;
    }
    if (section == "vehicle") {
        VehicleSpec& veh = sc.vehicles.back();
        if (key == "s") f64(veh.s);
        else if (key == "lane") i32(veh.lane);
        else if (key == "v") f64(veh.v);
        else if (key == "desired_speed") f64(veh.desired_speed);
        else return false;
        return true;
    }
    if (section == "ambient") {
        AmbientSpec& a = *sc.ambient;
        if (key == "density") {
            std::string str;
            if (take_str(v, path, issues, str)) {
                if (str == "moderate") a.density = Density::Moderate;
                else if (str == "heavy") a.density = Density::Heavy;
                else issues.push_back(path + ": expected moderate or heavy");
            }
        }
        else if (key == "jitter") f64(a.jitter);
        else if (key == "speed_frac_min") f64(a.speed_frac_min);
        else if (key == "speed_frac_max") f64(a.speed_frac_max);
        else if (key == "start_s") f64(a.start_s);
        else if (key == "end_margin") f64(a.end_margin);
        else if (key == "min_lane_gap") f64(a.min_lane_gap);
        else if (key == "ego_clear_ahead") f64(a.ego_clear_ahead);
        else if (key == "ego_clear_behind") f64(a.ego_clear_behind);
        else return false;
        return true;
    }
    if (section == "cruise") {
        CruiseConfig& c = sc.cruise;
        if (key == "a_max") f64(c.a_max);
        else if (key == "b_comf") f64(c.b_comf);
        else if (key == "b_max") f64(c.b_max);
        else if (key == "t_headway") f64(c.t_headway);
        else if (key == "min_gap") f64(c.min_gap);
        else if (key == "a_lat_max") f64(c.a_lat_max);
        else if (key == "horizon") f64(c.horizon);
        else if (key == "traj_dt") f64(c.traj_dt);
        else if (key == "w_fuel") f64(c.w_fuel);
        else if (key == "w_progress") f64(c.w_progress);
        else if (key == "w_comfort") f64(c.w_comfort);
        else if (key == "k_grade") f64(c.k_grade);
        else return false;
        return true;
    }
    if (section == "policy") {
        PolicyConfig& c = sc.policy;
        if (key == "s_scale") f64(c.s_scale);
        else if (key == "c_thr_factor") f64(c.c_thr_factor);
        else if (key == "c_thr_absolute") f64(c.c_thr_absolute);
        else if (key == "lane_ok_factor") f64(c.lane_ok_factor);
        else if (key == "switch_margin") f64(c.switch_margin);
        else if (key == "confirm_evals") i32(c.confirm_evals);
        else if (key == "d_thr") f64(c.d_thr);
        else if (key == "t_delta_floor") f64(c.t_delta_floor);
        else if (key == "box_ahead") f64(c.box_ahead);
        else if (key == "box_behind") f64(c.box_behind);
        else if (key == "policy_period") f64(c.policy_period);
        else if (key == "return_hold") f64(c.return_hold);
        else if (key == "return_margin") f64(c.return_margin);
        else if (key == "headroom_margin") f64(c.headroom_margin);
        else return false;
        return true;
    }
    if (section == "fuel") {
        FuelPolynomial& c = sc.fuel;
        if (key == "c0") f64(c.c0);
        else if (key == "c1") f64(c.c1);
        else if (key == "c2") f64(c.c2);
        else if (key == "c3") f64(c.c3);
        else if (key == "c4") f64(c.c4);
        else if (key == "idle_rate") f64(c.idle_rate);
        else if (key == "table") {
            std::string str;
            if (take_str(v, path, issues, str)) sc.fuel_table_path = str;
        }
        else return false;
        return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// canonical text format

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strip a trailing comment; '#' inside a quoted string does not count.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

bool parse_quoted(const std::string& raw, std::string& out) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') return false;
    out.clear();
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\\') {
            if (i + 2 >= raw.size()) return false;
            char e = raw[++i];
            if (e == '"') out += '"';
            else if (e == '\\') out += '\\';
            else return false;
        } else if (c == '"') {
            return false; // unescaped quote inside the literal
        } else {
            out += c;
        }
    }
    return true;
}

bool parse_number(const std::string& raw, Value& v) {
    const char* begin = raw.c_str();
    char* end = nullptr;
    errno = 0;
    double d = std::strtod(begin, &end);
    if (end != begin + raw.size() || raw.empty()) return false;
    v.kind = Value::Kind::Number;
    v.num = d;
    v.has_unum = false;
    if (d >= 0.0 && d == std::floor(d) && d <= 1.8e19) {
        // recover full precision for unsigned fields (e.g. 64-bit seeds)
        char* uend = nullptr;
        errno = 0;
        unsigned long long u = std::strtoull(begin, &uend, 10);
        if (uend == begin + raw.size() && errno == 0) {
            v.unum = u;
            v.has_unum = true;
            v.num = static_cast<double>(u);
        } else if (d <= 9.0e15) {
            v.unum = static_cast<std::uint64_t>(d);
            v.has_unum = true;
        }
    }
    return true;
}

const std::set<std::string>& known_singleton_sections() {
    static const std::set<std::string> s = {"sim",    "road",   "ego",
                                            "ambient", "cruise", "policy",
                                            "fuel"};
    return s;
}

Scenario parse_text(const std::string& text) {
    Scenario sc;
    Issues issues;
    std::set<std::string> seen_sections;
    std::set<std::string> seen_keys; // reset at each section header
    std::string section;             // "" = top level
    bool section_known = true;
    int seg_idx = -1;
    int veh_idx = -1;

    auto key_path = [&](const std::string& key) -> std::string {
        if (section.empty()) return key;
        if (section == "segment")
            return "road.segments[" + std::to_string(seg_idx) + "]." + key;
        if (section == "vehicle")
            return "vehicles[" + std::to_string(veh_idx) + "]." + key;
        return section + "." + key;
    };

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        auto at_line = [&](const std::string& msg) {
            issues.push_back("line " + std::to_string(lineno) + ": " + msg);
        };

        if (line.front() == '[') {
            bool repeated = line.size() >= 4 && line[1] == '[';
            std::size_t close = line.find(repeated ? "]]" : "]");
            std::string name =
                close == std::string::npos
                    ? ""
                    : trim(line.substr(repeated ? 2 : 1,
                                       close - (repeated ? 2 : 1)));
            std::string tail =
                close == std::string::npos
                    ? ""
                    : trim(line.substr(close + (repeated ? 2 : 1)));
            if (name.empty() || !tail.empty()) {
                at_line("malformed section header '" + line + "'");
                section = "";
                section_known = false;
                continue;
            }
            seen_keys.clear();
            if (repeated) {
                if (name == "segment") {
                    sc.road.segments.emplace_back();
                    ++seg_idx;
                    section = "segment";
                    section_known = true;
                } else if (name == "vehicle") {
                    sc.vehicles.emplace_back();
                    ++veh_idx;
                    section = "vehicle";
                    section_known = true;
                } else {
                    at_line("unknown section [[" + name + "]]");
                    section = name;
                    section_known = false;
                }
            } else {
                if (known_singleton_sections().count(name) == 0) {
                    at_line("unknown section [" + name + "]");
                    section = name;
                    section_known = false;
                } else if (!seen_sections.insert(name).second) {
                    at_line("duplicate section [" + name + "]");
                    section = name;
                    section_known = false;
                } else {
                    section = name;
                    section_known = true;
                    if (name == "ambient") sc.ambient.emplace();
                }
            }
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            at_line("expected 'key = value'");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string raw_val = trim(line.substr(eq + 1));
        if (key.empty() || raw_val.empty()) {
            at_line("expected 'key = value'");
            continue;
        }
        if (!section_known) continue; // already reported at the header
        if (!seen_keys.insert(key).second) {
            at_line("duplicate key '" + key + "'");
            continue;
        }

        Value v;
        if (raw_val.front() == '"') {
            v.kind = Value::Kind::String;
            if (!parse_quoted(raw_val, v.str)) {
                at_line("malformed string literal");
                continue;
            }
        } else if (raw_val == "true" || raw_val == "false") {
            v.kind = Value::Kind::Bool;
            v.b = raw_val == "true";
        } else if (!parse_number(raw_val, v)) {
            at_line("invalid value '" + raw_val + "'");
            continue;
        }

        if (!apply_key(sc, section, key, v, key_path(key), issues))
            at_line("unknown key '" + key + "'" +
                    (section.empty() ? "" : " in [" + section + "]"));
    }

    if (seen_sections.count("road") == 0)
        issues.push_back("road: section is required");
    if (seen_sections.count("ego") == 0)
        issues.push_back("ego: section is required");

    for (const std::string& s : validate_scenario(sc)) issues.push_back(s);
    if (!issues.empty()) throw ScenarioError(std::move(issues));
    return sc;
}

// ---------------------------------------------------------------------------
// JSON front end

using json = nlohmann::json;

Value json_value(const json& j) {
    Value v;
    if (j.is_number_unsigned()) {
        v.kind = Value::Kind::Number;
        v.unum = j.get<std::uint64_t>();
        v.has_unum = true;
        v.num = static_cast<double>(v.unum);
    } else if (j.is_number_integer()) {
        v.kind = Value::Kind::Number;
        auto i = j.get<std::int64_t>();
        v.num = static_cast<double>(i);
        if (i >= 0) {
            v.unum = static_cast<std::uint64_t>(i);
            v.has_unum = true;
        }
    } else if (j.is_number_float()) {
        v.kind = Value::Kind::Number;
        v.num = j.get<double>();
        if (v.num >= 0.0 && v.num == std::floor(v.num) && v.num <= 9.0e15) {
            v.unum = static_cast<std::uint64_t>(v.num);
            v.has_unum = true;
        }
    } else if (j.is_string()) {
        v.kind = Value::Kind::String;
        v.str = j.get<std::string>();
    } else if (j.is_boolean()) {
        v.kind = Value::Kind::Bool;
        v.b = j.get<bool>();
    } else {
        v.kind = Value::Kind::String;
        v.str.clear();
    }
    return v;
}

void apply_json_object(Scenario& sc, const std::string& section,
                       const json& obj, const std::string& prefix,
                       Issues& issues) {
    if (!obj.is_object()) {
        issues.push_back(prefix + ": expected an object");
        return;
    }
    for (const auto& [key, val] : obj.items()) {
        std::string path = prefix.empty() ? key : prefix + "." + key;
        if (val.is_object() || val.is_array()) {
            issues.push_back(path + ": unexpected nested value");
            continue;
        }
        if (!apply_key(sc, section, key, json_value(val), path, issues))
            issues.push_back(path + ": unknown key");
    }
}

Scenario parse_json(const std::string& text) {
    Issues issues;
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ScenarioError({"json: malformed document"});
    if (!doc.is_object()) throw ScenarioError({"json: expected an object"});

    Scenario sc;
    bool have_road = false;
    bool have_ego = false;
    for (const auto& [key, val] : doc.items()) {
        if (key == "version" || key == "name" || key == "seed") {
            if (!apply_key(sc, "", key, json_value(val), key, issues))
                issues.push_back(key + ": unknown key");
        } else if (key == "sim" || key == "ego" || key == "cruise" ||
                   key == "policy" || key == "fuel") {
            if (key == "ego") have_ego = true;
            apply_json_object(sc, key, val, key, issues);
        } else if (key == "ambient") {
            sc.ambient.emplace();
            apply_json_object(sc, key, val, key, issues);
        } else if (key == "road") {
            have_road = true;
            if (!val.is_object()) {
                issues.push_back("road: expected an object");
                continue;
            }
            for (const auto& [rkey, rval] : val.items()) {
                if (rkey == "segments") {
                    if (!rval.is_array()) {
                        issues.push_back("road.segments: expected an array");
                        continue;
                    }
                    for (std::size_t i = 0; i < rval.size(); ++i) {
                        sc.road.segments.emplace_back();
                        apply_json_object(
                            sc, "segment", rval[i],
                            "road.segments[" + std::to_string(i) + "]",
                            issues);
                    }
                } else if (!apply_key(sc, "road", rkey, json_value(rval),
                                      "road." + rkey, issues)) {
                    issues.push_back("road." + rkey + ": unknown key");
                }
            }
        } else if (key == "vehicles") {
            if (!val.is_array()) {
                issues.push_back("vehicles: expected an array");
                continue;
            }
            for (std::size_t i = 0; i < val.size(); ++i) {
                sc.vehicles.emplace_back();
                apply_json_object(sc, "vehicle", val[i],
                                  "vehicles[" + std::to_string(i) + "]",
                                  issues);
            }
        } else {
            issues.push_back(key + ": unknown key");
        }
    }
    if (!have_road) issues.push_back("road: section is required");
    if (!have_ego) issues.push_back("ego: section is required");

    for (const std::string& s : validate_scenario(sc)) issues.push_back(s);
    if (!issues.empty()) throw ScenarioError(std::move(issues));
    return sc;
}

// ---------------------------------------------------------------------------

void check(bool ok, Issues& issues, const std::string& msg) {
    if (!ok) issues.push_back(msg);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<std::string> validate_scenario(const Scenario& s) {
    Issues issues;
    check(s.version == kSchemaVersion, issues,
          "version: unsupported schema version " + std::to_string(s.version) +
              " (supported: " + std::to_string(kSchemaVersion) + ")");
    check(s.name.find('\n') == std::string::npos, issues,
          "name: must not contain newlines");

    const SimConfig& sim = s.sim;
    check(finite(sim.dt) && sim.dt > 0.0 && sim.dt <= 1.0, issues,
          "sim.dt: must be in (0, 1]");
    check(finite(sim.max_time) && sim.max_time >= 0.0, issues,
          "sim.max_time: must be >= 0 (0 = automatic)");
    check(finite(sim.sensor_range) && sim.sensor_range > 0.0, issues,
          "sim.sensor_range: must be > 0");
    check(finite(sim.d_free) && sim.d_free > 0.0, issues,
          "sim.d_free: must be > 0");
    check(finite(sim.vehicle_length) && sim.vehicle_length > 0.0, issues,
          "sim.vehicle_length: must be > 0");
    check(finite(sim.lane_width) && sim.lane_width > 0.0, issues,
          "sim.lane_width: must be > 0");
    check(finite(sim.lane_change_duration) && sim.lane_change_duration > 0.0,
          issues, "sim.lane_change_duration: must be > 0");

    bool road_ok = true;
    auto road_check = [&](bool ok, const std::string& msg) {
        if (!ok) {
            issues.push_back(msg);
            road_ok = false;
        }
    };
    road_check(s.road.lanes >= 1, "road.lanes: must be >= 1");
    road_check(finite(s.road.max_curvature) && s.road.max_curvature > 0.0,
               "road.max_curvature: must be > 0");
    road_check(!s.road.segments.empty(),
               "road.segments: at least one segment is required");
    double total = 0.0;
    for (std::size_t i = 0; i < s.road.segments.size(); ++i) {
        const SegmentSpec& seg = s.road.segments[i];
        std::string p = "road.segments[" + std::to_string(i) + "]";
        road_check(finite(seg.length) && seg.length > 0.0,
                   p + ".length: must be > 0");
        road_check(finite(seg.speed_limit) && seg.speed_limit > 0.0,
                   p + ".speed_limit: must be > 0");
        road_check(finite(seg.grade) && std::abs(seg.grade) < 0.2,
                   p + ".grade: must satisfy |grade| < 0.2");
        road_check(finite(seg.curvature) &&
                       std::abs(seg.curvature) <= s.road.max_curvature,
                   p + ".curvature: must satisfy |curvature| <= "
                       "road.max_curvature");
        if (finite(seg.length) && seg.length > 0.0) total += seg.length;
    }

    check(finite(s.ego.v) && s.ego.v >= 0.0, issues, "ego.v: must be >= 0");
    if (road_ok) {
        check(finite(s.ego.s) && s.ego.s >= 0.0 && s.ego.s < total, issues,
              "ego.s: must be in [0, road length)");
        check(s.ego.lane >= 0 && s.ego.lane < s.road.lanes, issues,
              "ego.lane: must be in [0, road.lanes)");
    }
    for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
        const VehicleSpec& veh = s.vehicles[i];
        std::string p = "vehicles[" + std::to_string(i) + "]";
        check(finite(veh.v) && veh.v >= 0.0, issues, p + ".v: must be >= 0");
        check(finite(veh.desired_speed) && veh.desired_speed >= 0.0, issues,
              p + ".desired_speed: must be >= 0 (0 = uncapped)");
        if (road_ok) {
            check(finite(veh.s) && veh.s >= 0.0 && veh.s <= total, issues,
                  p + ".s: must be in [0, road length]");
            check(veh.lane >= 0 && veh.lane < s.road.lanes, issues,
                  p + ".lane: must be in [0, road.lanes)");
        }
    }

    if (s.ambient) {
        const AmbientSpec& a = *s.ambient;
        check(finite(a.jitter) && a.jitter >= 0.0 && a.jitter <= 0.9, issues,
              "ambient.jitter: must be in [0, 0.9]");
        check(finite(a.speed_frac_min) && a.speed_frac_min > 0.0, issues,
              "ambient.speed_frac_min: must be > 0");
        check(finite(a.speed_frac_max) &&
                  a.speed_frac_max >= a.speed_frac_min &&
                  a.speed_frac_max <= 1.5,
              issues,
              "ambient.speed_frac_max: must be in [speed_frac_min, 1.5]");
        check(finite(a.start_s) && a.start_s >= 0.0, issues,
              "ambient.start_s: must be >= 0");
        check(finite(a.end_margin) && a.end_margin >= 0.0, issues,
              "ambient.end_margin: must be >= 0");
        check(finite(a.min_lane_gap) &&
                  a.min_lane_gap > s.sim.vehicle_length,
              issues, "ambient.min_lane_gap: must exceed sim.vehicle_length");
        check(finite(a.ego_clear_ahead) && a.ego_clear_ahead >= 0.0, issues,
              "ambient.ego_clear_ahead: must be >= 0");
        check(finite(a.ego_clear_behind) && a.ego_clear_behind >= 0.0, issues,
              "ambient.ego_clear_behind: must be >= 0");
    }

    const CruiseConfig& c = s.cruise;
    check(finite(c.a_max) && c.a_max > 0.0, issues, "cruise.a_max: must be > 0");
    check(finite(c.b_comf) && c.b_comf > 0.0, issues,
          "cruise.b_comf: must be > 0");
    check(finite(c.b_max) && c.b_max > 0.0, issues, "cruise.b_max: must be > 0");
    check(finite(c.t_headway) && c.t_headway >= 0.0, issues,
          "cruise.t_headway: must be >= 0");
    check(finite(c.min_gap) && c.min_gap > 0.0, issues,
          "cruise.min_gap: must be > 0");
    check(finite(c.a_lat_max) && c.a_lat_max > 0.0, issues,
          "cruise.a_lat_max: must be > 0");
    check(finite(c.horizon) && c.horizon > 0.0, issues,
          "cruise.horizon: must be > 0");
    check(finite(c.traj_dt) && c.traj_dt > 0.0, issues,
          "cruise.traj_dt: must be > 0");
    check(finite(c.w_fuel) && c.w_fuel >= 0.0, issues,
          "cruise.w_fuel: must be >= 0");
    check(finite(c.w_progress) && c.w_progress >= 0.0, issues,
          "cruise.w_progress: must be >= 0");
    check(finite(c.w_comfort) && c.w_comfort >= 0.0, issues,
          "cruise.w_comfort: must be >= 0");
    check(finite(c.k_grade) && c.k_grade >= 0.0, issues,
          "cruise.k_grade: must be >= 0");

    const PolicyConfig& p = s.policy;
    check(finite(p.s_scale) && p.s_scale >= 0.0, issues,
          "policy.s_scale: must be >= 0");
    check(finite(p.c_thr_factor) && p.c_thr_factor > 0.0, issues,
          "policy.c_thr_factor: must be > 0");
    check(finite(p.c_thr_absolute), issues,
          "policy.c_thr_absolute: must be finite (<= 0 disables)");
    check(finite(p.d_thr) && p.d_thr >= 0.0, issues,
          "policy.d_thr: must be >= 0");
    check(finite(p.t_delta_floor) && p.t_delta_floor > 0.0, issues,
          "policy.t_delta_floor: must be > 0");
    check(finite(p.box_ahead) && p.box_ahead >= 0.0, issues,
          "policy.box_ahead: must be >= 0");
    check(finite(p.box_behind) && p.box_behind >= 0.0, issues,
          "policy.box_behind: must be >= 0");
    check(finite(p.policy_period) && p.policy_period > 0.0, issues,
          "policy.policy_period: must be > 0");
    check(finite(p.return_hold) && p.return_hold >= 0.0, issues,
          "policy.return_hold: must be >= 0");
    check(finite(p.return_margin) && p.return_margin >= 0.0, issues,
          "policy.return_margin: must be >= 0");
    check(finite(p.switch_margin) && p.switch_margin >= 0.0 &&
              p.switch_margin < 1.0,
          issues, "policy.switch_margin: must be in [0, 1)");
    check(finite(p.lane_ok_factor) && p.lane_ok_factor > 0.0, issues,
          "policy.lane_ok_factor: must be > 0");
    check(p.confirm_evals >= 1, issues, "policy.confirm_evals: must be >= 1");
    check(finite(p.headroom_margin) && p.headroom_margin >= 0.0, issues,
          "policy.headroom_margin: must be >= 0");

    const FuelPolynomial& f = s.fuel;
    check(finite(f.c0) && finite(f.c1) && finite(f.c2) && finite(f.c3) &&
              finite(f.c4),
          issues, "fuel: coefficients must be finite");
    check(finite(f.idle_rate) && f.idle_rate >= 0.0, issues,
          "fuel.idle_rate: must be >= 0");
    if (s.fuel_table_path)
        check(!s.fuel_table_path->empty(), issues,
              "fuel.table: must not be empty");
    return issues;
}

Scenario parse_scenario(const std::string& text) {
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
        if (ch == '{') return parse_json(text);
        break;
    }
    return parse_text(text);
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError({"file: cannot open '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream out;
    auto esc = [](const std::string& raw) {
        std::string q = "\"";
        for (char c : raw) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + "\"";
    };
    out << "version = " << s.version << "\n";
    out << "name = " << esc(s.name) << "\n";
    out << "seed = " << s.seed << "\n";

    out << "\n[sim]\n";
    out << "dt = " << fmt_double(s.sim.dt) << "\n";
    out << "max_time = " << fmt_double(s.sim.max_time) << "\n";
    out << "sensor_range = " << fmt_double(s.sim.sensor_range) << "\n";
    out << "d_free = " << fmt_double(s.sim.d_free) << "\n";
    out << "vehicle_length = " << fmt_double(s.sim.vehicle_length) << "\n";
    out << "lane_width = " << fmt_double(s.sim.lane_width) << "\n";
    out << "lane_change_duration = " << fmt_double(s.sim.lane_change_duration)
        << "\n";
    out << "record_vehicles = " << (s.sim.record_vehicles ? "true" : "false")
        << "\n";

    out << "\n[road]\n";
    out << "lanes = " << s.road.lanes << "\n";
    out << "max_curvature = " << fmt_double(s.road.max_curvature) << "\n";
    for (const SegmentSpec& seg : s.road.segments) {
        out << "\n[[segment]]\n";
        out << "length = " << fmt_double(seg.length) << "\n";
        out << "speed_limit = " << fmt_double(seg.speed_limit) << "\n";
        out << "grade = " << fmt_double(seg.grade) << "\n";
        out << "curvature = " << fmt_double(seg.curvature) << "\n";
    }

    out << "\n[ego]\n";
    out << "s = " << fmt_double(s.ego.s) << "\n";
    out << "lane = " << s.ego.lane << "\n";
    out << "v = " << fmt_double(s.ego.v) << "\n";
    if (s.ego.controller)
        out << "controller = "
            << (*s.ego.controller == ControllerType::MultiCruise
                    ? "\"multicruise\""
                    : "\"lane_following\"")
            << "\n";

    for (const VehicleSpec& veh : s.vehicles) {
        out << "\n[[vehicle]]\n";
        out << "s = " << fmt_double(veh.s) << "\n";
        out << "lane = " << veh.lane << "\n";
        out << "v = " << fmt_double(veh.v) << "\n";
        out << "desired_speed = " << fmt_double(veh.desired_speed) << "\n";
    }

    if (s.ambient) {
        const AmbientSpec& a = *s.ambient;
        out << "\n[ambient]\n";
        out << "density = \"" << to_string(a.density) << "\"\n";
        out << "jitter = " << fmt_double(a.jitter) << "\n";
        out << "speed_frac_min = " << fmt_double(a.speed_frac_min) << "\n";
        out << "speed_frac_max = " << fmt_double(a.speed_frac_max) << "\n";
        out << "start_s = " << fmt_double(a.start_s) << "\n";
        out << "end_margin = " << fmt_double(a.end_margin) << "\n";
        out << "min_lane_gap = " << fmt_double(a.min_lane_gap) << "\n";
        out << "ego_clear_ahead = " << fmt_double(a.ego_clear_ahead) << "\n";
        out << "ego_clear_behind = " << fmt_double(a.ego_clear_behind)
            << "\n";
    }

    out << "\n[cruise]\n";
    out << "a_max = " << fmt_double(s.cruise.a_max) << "\n";
    out << "b_comf = " << fmt_double(s.cruise.b_comf) << "\n";
    out << "b_max = " << fmt_double(s.cruise.b_max) << "\n";
    out << "t_headway = " << fmt_double(s.cruise.t_headway) << "\n";
    out << "min_gap = " << fmt_double(s.cruise.min_gap) << "\n";
    out << "a_lat_max = " << fmt_double(s.cruise.a_lat_max) << "\n";
    out << "horizon = " << fmt_double(s.cruise.horizon) << "\n";
    out << "traj_dt = " << fmt_double(s.cruise.traj_dt) << "\n";
    out << "w_fuel = " << fmt_double(s.cruise.w_fuel) << "\n";
    out << "w_progress = " << fmt_double(s.cruise.w_progress) << "\n";
    out << "w_comfort = " << fmt_double(s.cruise.w_comfort) << "\n";
    out << "k_grade = " << fmt_double(s.cruise.k_grade) << "\n";

    out << "\n[policy]\n";
    out << "s_scale = " << fmt_double(s.policy.s_scale) << "\n";
    out << "c_thr_factor = " << fmt_double(s.policy.c_thr_factor) << "\n";
    out << "c_thr_absolute = " << fmt_double(s.policy.c_thr_absolute) << "\n";
    out << "lane_ok_factor = " << fmt_double(s.policy.lane_ok_factor) << "\n";
    out << "switch_margin = " << fmt_double(s.policy.switch_margin) << "\n";
    out << "confirm_evals = " << s.policy.confirm_evals << "\n";
    out << "d_thr = " << fmt_double(s.policy.d_thr) << "\n";
    out << "t_delta_floor = " << fmt_double(s.policy.t_delta_floor) << "\n";
    out << "box_ahead = " << fmt_double(s.policy.box_ahead) << "\n";
    out << "box_behind = " << fmt_double(s.policy.box_behind) << "\n";
    out << "policy_period = " << fmt_double(s.policy.policy_period) << "\n";
    out << "return_hold = " << fmt_double(s.policy.return_hold) << "\n";
    out << "return_margin = " << fmt_double(s.policy.return_margin) << "\n";
    out << "headroom_margin = " << fmt_double(s.policy.headroom_margin)
        << "\n";

    out << "\n[fuel]\n";
    out << "c0 = " << fmt_double(s.fuel.c0) << "\n";
    out << "c1 = " << fmt_double(s.fuel.c1) << "\n";
    out << "c2 = " << fmt_double(s.fuel.c2) << "\n";
    out << "c3 = " << fmt_double(s.fuel.c3) << "\n";
    out << "c4 = " << fmt_double(s.fuel.c4) << "\n";
    out << "idle_rate = " << fmt_double(s.fuel.idle_rate) << "\n";
    if (s.fuel_table_path) out << "table = " << esc(*s.fuel_table_path) << "\n";
    return out.str();
}

double density_spacing(Density d) {
    return d == Density::Moderate ? 100.0 : 50.0;
}

const char* to_string(Density d) {
    return d == Density::Moderate ? "moderate" : "heavy";
}

const char* to_string(Profile p) {
    return p == Profile::Flat ? "flat" : "rolling";
}

RoadNetwork build_road(const Scenario& s) {
    std::vector<RoadSegment> segs;
    segs.reserve(s.road.segments.size());
    for (const SegmentSpec& seg : s.road.segments)
        segs.push_back({seg.length, seg.speed_limit, seg.grade, seg.curvature});
    return RoadNetwork(std::move(segs), s.road.lanes, s.road.max_curvature);
}

std::vector<VehicleSpec> expand_ambient(const Scenario& s) {
    std::vector<VehicleSpec> out;
    if (!s.ambient) return out;
    const AmbientSpec& a = *s.ambient;
    RoadNetwork road = build_road(s);
    const double total = road.total_length();
    const double spacing = density_spacing(a.density);
    const int lanes = road.lane_count();

    // front positions already taken, per lane
    std::vector<std::vector<double>> taken(static_cast<std::size_t>(lanes));
    auto lane_free = [&](int lane, double p) {
        for (double q : taken[static_cast<std::size_t>(lane)])
            if (std::abs(p - q) < a.min_lane_gap) return false;
        return true;
    };
    if (s.ego.lane >= 0 && s.ego.lane < lanes)
        taken[static_cast<std::size_t>(s.ego.lane)].push_back(s.ego.s);
    for (const VehicleSpec& veh : s.vehicles)
        if (veh.lane >= 0 && veh.lane < lanes)
            taken[static_cast<std::size_t>(veh.lane)].push_back(veh.s);

    SplitMix64 rng(s.seed);
    for (int k = 0;; ++k) {
        double base = a.start_s + spacing * static_cast<double>(k);
        if (base > total - a.end_margin) break;
        double jit = rng.uniform(-a.jitter, a.jitter) * spacing;
        int lane0 = rng.below(lanes);
        double frac = rng.uniform(a.speed_frac_min, a.speed_frac_max);

        double p = std::clamp(base + jit, 0.0, total - a.end_margin);
        int lane = -1;
        for (int t = 0; t < lanes; ++t) {
            int cand = (lane0 + t) % lanes;
            if (!lane_free(cand, p)) continue;
            if (cand == s.ego.lane) {
                // clean air around the ego so it enters traffic at speed
                double rel = p - s.ego.s;
                if (rel >= 0.0 ? rel < a.ego_clear_ahead
                               : -rel < a.ego_clear_behind)
                    continue;
            }
            lane = cand;
            break;
        }
        if (lane < 0) continue;
        double limit = road.query(std::min(p, total)).speed_limit;
        VehicleSpec veh;
        veh.s = p;
        veh.lane = lane;
        veh.v = frac * limit;
        veh.desired_speed = veh.v;
        out.push_back(veh);
        taken[static_cast<std::size_t>(lane)].push_back(p);
    }
    return out;
}

Scenario gen_simple_overtake() {
    Scenario s;
    s.name = "simple_overtake";
    s.seed = 42;
    s.road.lanes = 3;
    s.road.segments.push_back({2500.0, 31.1, 0.0, 0.0});
    s.ego.s = 0.0;
    s.ego.lane = 1;
    s.ego.v = 31.1;
    VehicleSpec lead;
    lead.s = 450.0;
    lead.lane = 1;
    lead.v = 19.4;
    lead.desired_speed = 19.4;
    s.vehicles.push_back(lead);
    return s;
}

Scenario gen_highway(double length_km, Density density, std::uint64_t seed,
                     Profile profile) {
    if (!(length_km > 0.0) || !std::isfinite(length_km))
        throw ScenarioError({"length_km: must be > 0"});
    Scenario s;
    char name[128];
    std::snprintf(name, sizeof name, "highway-%gkm-%s-%s-seed%llu", length_km,
                  to_string(density), to_string(profile),
                  static_cast<unsigned long long>(seed));
    s.name = name;
    s.seed = seed;
    s.road.lanes = 3;

    static constexpr double kTiers[3] = {26.94, 29.17, 31.11};
    SplitMix64 rng(seed ^ 0x524f414447454eull); // distinct stream per purpose
    const double total = length_km * 1000.0;
    int tier = rng.below(3);
    double built = 0.0;
    bool first = true;
    while (built < total) {
        double len = rng.uniform(800.0, 1600.0);
        if (total - (built + len) < 300.0) len = total - built;
        SegmentSpec seg;
        seg.length = len;
        seg.speed_limit = kTiers[tier];
        if (!first && profile == Profile::Rolling) {
            seg.grade = rng.uniform(-0.04, 0.04);
            if (rng.uniform() < 0.4) {
                double mag = rng.uniform(5e-4, 6e-3);
                seg.curvature = rng.uniform() < 0.5 ? mag : -mag;
            }
        }
        s.road.segments.push_back(seg);
        built += len;
        first = false;
        if (rng.uniform() < 0.25)
            tier = std::clamp(tier + (rng.uniform() < 0.5 ? -1 : 1), 0, 2);
    }

    s.ego.s = 0.0;
    s.ego.lane = 0;
    s.ego.v = s.road.segments.front().speed_limit;
    AmbientSpec amb;
    amb.density = density;
    s.ambient = amb;
    return s;
}

}  // namespace mcsim
