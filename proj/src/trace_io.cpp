#include "mcsim/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

namespace mcsim {

namespace {

using ordered_json = nlohmann::ordered_json;

void csv_num(std::ostream& os, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    os << buf;
}

void trace_row(std::ostream& os, const StepRecord& r) {
    csv_num(os, r.time);
    os << ',';
    csv_num(os, r.s);
    os << ',' << r.lane << ',';
    csv_num(os, r.v);
    os << ',';
    csv_num(os, r.a);
    os << ',';
    csv_num(os, r.yaw);
    os << ',';
    csv_num(os, r.fuel_rate);
    if (r.evaluated) {
        os << ',';
        csv_num(os, r.c_left);
        os << ',';
        csv_num(os, r.c_current);
        os << ',';
        csv_num(os, r.c_right);
        os << ',';
        csv_num(os, r.c_thr);
        os << ',' << to_string(r.action) << '(' << to_string(r.reason) << ')';
    } else {
        os << ",,,,,";
    }
    os << '\n';
}

ordered_json summary_obj(const Summary& s) {
    ordered_json j;
    j["controller"] = s.controller;
    j["seed"] = s.seed;
    j["status"] = to_string(s.status);
    j["trip_time_s"] = s.trip_time_s;
    j["distance_m"] = s.distance_m;
    j["consumed_fuel_g"] = s.consumed_fuel_g;
    j["lane_changes"] = s.lane_changes;
    j["yaw_max_abs"] = s.yaw_max_abs;
    return j;
}

ordered_json compare_obj(const CompareReport& r) {
    ordered_json j;
    j["scenario"] = r.scenario_name;
    j["seed"] = r.seed;
    j["ok"] = r.ok;
    j["relative_fuel"] = r.relative_fuel;
    j["multicruise"] = summary_obj(r.multicruise);
    j["lane_following"] = summary_obj(r.lane_following);
    return j;
}

}  // namespace

void write_trace_csv(const SimTrace& t, std::ostream& os) {
    os << "time,s,lane,v,a,yaw,fuel_rate,C_LF,C_CF,C_RF,C_Thr,decision\n";
    trace_row(os, t.initial);
    for (const StepRecord& r : t.records) trace_row(os, r);
}

std::string summary_json(const Summary& s) { return summary_obj(s).dump(2); }

CompareReport make_compare_report(const std::string& scenario_name,
                                  std::uint64_t seed, const Summary& mc,
                                  const Summary& lf) {
    CompareReport r;
    r.scenario_name = scenario_name;
    r.seed = seed;
    r.multicruise = mc;
    r.lane_following = lf;
    r.ok = mc.status == RunStatus::Completed &&
           lf.status == RunStatus::Completed;
    r.relative_fuel = lf.consumed_fuel_g > 0.0
                          ? mc.consumed_fuel_g / lf.consumed_fuel_g
                          : 0.0;
    return r;
}

std::string compare_report_json(const CompareReport& r) {
    return compare_obj(r).dump(2);
}

void write_fuel_rate_csv(const SimTrace& mc, const SimTrace& lf,
                         std::ostream& os) {
    os << "time_multicruise,fuel_rate_multicruise,"
          "time_lane_following,fuel_rate_lane_following\n";
    auto row = [&](const SimTrace& t, std::size_t i) -> const StepRecord* {
        if (i == 0) return &t.initial;
        if (i - 1 < t.records.size()) return &t.records[i - 1];
        return nullptr;
    };
    std::size_t n = 1 + std::max(mc.records.size(), lf.records.size());
    for (std::size_t i = 0; i < n; ++i) {
        const StepRecord* a = row(mc, i);
        const StepRecord* b = row(lf, i);
        if (a) {
            csv_num(os, a->time);
            os << ',';
            csv_num(os, a->fuel_rate);
        } else {
            os << ',';
        }
        os << ',';
        if (b) {
            csv_num(os, b->time);
            os << ',';
            csv_num(os, b->fuel_rate);
        } else {
            os << ',';
        }
        os << '\n';
    }
}

BatchAggregate aggregate_batch(const std::vector<CompareReport>& rows) {
    BatchAggregate agg;
    agg.total_pairs = static_cast<int>(rows.size());
    double sum = 0.0;
    int at_most_one = 0;
    for (const CompareReport& r : rows) {
        if (!r.ok) continue;
        if (agg.completed_pairs == 0) {
            agg.min_relative_fuel = r.relative_fuel;
            agg.max_relative_fuel = r.relative_fuel;
        } else {
            agg.min_relative_fuel =
                std::min(agg.min_relative_fuel, r.relative_fuel);
            agg.max_relative_fuel =
                std::max(agg.max_relative_fuel, r.relative_fuel);
        }
        sum += r.relative_fuel;
        if (r.relative_fuel <= 1.0) ++at_most_one;
        ++agg.completed_pairs;
    }
    if (agg.completed_pairs > 0) {
        agg.mean_relative_fuel = sum / agg.completed_pairs;
        agg.frac_at_most_one =
            static_cast<double>(at_most_one) / agg.completed_pairs;
    }
    return agg;
}

std::string batch_report_json(const std::vector<CompareReport>& rows,
                              const BatchAggregate& agg,
                              const std::string& description) {
    ordered_json j;
    j["description"] = description;
    j["total_pairs"] = agg.total_pairs;
    j["completed_pairs"] = agg.completed_pairs;
    j["mean_relative_fuel"] = agg.mean_relative_fuel;
    j["min_relative_fuel"] = agg.min_relative_fuel;
    j["max_relative_fuel"] = agg.max_relative_fuel;
    j["frac_at_most_one"] = agg.frac_at_most_one;
    ordered_json arr = ordered_json::array();
    for (const CompareReport& r : rows) arr.push_back(compare_obj(r));
    j["runs"] = arr;
    return j.dump(2);
}

}  // namespace mcsim
