#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mcsim/sim.hpp"

namespace mcsim {

// Per-step ego CSV: time,s,lane,v,a,yaw,fuel_rate,C_LF,C_CF,C_RF,C_Thr,decision.
// Cost and decision cells are empty on steps without a policy evaluation.
void write_trace_csv(const SimTrace& t, std::ostream& os);

// Run summary as a stable-key JSON object.
std::string summary_json(const Summary& s);

// Paired-run report: both summaries plus relative_fuel (cruise / baseline).
struct CompareReport {
    std::string scenario_name;
    std::uint64_t seed = 0;
    Summary multicruise;
    Summary lane_following;
    double relative_fuel = 0.0;
    bool ok = false; // both runs completed
};

CompareReport make_compare_report(const std::string& scenario_name,
                                  std::uint64_t seed, const Summary& mc,
                                  const Summary& lf);
std::string compare_report_json(const CompareReport& r);

// Time-aligned fuel-rate CSV of a paired run (columns padded where one run
// has already finished).
void write_fuel_rate_csv(const SimTrace& mc, const SimTrace& lf,
                         std::ostream& os);

struct BatchAggregate {
    double mean_relative_fuel = 0.0;
    double min_relative_fuel = 0.0;
    double max_relative_fuel = 0.0;
    int completed_pairs = 0;
    int total_pairs = 0;
    double frac_at_most_one = 0.0; // share of completed pairs with rel <= 1
};

BatchAggregate aggregate_batch(const std::vector<CompareReport>& rows);
std::string batch_report_json(const std::vector<CompareReport>& rows,
                              const BatchAggregate& agg,
                              const std::string& description);

} // namespace mcsim
