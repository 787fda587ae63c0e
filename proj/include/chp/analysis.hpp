#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chp/model.hpp"

namespace chp {

/// Experiment configuration: a market plus the load grid and the largest
/// coalition size to enumerate.
struct Scenario {
    Market market;
    Mw load_min = 0.0;
    Mw load_max = 0.0;
    Mw load_step = 0.0;
    int max_coalition = 0;
    std::string label;
};

/// Aggregate over every coalition of one size at one load.
struct SweepRow {
    Mw load = 0.0;
    int coalition_size = 0;
    long long n_coalitions = 0;   // feasible coalitions of this size
    long long n_with_power = 0;   // power strictly above tolerance
    double pct_with_power = 0.0;
    Money mean_power = 0.0;              // over all feasible coalitions
    Money mean_power_powerholders = 0.0;  // over coalitions with power only
    Money max_power = 0.0;
};

/// Same aggregates pooled over every load of the sweep, one entry per size.
struct SizeAggregate {
    int coalition_size = 0;
    long long n_coalitions = 0;
    long long n_with_power = 0;
    double pct_with_power = 0.0;
    Money mean_power = 0.0;
    Money mean_power_powerholders = 0.0;
    Money max_power = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;           // load-major, then size
    std::vector<SizeAggregate> per_size;  // pooled over loads
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Parses and validates a scenario JSON document.
Scenario load_scenario(std::istream& source);
Scenario load_scenario_file(const std::string& path);

/// Enumerates every coalition of the given size at one load and summarizes
/// their closed-form power. All-or-nothing feasibility: a size is infeasible
/// at a load exactly when the rest of the fleet cannot serve it.
SweepRow coalition_stats(const Market& market, Mw demand, int size);

/// Full load-by-size grid. Cells are independent; `workers` > 1 fans them out
/// across threads with results written into preassigned slots, so the output
/// is identical for any worker count.
SweepResult sweep(const Scenario& scenario, int workers = 1);

/// CSV for the per-cell rows; fixed header, floats at 6 decimal places.
std::string to_csv(const std::vector<SweepRow>& rows);
void write_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// Least-squares fit of per-size mean power against coalition size.
LinearFit fit_mean_power(const std::vector<SizeAggregate>& per_size);

}  // namespace chp
