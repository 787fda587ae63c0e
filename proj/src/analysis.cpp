#include "chp/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "chp/dispatch.hpp"
#include "chp/strategic.hpp"

namespace chp {

namespace {

using nlohmann::json;

double require_number(const json& doc, const std::string& field) {
    if (!doc.contains(field) || !doc[field].is_number()) {
        throw SchemaError("field '" + field + "' must be a number");
    }
    return doc[field].get<double>();
}

double require_non_negative(const json& doc, const std::string& field) {
    const double value = require_number(doc, field);
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw SchemaError("field '" + field + "' must be non-negative and finite");
    }
    return value;
}

long long binomial_bounded(int n, int k, long long bound) {
    if (k < 0 || k > n) {
        return 0;
    }
    long long result = 1;
    for (int j = 1; j <= k; ++j) {
        result = result * (n - k + j) / j;
        if (result > bound) {
            return bound + 1;
        }
    }
    return result;
}

bool next_combination(std::vector<int>& comb, int pool_size) {
    const int k = static_cast<int>(comb.size());
    for (int i = k - 1; i >= 0; --i) {
        if (comb[i] < pool_size - (k - i)) {
            ++comb[i];
            for (int j = i + 1; j < k; ++j) {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

void append_fixed(std::string& out, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    out += (std::strcmp(buf, "-0.000000") == 0) ? "0.000000" : buf;
}

}  // namespace

Scenario load_scenario(std::istream& source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw SchemaError("scenario document must be a JSON object");
    }

    Scenario scenario;
    if (!doc.contains("label") || !doc["label"].is_string()) {
        throw SchemaError("field 'label' must be a string");
    }
    scenario.label = doc["label"].get<std::string>();

    const double capacity = require_number(doc, "capacity_mw");
    if (!(capacity > 0.0) || !std::isfinite(capacity)) {
        throw SchemaError("field 'capacity_mw' must be positive and finite");
    }

    if (!doc.contains("generators") || !doc["generators"].is_array() ||
        doc["generators"].empty()) {
        throw SchemaError("field 'generators' must be a non-empty array");
    }
    std::vector<GeneratorCost> costs;
    std::vector<std::string> names;
    int index = 0;
    for (const auto& entry : doc["generators"]) {
        const std::string where = "generators[" + std::to_string(index) + "]";
        if (!entry.is_object()) {
            throw SchemaError("field '" + where + "' must be an object");
        }
        auto own_field = [&](const char* leaf) {
            if (!entry.contains(leaf) || !entry[leaf].is_number()) {
                throw SchemaError("field '" + where + "." + leaf + "' must be a number");
            }
            const double value = entry[leaf].get<double>();
            if (!(value >= 0.0) || !std::isfinite(value)) {
                throw SchemaError("field '" + where + "." + leaf +
                                  "' must be non-negative and finite");
            }
            return value;
        };
        const GeneratorCost cost(own_field("startup_cost"), own_field("variable_cost"));
        if (entry.contains("capacity_mw")) {
            const double own = require_number(entry, "capacity_mw");
            if (!nearly_equal(own, capacity)) {
                throw ConfigError("equal-capacity model: '" + where +
                                  ".capacity_mw' differs from the shared capacity");
            }
        }
        std::string name = "gen" + std::to_string(index + 1);
        if (entry.contains("name")) {
            if (!entry["name"].is_string()) {
                throw SchemaError("field '" + where + ".name' must be a string");
            }
            name = entry["name"].get<std::string>();
        }
        costs.push_back(cost);
        names.push_back(std::move(name));
        ++index;
    }
    scenario.market = Market(capacity, std::move(costs), std::move(names));

    scenario.load_min = require_non_negative(doc, "load_min_mw");
    scenario.load_max = require_non_negative(doc, "load_max_mw");
    scenario.load_step = require_number(doc, "load_step_mw");
    if (scenario.load_min > scenario.load_max) {
        throw SchemaError("field 'load_min_mw' must not exceed 'load_max_mw'");
    }
    if (!(scenario.load_step > 0.0) || !std::isfinite(scenario.load_step)) {
        throw SchemaError("field 'load_step_mw' must be positive");
    }
    if (!doc.contains("max_coalition") || !doc["max_coalition"].is_number_integer()) {
        throw SchemaError("field 'max_coalition' must be an integer");
    }
    scenario.max_coalition = doc["max_coalition"].get<int>();
    if (scenario.max_coalition < 0 || scenario.max_coalition > scenario.market.size()) {
        throw SchemaError("field 'max_coalition' must lie in [0, generator count]");
    }

    const Mw remaining = scenario.market.capacity *
                         static_cast<double>(scenario.market.size() - scenario.max_coalition);
    if (!leq_within_tol(scenario.load_max, remaining)) {
        throw ConfigError(
            "infeasible configuration: without max_coalition generators the fleet cannot "
            "serve load_max_mw");
    }
    return scenario;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open scenario file: " + path);
    }
    return load_scenario(in);
}

SweepRow coalition_stats(const Market& market, Mw demand, int size) {
    detail::validate_market(market);
    if (size < 1) {
        throw DomainError("coalition size must be at least 1");
    }
    const int n = market.size();
    constexpr long long kEnumerationBound = 10'000'000;
    if (binomial_bounded(n, size, kEnumerationBound) > kEnumerationBound) {
        throw InstanceTooLargeError("coalition enumeration above the 1e7 bound");
    }

    SweepRow row;
    row.load = demand;
    row.coalition_size = size;
    // Feasibility only depends on the coalition size: either every subset of
    // this size is feasible at the load or none is.
    const Mw remaining = market.capacity * static_cast<double>(n - size);
    if (size > n || !leq_within_tol(demand, remaining)) {
        return row;
    }

    const auto ranked = merit_order(market);
    const auto& costs = market.generators;
    std::vector<int> scratch;
    scratch.reserve(n);
    const Money base = detail::restricted_cost(market, costs, ranked, 0ULL, demand, scratch);
    std::vector<Money> benchmark(n);
    for (int k = 0; k < n; ++k) {
        benchmark[k] = truthful_profit(market, demand, k);
    }

    Money sum_power = 0.0;
    Money sum_power_holders = 0.0;
    std::vector<int> comb(size);
    std::iota(comb.begin(), comb.end(), 0);
    do {
        unsigned long long mask = 0;
        Money benchmark_sum = 0.0;
        for (int k : comb) {
            mask |= 1ULL << k;
            benchmark_sum += benchmark[k];
        }
        const Money power =
            detail::restricted_cost(market, costs, ranked, mask, demand, scratch) - base -
            benchmark_sum;
        ++row.n_coalitions;
        sum_power += power;
        row.max_power = std::max(row.max_power, power);
        if (power > tol_scale(power, 0.0)) {
            ++row.n_with_power;
            sum_power_holders += power;
        }
    } while (next_combination(comb, n));

    if (row.n_coalitions > 0) {
        row.pct_with_power =
            static_cast<double>(row.n_with_power) / static_cast<double>(row.n_coalitions);
        row.mean_power = sum_power / static_cast<double>(row.n_coalitions);
    }
    if (row.n_with_power > 0) {
        row.mean_power_powerholders =
            sum_power_holders / static_cast<double>(row.n_with_power);
    }
    return row;
}

SweepResult sweep(const Scenario& scenario, int workers) {
    std::vector<Mw> loads;
    for (long long k = 0;; ++k) {
        const Mw load = scenario.load_min + static_cast<double>(k) * scenario.load_step;
        if (load > scenario.load_max && !nearly_equal(load, scenario.load_max)) {
            break;
        }
        loads.push_back(load);
    }
    const int n_sizes = scenario.max_coalition;

    SweepResult result;
    result.rows.resize(loads.size() * static_cast<std::size_t>(n_sizes));
    if (result.rows.empty()) {
        return result;
    }

    // Cells are preassigned slots, so the row order never depends on the
    // worker count or scheduling.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run_cells = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= result.rows.size()) {
                return;
            }
            try {
                const std::size_t load_idx = idx / static_cast<std::size_t>(n_sizes);
                const int size = static_cast<int>(idx % static_cast<std::size_t>(n_sizes)) + 1;
                result.rows[idx] = coalition_stats(scenario.market, loads[load_idx], size);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(result.rows.size());
                return;
            }
        }
    };

    if (workers <= 1) {
        run_cells();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(run_cells);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    result.per_size.resize(n_sizes);
    for (int s = 1; s <= n_sizes; ++s) {
        auto& agg = result.per_size[s - 1];
        agg.coalition_size = s;
        Money sum_power = 0.0;
        Money sum_power_holders = 0.0;
        for (std::size_t load_idx = 0; load_idx < loads.size(); ++load_idx) {
            const auto& row = result.rows[load_idx * n_sizes + (s - 1)];
            agg.n_coalitions += row.n_coalitions;
            agg.n_with_power += row.n_with_power;
            sum_power += row.mean_power * static_cast<double>(row.n_coalitions);
            sum_power_holders +=
                row.mean_power_powerholders * static_cast<double>(row.n_with_power);
            agg.max_power = std::max(agg.max_power, row.max_power);
        }
        if (agg.n_coalitions > 0) {
            agg.pct_with_power =
                static_cast<double>(agg.n_with_power) / static_cast<double>(agg.n_coalitions);
            agg.mean_power = sum_power / static_cast<double>(agg.n_coalitions);
        }
        if (agg.n_with_power > 0) {
            agg.mean_power_powerholders =
                sum_power_holders / static_cast<double>(agg.n_with_power);
        }
    }
    return result;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "load_mw,coalition_size,n_coalitions,n_with_power,pct_with_power,mean_power,"
        "mean_power_powerholders,max_power\n";
    for (const auto& row : rows) {
        append_fixed(out, row.load);
        out += ',';
        out += std::to_string(row.coalition_size);
        out += ',';
        out += std::to_string(row.n_coalitions);
        out += ',';
        out += std::to_string(row.n_with_power);
        out += ',';
        append_fixed(out, row.pct_with_power);
        out += ',';
        append_fixed(out, row.mean_power);
        out += ',';
        append_fixed(out, row.mean_power_powerholders);
        out += ',';
        append_fixed(out, row.max_power);
        out += '\n';
    }
    return out;
}

void write_csv(const std::vector<SweepRow>& rows, std::ostream& out) { out << to_csv(rows); }

LinearFit fit_mean_power(const std::vector<SizeAggregate>& per_size) {
    LinearFit fit;
    const std::size_t n = per_size.size();
    if (n == 0) {
        return fit;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& agg : per_size) {
        const double x = agg.coalition_size;
        sx += x;
        sy += agg.mean_power;
        sxx += x * x;
        sxy += x * agg.mean_power;
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (denom == 0.0) {
        fit.intercept = sy / static_cast<double>(n);
        fit.r_squared = 1.0;
        return fit;
    }
    fit.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / static_cast<double>(n);

    const double mean_y = sy / static_cast<double>(n);
    double ss_tot = 0.0, ss_res = 0.0;
    for (const auto& agg : per_size) {
        const double predicted = fit.intercept + fit.slope * agg.coalition_size;
        ss_tot += (agg.mean_power - mean_y) * (agg.mean_power - mean_y);
        ss_res += (agg.mean_power - predicted) * (agg.mean_power - predicted);
    }
    fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

}  // namespace chp
