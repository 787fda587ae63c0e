#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chp/analysis.hpp"
#include "chp/dispatch.hpp"
#include "chp/model.hpp"
#include "chp/pricing.hpp"
#include "chp/strategic.hpp"

namespace {

using namespace chp;

std::string fmt6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

std::string pad(const std::string& text, std::size_t width) {
    return text.size() >= width ? text : text + std::string(width - text.size(), ' ');
}

struct LoadSpec {
    bool is_range = false;
    double single = 0.0;
    double lo = 0.0, hi = 0.0, step = 0.0;
};

LoadSpec parse_load(const std::string& text) {
    LoadSpec spec;
    const auto c1 = text.find(':');
    try {
        if (c1 == std::string::npos) {
            spec.single = std::stod(text);
            return spec;
        }
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos) {
            throw CLI::ValidationError("--load", "range must be min:max:step");
        }
        spec.is_range = true;
        spec.lo = std::stod(text.substr(0, c1));
        spec.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        spec.step = std::stod(text.substr(c2 + 1));
    } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("--load", "not a number: " + text);
    } catch (const std::out_of_range&) {
        throw CLI::ValidationError("--load", "out of range: " + text);
    }
    if (spec.lo > spec.hi || !(spec.step > 0.0)) {
        throw CLI::ValidationError("--load", "range must satisfy min <= max and step > 0");
    }
    return spec;
}

std::vector<int> parse_exclude(const std::string& csv, int n) {
    std::vector<int> excluded;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        auto comma = csv.find(',', pos);
        if (comma == std::string::npos) {
            comma = csv.size();
        }
        const std::string token = csv.substr(pos, comma - pos);
        int idx = 0;
        try {
            idx = std::stoi(token);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--exclude", "not a generator number: " + token);
        }
        if (idx < 1 || idx > n) {
            throw CLI::ValidationError("--exclude",
                                       "generator number out of range: " + token);
        }
        excluded.push_back(idx - 1);
        pos = comma + 1;
    }
    return excluded;
}

const std::string& gen_name(const Market& market, int k) {
    static const std::string anonymous = "-";
    return market.names.empty() ? anonymous : market.names[k];
}

double single_load_or_fail(const LoadSpec& spec) {
    if (spec.is_range) {
        throw CLI::ValidationError("--load", "this command needs a single load, not a range");
    }
    return spec.single;
}

void print_dispatch(const Scenario& scenario, const DispatchResult& dispatch) {
    const auto& market = scenario.market;
    std::cout << "scenario: " << scenario.label << "\n";
    std::cout << "m: " << dispatch.split.marginal_index
              << "  x: " << fmt6(dispatch.split.partial_output) << " MW\n";
    std::cout << pad("#", 4) << pad("name", 10) << pad("f(G)", 14) << pad("output_mw", 14)
              << "cost\n";
    for (int k = 0; k < market.size(); ++k) {
        std::cout << pad(std::to_string(k + 1), 4) << pad(gen_name(market, k), 10)
                  << pad(fmt6(market.generators[k].full_cost(market.capacity)), 14)
                  << pad(fmt6(dispatch.outputs[k]), 14)
                  << fmt6(market.generators[k].evaluate(dispatch.outputs[k])) << "\n";
    }
    std::cout << "total cost: " << fmt6(dispatch.total_cost) << "\n";
    if (dispatch.x_holder) {
        std::cout << "partial-block generator: " << (*dispatch.x_holder + 1) << " ("
                  << gen_name(market, *dispatch.x_holder) << ")\n";
    }
    if (!dispatch.excluded.empty()) {
        std::cout << "excluded:";
        for (int k : dispatch.excluded) {
            std::cout << " " << (k + 1);
        }
        std::cout << "\n";
    }
}

int run_dispatch(const Scenario& scenario, double load, const std::vector<int>& excluded) {
    print_dispatch(scenario, economic_dispatch(scenario.market, load, excluded));
    return 0;
}

int run_price(const Scenario& scenario, double load) {
    const auto& market = scenario.market;
    const auto chp_price = convex_hull_price(market, load);
    const auto result = uplift(market, load, chp_price.price);
    std::cout << "scenario: " << scenario.label << "\n";
    std::cout << "convex hull price: " << fmt6(chp_price.price) << " $/MWh";
    if (chp_price.degenerate_demand) {
        std::cout << " (degenerate: zero demand)";
    }
    std::cout << "\n";
    std::cout << pad("#", 4) << pad("name", 10) << pad("desired_mw", 13)
              << pad("max_profit", 13) << pad("dispatch_mw", 13) << "uplift\n";
    for (int k = 0; k < market.size(); ++k) {
        std::cout << pad(std::to_string(k + 1), 4) << pad(gen_name(market, k), 10)
                  << pad(fmt6(result.desired_outputs[k]), 13)
                  << pad(fmt6(result.max_profits[k]), 13)
                  << pad(fmt6(result.dispatch.outputs[k]), 13) << fmt6(result.uplifts[k])
                  << "\n";
    }
    std::cout << "total uplift: " << fmt6(result.total_uplift) << "\n";
    return 0;
}

int run_power(const Scenario& scenario, double load, bool oracle, double grid_step) {
    const auto& market = scenario.market;
    const auto report = analyze_market_power(market, load, oracle, grid_step);
    std::cout << "scenario: " << scenario.label << "\n";
    std::cout << "demand: " << fmt6(load) << " MW\n";
    std::cout << pad("#", 4) << pad("name", 10) << pad("P_i", 13) << pad("M(i)", 13);
    if (oracle) {
        std::cout << pad("oracle_gain", 13) << pad("arg_v", 11) << pad("attained", 10)
                  << "closed=oracle";
    }
    std::cout << "\n";
    int equal = 0;
    for (int k = 0; k < market.size(); ++k) {
        std::cout << pad(std::to_string(k + 1), 4) << pad(gen_name(market, k), 10)
                  << pad(fmt6(report.benchmark_profits[k]), 13)
                  << pad(fmt6(report.closed_form_power[k]), 13);
        if (oracle) {
            const auto& entry = (*report.oracle)[k];
            equal += report.equality_flags[k] ? 1 : 0;
            std::cout << pad(fmt6(entry.additional_gain), 13) << pad(fmt6(entry.arg_v), 11)
                      << pad(entry.attained ? "yes" : "no", 10)
                      << (report.equality_flags[k] ? "yes" : "no");
        }
        std::cout << "\n";
    }
    if (oracle) {
        std::cout << "closed-form-equality-rate: "
                  << fmt6(static_cast<double>(equal) / market.size()) << " (" << equal << "/"
                  << market.size() << ")\n";
    }
    return 0;
}

int run_coalitions(const Scenario& scenario, double load, int max_size,
                   const std::string& out_path) {
    std::vector<SweepRow> rows;
    rows.reserve(max_size);
    for (int size = 1; size <= max_size; ++size) {
        rows.push_back(coalition_stats(scenario.market, load, size));
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            throw SchemaError("cannot open output file: " + out_path);
        }
        write_csv(rows, out);
    }
    std::cout << "scenario: " << scenario.label << "  load: " << fmt6(load) << " MW\n";
    std::cout << pad("size", 6) << pad("coalitions", 12) << pad("with_power", 12)
              << pad("pct", 10) << pad("mean", 13) << pad("mean_holders", 14) << "max\n";
    for (const auto& row : rows) {
        std::cout << pad(std::to_string(row.coalition_size), 6)
                  << pad(std::to_string(row.n_coalitions), 12)
                  << pad(std::to_string(row.n_with_power), 12)
                  << pad(fmt6(row.pct_with_power), 10) << pad(fmt6(row.mean_power), 13)
                  << pad(fmt6(row.mean_power_powerholders), 14) << fmt6(row.max_power)
                  << "\n";
    }
    if (!out_path.empty()) {
        std::cout << "csv written to: " << out_path << " (" << rows.size() << " rows)\n";
    }
    return 0;
}

int run_sweep(Scenario scenario, const LoadSpec* load_override, int max_size_override,
              const std::string& out_path) {
    if (load_override) {
        if (load_override->is_range) {
            scenario.load_min = load_override->lo;
            scenario.load_max = load_override->hi;
            scenario.load_step = load_override->step;
        } else {
            scenario.load_min = scenario.load_max = load_override->single;
            scenario.load_step = 1.0;
        }
    }
    if (max_size_override > 0) {
        scenario.max_coalition = max_size_override;
    }
    const auto result = sweep(scenario);

    if (out_path.empty()) {
        write_csv(result.rows, std::cout);
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw SchemaError("cannot open output file: " + out_path);
    }
    write_csv(result.rows, out);

    std::cout << "scenario: " << scenario.label << "\n";
    std::cout << "grid: " << fmt6(scenario.load_min) << ".." << fmt6(scenario.load_max)
              << " step " << fmt6(scenario.load_step) << " MW, coalition sizes 1.."
              << scenario.max_coalition << "\n";
    std::cout << pad("size", 6) << pad("coalitions", 12) << pad("with_power", 12)
              << pad("pct", 10) << pad("mean", 13) << pad("mean_holders", 14) << "max\n";
    for (const auto& agg : result.per_size) {
        std::cout << pad(std::to_string(agg.coalition_size), 6)
                  << pad(std::to_string(agg.n_coalitions), 12)
                  << pad(std::to_string(agg.n_with_power), 12)
                  << pad(fmt6(agg.pct_with_power), 10) << pad(fmt6(agg.mean_power), 13)
                  << pad(fmt6(agg.mean_power_powerholders), 14) << fmt6(agg.max_power)
                  << "\n";
    }
    const auto fit = fit_mean_power(result.per_size);
    std::cout << "fit mean_power ~ size: slope=" << fmt6(fit.slope)
              << " intercept=" << fmt6(fit.intercept) << " r_squared=" << fmt6(fit.r_squared)
              << "\n";
    std::cout << "csv written to: " << out_path << " (" << result.rows.size() << " rows)\n";
    return 0;
}

// --- randomized property suites ------------------------------------------

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Market random_market(std::mt19937_64& rng, int n_min, int n_max, bool fixed_capacity) {
    const int n = std::uniform_int_distribution<int>(n_min, n_max)(rng);
    const double capacity = fixed_capacity ? 10.0 : uniform_in(rng, 1.0, 100.0);
    std::vector<GeneratorCost> gens;
    gens.reserve(n);
    for (int k = 0; k < n; ++k) {
        gens.emplace_back(uniform_in(rng, 0.0, 100.0), uniform_in(rng, 0.0, 10.0));
    }
    return Market(capacity, std::move(gens));
}

double random_demand(std::mt19937_64& rng, const Market& market, double lo_blocks,
                     double hi_blocks) {
    const double lo = lo_blocks * market.capacity;
    const double hi = hi_blocks * market.capacity;
    double y = uniform_in(rng, lo, hi);
    if (y <= lo) {
        y = std::nextafter(lo, hi);  // open lower end
    }
    return y;
}

struct SuiteOutcome {
    std::string name;
    long long trials = 0;
    long long failures = 0;
};

void print_suite(const SuiteOutcome& outcome) {
    std::cout << "suite " << outcome.name << ": trials=" << outcome.trials
              << " failures=" << outcome.failures
              << (outcome.failures == 0 ? " PASS" : " FAIL") << "\n";
}

int run_check(long long trials, unsigned long long seed, double grid_step,
              const Scenario* scenario) {
    std::vector<SuiteOutcome> outcomes;

    if (scenario) {
        SuiteOutcome suite{"scenario-supermodularity", 0, 0};
        for (double load = scenario->load_min; load <= scenario->load_max + 1e-9;
             load += scenario->load_step) {
            ++suite.trials;
            suite.failures +=
                static_cast<long long>(check_supermodularity(scenario->market, load).size());
        }
        outcomes.push_back(suite);
    }

    {
        SuiteOutcome suite{"dispatch-oracle-equivalence", trials, 0};
        std::mt19937_64 rng(seed);
        for (long long t = 0; t < trials; ++t) {
            const auto market = random_market(rng, 1, 6, false);
            const double y = random_demand(rng, market, 0.0, market.size());
            const auto fast = economic_dispatch(market, y);
            const auto brute = dispatch_oracle(market, y);
            if (!nearly_equal(fast.total_cost, brute.total_cost)) {
                ++suite.failures;
            }
        }
        outcomes.push_back(suite);
    }

    {
        SuiteOutcome suite{"uplift-minimality", trials, 0};
        std::mt19937_64 rng(seed + 1);
        for (long long t = 0; t < trials; ++t) {
            const auto market = random_market(rng, 1, 6, false);
            const double y = random_demand(rng, market, 0.0, market.size());
            if (!verify_uplift_minimality(market, y, 100).holds) {
                ++suite.failures;
            }
        }
        outcomes.push_back(suite);
    }

    {
        SuiteOutcome suite{"marginal-block-cost-bounds", trials, 0};
        std::mt19937_64 rng(seed + 2);
        for (long long t = 0; t < trials; ++t) {
            const auto market = random_market(rng, 2, 6, false);
            const double y = random_demand(rng, market, 1.0, market.size());
            const int m = marginal_split(y, market.capacity, market.size()).marginal_index;
            std::vector<double> full;
            for (const auto& g : market.generators) {
                full.push_back(g.full_cost(market.capacity));
            }
            std::sort(full.begin(), full.end());
            const double diff = economic_dispatch(market, y).total_cost -
                                economic_dispatch(market, y - market.capacity).total_cost;
            if (!leq_within_tol(full[m - 2], diff) || !leq_within_tol(diff, full[m - 1])) {
                ++suite.failures;
            }
        }
        outcomes.push_back(suite);
    }

    long long beyond_pair_violations = 0;
    long long beyond_pair_trials = 0;
    {
        SuiteOutcome suite{"coalition-supermodularity", trials, 0};
        std::mt19937_64 rng(seed + 3);
        for (long long t = 0; t < trials; ++t) {
            const auto market = random_market(rng, 2, 8, false);
            const double y = random_demand(rng, market, 0.0, market.size());
            const int n = market.size();
            if (!check_supermodularity(market, y).empty()) {
                ++suite.failures;
            }
            if (leq_within_tol(y, market.capacity * (n - 2))) {
                const double base = economic_dispatch(market, y).total_cost;
                for (int i = 0; i < n && suite.failures == 0; ++i) {
                    for (int j = 0; j < n; ++j) {
                        if (i == j) {
                            continue;
                        }
                        const double cij =
                            economic_dispatch(market, y, std::vector<int>{i, j}).total_cost;
                        const double cj =
                            economic_dispatch(market, y, std::vector<int>{j}).total_cost;
                        const double ci =
                            economic_dispatch(market, y, std::vector<int>{i}).total_cost;
                        if (!leq_within_tol(ci - base, cij - cj)) {
                            ++suite.failures;
                            break;
                        }
                    }
                }
            }
            // diagnostic only: supermodularity across disjoint sets beyond pairs
            if (n >= 4 && leq_within_tol(y, market.capacity * (n - 4))) {
                ++beyond_pair_trials;
                const auto a = coalition_power(market, y, {0, 1});
                const auto b = coalition_power(market, y, {2, 3});
                const auto ab = coalition_power(market, y, {0, 1, 2, 3});
                if (a.feasible && b.feasible && ab.feasible &&
                    !leq_within_tol(a.power + b.power, ab.power)) {
                    ++beyond_pair_violations;
                }
            }
        }
        outcomes.push_back(suite);
    }

    long long equality_hits = 0;
    long long equality_total = 0;
    {
        const long long oracle_trials = std::max<long long>(10, trials / 10);
        SuiteOutcome under{"under-reporting", oracle_trials, 0};
        SuiteOutcome bounds{"oracle-bounds", oracle_trials, 0};
        std::mt19937_64 rng(seed + 4);
        for (long long t = 0; t < oracle_trials; ++t) {
            const auto market = random_market(rng, 2, 6, true);
            const double y = random_demand(rng, market, 0.0, market.size() - 1);
            for (int i = 0; i < market.size(); ++i) {
                const auto best = best_response_oracle(market, y, i, grid_step);
                const double benchmark = truthful_profit(market, y, i);
                const double add = best.sup_gain - benchmark;
                const double index = market_power_index(market, y, i);
                if (best.arg_v < market.generators[i].variable_cost - grid_step -
                                     tol_scale(best.arg_v, grid_step)) {
                    ++under.failures;
                }
                if (add < -tol_scale(add, 0.0) ||
                    !leq_within_tol(add, index + market.capacity * grid_step)) {
                    ++bounds.failures;
                }
                ++equality_total;
                if (std::fabs(add - index) <=
                    market.capacity * grid_step + tol_scale(add, index)) {
                    ++equality_hits;
                }
            }
        }
        outcomes.push_back(under);
        outcomes.push_back(bounds);
    }

    bool all_pass = true;
    for (const auto& outcome : outcomes) {
        print_suite(outcome);
        all_pass = all_pass && outcome.failures == 0;
    }
    std::cout << "closed-form-equality-rate: "
              << fmt6(equality_total > 0
                          ? static_cast<double>(equality_hits) / equality_total
                          : 0.0)
              << " (" << equality_hits << "/" << equality_total << ")\n";
    std::cout << "diagnostic beyond-pair-supermodularity: violations="
              << beyond_pair_violations << "/" << beyond_pair_trials << "\n";
    std::cout << (all_pass ? "all checks passed" : "CHECK FAILED") << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convex hull pricing and market power analysis"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string load_text;
    std::string exclude_text;
    std::string out_path;
    int max_size = 0;
    bool with_oracle = false;
    double grid_step = 1e-3;
    long long trials = 200;
    unsigned long long seed = 42;

    auto add_scenario = [&](CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--scenario", scenario_path, "scenario JSON file")
                        ->check(CLI::ExistingFile);
        if (required) {
            opt->required();
        }
    };

    auto* cmd_dispatch = app.add_subcommand("dispatch", "cost-minimal dispatch at one load");
    add_scenario(cmd_dispatch, true);
    cmd_dispatch->add_option("--load", load_text, "load in MW")->required();
    cmd_dispatch->add_option("--exclude", exclude_text, "comma-separated generator numbers");

    auto* cmd_price = app.add_subcommand("price", "convex hull price and uplifts at one load");
    add_scenario(cmd_price, true);
    cmd_price->add_option("--load", load_text, "load in MW")->required();

    auto* cmd_power = app.add_subcommand("power", "per-generator market power at one load");
    add_scenario(cmd_power, true);
    cmd_power->add_option("--load", load_text, "load in MW")->required();
    cmd_power->add_flag("--oracle", with_oracle, "run the brute-force best-response search");
    cmd_power->add_option("--grid-step", grid_step, "search resolution in $/MWh");

    auto* cmd_coal = app.add_subcommand("coalitions", "coalition power stats at one load");
    add_scenario(cmd_coal, true);
    cmd_coal->add_option("--load", load_text, "load in MW")->required();
    cmd_coal->add_option("--max-size", max_size, "largest coalition size");
    cmd_coal->add_option("--out", out_path, "write rows as CSV");

    auto* cmd_sweep = app.add_subcommand("sweep", "load-by-size coalition sweep");
    add_scenario(cmd_sweep, true);
    cmd_sweep->add_option("--load", load_text, "override load grid (min:max:step or single)");
    cmd_sweep->add_option("--max-size", max_size, "override largest coalition size");
    cmd_sweep->add_option("--out", out_path, "write rows as CSV (aggregates go to stdout)");

    auto* cmd_check = app.add_subcommand("check", "randomized property suites");
    add_scenario(cmd_check, false);
    cmd_check->add_option("--trials", trials, "instances per suite")
        ->check(CLI::PositiveNumber);
    cmd_check->add_option("--seed", seed, "RNG seed");
    cmd_check->add_option("--grid-step", grid_step, "best-response search resolution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        std::cerr << "E_USAGE " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(cmd_check)) {
            std::optional<Scenario> scenario;
            if (!scenario_path.empty()) {
                scenario = load_scenario_file(scenario_path);
            }
            return run_check(trials, seed, grid_step, scenario ? &*scenario : nullptr);
        }
        const Scenario scenario = load_scenario_file(scenario_path);
        const int n = scenario.market.size();
        if (app.got_subcommand(cmd_dispatch)) {
            const auto load = parse_load(load_text);
            return run_dispatch(scenario, single_load_or_fail(load),
                                parse_exclude(exclude_text, n));
        }
        if (app.got_subcommand(cmd_price)) {
            return run_price(scenario, single_load_or_fail(parse_load(load_text)));
        }
        if (app.got_subcommand(cmd_power)) {
            return run_power(scenario, single_load_or_fail(parse_load(load_text)),
                             with_oracle, grid_step);
        }
        if (app.got_subcommand(cmd_coal)) {
            const int size = max_size > 0 ? max_size : scenario.max_coalition;
            return run_coalitions(scenario, single_load_or_fail(parse_load(load_text)), size,
                                  out_path);
        }
        if (app.got_subcommand(cmd_sweep)) {
            LoadSpec load;
            const bool has_load = !load_text.empty();
            if (has_load) {
                load = parse_load(load_text);
            }
            return run_sweep(scenario, has_load ? &load : nullptr, max_size, out_path);
        }
        std::cerr << "E_USAGE no command selected\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "E_USAGE " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "E_INFEASIBLE " << e.what() << "\n";
        return 1;
    } catch (const SchemaError& e) {
        std::cerr << "E_SCHEMA " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "E_SCHEMA " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "E_INFEASIBLE " << e.what() << "\n";
        return 1;
    }
}
