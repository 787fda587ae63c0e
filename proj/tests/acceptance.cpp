// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chp/analysis.hpp"
#include "chp/dispatch.hpp"
#include "chp/model.hpp"
#include "chp/pricing.hpp"
#include "chp/strategic.hpp"
#include "support.hpp"

using namespace chp;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
              << "\n";
    if (!pass) {
        ++g_failures;
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool close(double a, double b, double tol = 1e-9) { return std::fabs(a - b) <= tol; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

int run_cli(const std::string& chp_bin, const std::string& args, const fs::path& stdout_path) {
    const std::string cmd =
        "\"" + chp_bin + "\" " + args + " > \"" + stdout_path.string() + "\" 2>&1";
    return std::system(cmd.c_str());
}

// --- criterion 1 ----------------------------------------------------------

void criterion_worked_fixture() {
    const auto start = std::chrono::steady_clock::now();
    const auto market = test::worked_market();
    const double y = 15.0;
    bool ok = true;
    std::string why;

    const auto dispatch = economic_dispatch(market, y);
    const auto brute = dispatch_oracle(market, y);
    const std::vector<double> want_outputs{10, 5, 0, 0};
    for (int k = 0; k < 4; ++k) {
        ok = ok && close(dispatch.outputs[k], want_outputs[k]) &&
             close(brute.outputs[k], want_outputs[k]);
    }
    ok = ok && close(dispatch.total_cost, 40.0) && close(brute.total_cost, 40.0);
    if (!ok) {
        why = "dispatch mismatch";
    }

    const double p_star = convex_hull_price(market, y).price;
    const double p_scan = test::price_scan_inf(market, y);
    if (!(close(p_star, 3.0) && close(p_scan, 3.0))) {
        ok = false;
        why = "price mismatch";
    }

    const auto settlement = uplift(market, y, p_star);
    const std::vector<double> want_uplift{0, 5, 0, 0};
    for (int k = 0; k < 4; ++k) {
        // independent uplift: grid-argmax best profit minus profit at the
        // oracle dispatch
        const double pi_star = test::grid_argmax(market.generators[k], p_star, 10.0).profit;
        const double by_hand =
            pi_star - (p_star * brute.outputs[k] - market.generators[k].evaluate(brute.outputs[k]));
        if (!(close(settlement.uplifts[k], want_uplift[k]) &&
              std::fabs(by_hand - want_uplift[k]) <= 1e-6)) {
            ok = false;
            why = "uplift mismatch";
        }
    }

    const std::vector<double> want_p{10, 0, 0, 0};
    const std::vector<double> want_m{5, 5, 0, 0};
    const double base_oracle = brute.total_cost;
    for (int k = 0; k < 4; ++k) {
        const double p_k = truthful_profit(market, y, k);
        const double via_pricing = max_profit(market.generators[k], p_star, 10.0);
        const double m_k = market_power_index(market, y, k);
        const double m_oracle =
            dispatch_oracle(market, y, {k}).total_cost - base_oracle - p_k;
        if (!(close(p_k, want_p[k]) && close(via_pricing, want_p[k]) &&
              close(m_k, want_m[k]) && close(m_oracle, want_m[k]))) {
            ok = false;
            why = "power index mismatch";
        }
    }

    const double m12 = coalition_power(market, y, {0, 1}).power;
    const double m12_oracle = dispatch_oracle(market, y, {0, 1}).total_cost - base_oracle -
                              truthful_profit(market, y, 0) - truthful_profit(market, y, 1);
    if (!(close(m12, 20.0) && close(m12_oracle, 20.0))) {
        ok = false;
        why = "coalition index mismatch";
    }

    const double elapsed = seconds_since(start);
    if (elapsed >= 1.0) {
        ok = false;
        why = "too slow";
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "worked-market fixture vs oracles within 1e-9%s%s (%.2f s)",
                  why.empty() ? "" : " - ", why.c_str(), elapsed);
    report(1, ok, buf);
}

// --- criterion 2 ----------------------------------------------------------

void criterion_dispatch_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1002);
    int failures = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        const auto market = test::random_market(rng, 1, 6);
        const double y = test::random_demand(rng, market, 0.0, market.size());
        const auto fast = economic_dispatch(market, y);
        const auto brute = dispatch_oracle(market, y);
        if (!nearly_equal(fast.total_cost, brute.total_cost)) {
            ++failures;
        }
    }
    const double elapsed = seconds_since(start);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "dispatch-oracle equivalence on %d instances, %d failures (%.2f s)", trials,
                  failures, elapsed);
    report(2, failures == 0 && elapsed < 10.0, buf);
}

// --- criterion 3 ----------------------------------------------------------

void criterion_uplift_minimality() {
    std::mt19937_64 rng(1003);
    int failures = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto market = test::random_market(rng, 1, 6);
        const double y = test::random_demand(rng, market, 0.0, market.size());
        if (!verify_uplift_minimality(market, y, 100).holds) {
            ++failures;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "uplift minimality at p* on %d instances, %d failures",
                  trials, failures);
    report(3, failures == 0, buf);
}

// --- criterion 4 ----------------------------------------------------------

void criterion_cost_difference_bounds() {
    std::mt19937_64 rng(1004);
    int failures = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        const auto market = test::random_market(rng, 2, 6);
        const double y = test::random_demand(rng, market, 1.0, market.size());
        const int m = marginal_split(y, market.capacity, market.size()).marginal_index;
        std::vector<double> full;
        for (const auto& g : market.generators) {
            full.push_back(g.full_cost(market.capacity));
        }
        std::sort(full.begin(), full.end());
        const double diff = economic_dispatch(market, y).total_cost -
                            economic_dispatch(market, y - market.capacity).total_cost;
        if (!leq_within_tol(full[m - 2], diff) || !leq_within_tol(diff, full[m - 1])) {
            ++failures;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "order statistics bound the marginal block cost, %d instances, %d failures",
                  trials, failures);
    report(4, failures == 0, buf);
}

// --- criterion 5 ----------------------------------------------------------

void criterion_supermodularity(const Scenario& rts) {
    std::mt19937_64 rng(1005);
    int failures = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        const auto market = test::random_market(rng, 2, 8);
        const double y = test::random_demand(rng, market, 0.0, market.size());
        const int n = market.size();
        if (!check_supermodularity(market, y).empty()) {
            ++failures;
        }
        if (leq_within_tol(y, market.capacity * (n - 2))) {
            const double base = economic_dispatch(market, y).total_cost;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j) {
                        continue;
                    }
                    const double cij = economic_dispatch(market, y, {i, j}).total_cost;
                    const double cj = economic_dispatch(market, y, {j}).total_cost;
                    const double ci = economic_dispatch(market, y, {i}).total_cost;
                    if (!leq_within_tol(ci - base, cij - cj)) {
                        ++failures;
                    }
                }
            }
        }
    }

    int sweep_violations = 0;
    for (double load = rts.load_min; load <= rts.load_max + 1e-9; load += rts.load_step) {
        sweep_violations +=
            static_cast<int>(check_supermodularity(rts.market, load).size());
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "exclusion exchange and pair supermodularity: %d instance failures, "
                  "%d sweep violations",
                  failures, sweep_violations);
    report(5, failures == 0 && sweep_violations == 0, buf);
}

// --- criterion 6 ----------------------------------------------------------

void criterion_oracle_bounds() {
    std::mt19937_64 rng(1006);
    const double grid_step = 1e-3;
    int bound_failures = 0;
    int under_failures = 0;
    long long equal_hits = 0;
    long long total = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto market = test::random_market(rng, 2, 6, true);
        const double y = test::random_demand(rng, market, 0.0, market.size() - 1);
        for (int k = 0; k < market.size(); ++k) {
            const auto best = best_response_oracle(market, y, k, grid_step);
            const double add = best.sup_gain - truthful_profit(market, y, k);
            const double index = market_power_index(market, y, k);
            if (add < -tol_scale(add, 0.0) ||
                !leq_within_tol(add, index + market.capacity * grid_step)) {
                ++bound_failures;
            }
            if (best.arg_v <
                market.generators[k].variable_cost - grid_step - tol_scale(best.arg_v, 1.0)) {
                ++under_failures;
            }
            ++total;
            if (std::fabs(add - index) <= market.capacity * grid_step + tol_scale(add, index)) {
                ++equal_hits;
            }
        }
    }

    // the worked market must expose the strict-inequality instance
    const auto market = test::worked_market();
    const auto power = analyze_market_power(market, 15.0, true, grid_step);
    const bool gen1_strict = !power.equality_flags[0] &&
                             (*power.oracle)[0].additional_gain + 1e-9 <
                                 power.closed_form_power[0];

    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "best-response bounds on %d instances: %d bound failures; no-under-reporting "
                  "holds on %lld/%lld generator cases%s; closed-form equality rate %.4f "
                  "(reported); worked-market generator 1 strict: %s",
                  trials, bound_failures, total - under_failures, total,
                  under_failures > 0 ? " (deviators profit from the demoted partial block)" : "",
                  static_cast<double>(equal_hits) / static_cast<double>(total),
                  gen1_strict ? "yes" : "no");
    report(6, bound_failures == 0 && under_failures == 0 && gen1_strict, buf);
}

// --- criterion 7 ----------------------------------------------------------

void criterion_rts_sweep(const Scenario& rts) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = sweep(rts, 1);
    const double elapsed = seconds_since(start);

    bool monotone = true;
    for (std::size_t s = 1; s < result.per_size.size(); ++s) {
        monotone = monotone &&
                   result.per_size[s].pct_with_power >=
                       result.per_size[s - 1].pct_with_power - 1e-12 &&
                   result.per_size[s].mean_power >= result.per_size[s - 1].mean_power - 1e-12;
    }
    const auto fit = fit_mean_power(result.per_size);
    const bool ok = elapsed < 300.0 && monotone && fit.slope > 0.0;
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "rts96-like sweep: %zu rows in %.1f s single-threaded, per-size "
                  "monotonicity %s, fit slope %.3f, r_squared %.4f (reported)",
                  result.rows.size(), elapsed, monotone ? "holds" : "violated", fit.slope,
                  fit.r_squared);
    report(7, ok, buf);
}

// --- criterion 8 ----------------------------------------------------------

void criterion_determinism(const std::string& chp_bin, const std::string& data_dir,
                           const Scenario& rts) {
    const fs::path tmp = fs::temp_directory_path() / "chp-acceptance";
    fs::create_directories(tmp);

    const std::string scenario = data_dir + "/rts96-like.json";
    const fs::path csv_a = tmp / "sweep_a.csv";
    const fs::path csv_b = tmp / "sweep_b.csv";
    const fs::path out_a = tmp / "sweep_a.txt";
    const fs::path out_b = tmp / "sweep_b.txt";

    bool ok = true;
    std::string why;
    // identical argv twice: --out must not differ or the echoed path differs
    const std::string sweep_args =
        "sweep --scenario \"" + scenario + "\" --out \"" + csv_a.string() + "\"";
    if (run_cli(chp_bin, sweep_args, out_a) != 0) {
        ok = false;
        why = "sweep run failed";
    }
    const std::string first_csv = read_file(csv_a);
    const std::string first_out = read_file(out_a);
    if (run_cli(chp_bin, sweep_args, out_b) != 0) {
        ok = false;
        why = "sweep rerun failed";
    }
    if (ok && (read_file(csv_a) != first_csv || read_file(out_b) != first_out)) {
        ok = false;
        why = "sweep output drifted between runs";
    }

    const fs::path chk_a = tmp / "check_a.txt";
    const fs::path chk_b = tmp / "check_b.txt";
    const std::string check_args = "check --trials 50 --seed 42";
    if (run_cli(chp_bin, check_args, chk_a) != 0 || run_cli(chp_bin, check_args, chk_b) != 0) {
        ok = false;
        why = "check run failed";
    }
    if (ok && read_file(chk_a) != read_file(chk_b)) {
        ok = false;
        why = "check output drifted between runs";
    }

    if (ok && to_csv(sweep(rts, 1).rows) != to_csv(sweep(rts, 4).rows)) {
        ok = false;
        why = "sweep differs across worker counts";
    }

    report(8, ok,
           ok ? "sweep and seeded check are byte-identical across runs and worker counts"
              : "determinism violated - " + why);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string chp_bin = argc > 1 ? argv[1] : "chp";
    const std::string data_dir = argc > 2 ? argv[2] : CHP_DATA_DIR;

    const auto rts = load_scenario_file(data_dir + "/rts96-like.json");

    criterion_worked_fixture();
    criterion_dispatch_equivalence();
    criterion_uplift_minimality();
    criterion_cost_difference_bounds();
    criterion_supermodularity(rts);
    criterion_oracle_bounds();
    criterion_rts_sweep(rts);
    criterion_determinism(chp_bin, data_dir, rts);

    std::cout << (g_failures == 0 ? "acceptance: all criteria passed"
                                  : "acceptance: FAILURES present")
              << "\n";
    return g_failures == 0 ? 0 : 1;
}
