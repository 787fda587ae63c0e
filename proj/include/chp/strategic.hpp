#pragma once

#include <optional>
#include <vector>

#include "chp/dispatch.hpp"
#include "chp/model.hpp"

namespace chp {

/// Outcome of one generator reporting a variable cost while everyone else
/// stays truthful. The profit splits into the price-taking term earned by the
/// pretended cost curve and the bookkeeping gap between reported and true
/// cost at the dispatched output.
struct StrategicOutcome {
    int deviator = -1;
    Money reported_v = 0.0;
    Money price = 0.0;          // clearing price under the reported profile
    DispatchResult dispatch;    // dispatch under the reported profile
    Money profit = 0.0;         // true profit of the deviator
    Money bid_profit = 0.0;     // price-taking term on the reported curve
    Money cost_guise = 0.0;     // reported-minus-true cost at the dispatched output
};

/// Best response found by a dense one-dimensional search over reported
/// variable costs. `attained` is false when the best sample sits just below
/// a breakpoint, i.e. the supremum is approached but no report achieves it.
/// `arg_v` is the smallest report certifying the supremum at the search
/// resolution, preferring reports at or above the truthful cost when both
/// sides reach it.
struct BestResponse {
    Money sup_gain = 0.0;  // best total profit found (not net of the benchmark)
    Money arg_v = 0.0;
    bool attained = true;
};

struct OracleEntry {
    Money sup_gain = 0.0;
    Money arg_v = 0.0;
    bool attained = true;
    Money additional_gain = 0.0;  // sup_gain - benchmark profit
};

/// Per-generator market power summary: truthful benchmarks, the closed-form
/// index, and (optionally) the brute-force search next to it with a flag per
/// generator recording whether the two agree at the search resolution.
struct PowerReport {
    Mw demand = 0.0;
    std::vector<Money> benchmark_profits;
    std::vector<Money> closed_form_power;
    std::optional<std::vector<OracleEntry>> oracle;
    std::vector<bool> equality_flags;  // filled only when the oracle ran
};

struct CoalitionReport {
    std::vector<int> members;
    Money power = 0.0;  // meaningful only when feasible
    bool feasible = false;
};

struct SupermodularityViolation {
    int i = -1;
    int j = -1;
    Money gap = 0.0;  // M(i) + M(j) - M(i u j), positive means violated
};

enum class DispatchTarget { Zero, Partial, Full };

/// Truthful-bidding benchmark profit: the positive part of the price-setter's
/// full-capacity cost minus the generator's own.
Money truthful_profit(const Market& market, Mw demand, int generator);

/// Full pipeline for a single deviation: reprice, redispatch, and evaluate
/// the deviator's true profit under the reported profile.
StrategicOutcome strategic_profit(const Market& market, Mw demand, int generator,
                                  Money reported_v);

/// Dense search over reported variable costs: every merit and partial-block
/// crossing, every dispatch-candidate flip, each sampled on both sides, plus
/// a uniform grid. The result is within capacity * grid_step of the true
/// supremum.
BestResponse best_response_oracle(const Market& market, Mw demand, int generator,
                                  Money grid_step);

/// Closed-form bound on the deviator's profit conditional on landing at the
/// given dispatch target. Bounds only; not guaranteed attained.
Money case_supremum(const Market& market, Mw demand, int generator,
                    DispatchTarget target);

/// Closed-form index: restricted-minus-unrestricted system cost, net of the
/// truthful benchmark. Unclamped.
Money market_power_index(const Market& market, Mw demand, int generator);

/// Closed-form coalition index; `feasible` records whether the rest of the
/// fleet can serve the demand at all.
CoalitionReport coalition_power(const Market& market, Mw demand,
                                const std::vector<int>& members);

/// Checks M(i u j) >= M(i) + M(j) over every feasible pair; returns the
/// violations (expected empty).
std::vector<SupermodularityViolation> check_supermodularity(const Market& market,
                                                            Mw demand);

/// Joint grid search for a colluding pair, maximizing the sum of their true
/// profits. Returns the additional gain over the truthful benchmarks.
Money pair_best_response_oracle(const Market& market, Mw demand, int i, int j,
                                Money grid_step);

/// Assembles the per-generator report; runs the brute-force search when
/// `with_oracle` is set. Equality flags compare the oracle's additional gain
/// against the closed form within capacity * grid_step.
PowerReport analyze_market_power(const Market& market, Mw demand,
                                 bool with_oracle = false, Money grid_step = 1e-3);

}  // namespace chp
