#include "chp/strategic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chp/pricing.hpp"

namespace chp {

namespace {

Money order_stat_full_cost(const std::vector<GeneratorCost>& costs, Mw capacity, int m) {
    std::vector<Money> full;
    full.reserve(costs.size());
    for (const auto& c : costs) {
        full.push_back(c.full_cost(capacity));
    }
    std::nth_element(full.begin(), full.begin() + (m - 1), full.end());
    return full[m - 1];
}

Money restricted_total_cost(const Market& market, Mw demand, const std::vector<int>& excluded) {
    return economic_dispatch(market, demand, excluded).total_cost;
}

struct ProfileEval {
    std::vector<GeneratorCost> reported;
    DispatchResult dispatch;
    Money price_setter_cost = 0.0;  // f^(m)(G) under the reported profile
    int m = 0;
};

ProfileEval evaluate_profile(const Market& market, Mw demand, const BidProfile& bids) {
    ProfileEval eval;
    eval.reported = detail::effective_costs(market, bids);
    eval.dispatch = economic_dispatch(market, demand, {}, bids);
    eval.m = eval.dispatch.split.marginal_index;
    if (eval.m >= 1) {
        eval.price_setter_cost = order_stat_full_cost(eval.reported, market.capacity, eval.m);
    }
    return eval;
}

// True profit of one generator under an arbitrary reported profile: the
// price-taking term earned by the reported curve plus the reported-minus-true
// cost gap at the dispatched output.
Money deviator_profit(const Market& market, const ProfileEval& eval, int gen) {
    if (eval.m == 0) {
        return 0.0;
    }
    const Money bid_term = std::max(
        0.0, eval.price_setter_cost - eval.reported[gen].full_cost(market.capacity));
    const Mw output = eval.dispatch.outputs[gen];
    const Money guise = eval.reported[gen].evaluate(output) -
                        market.generators[gen].evaluate(output);
    return bid_term + guise;
}

enum class SampleKind { Plain = 0, Breakpoint = 1, BpPlus = 2, Grid = 3, BpMinus = 4 };

struct Sample {
    Money value = 0.0;
    SampleKind kind = SampleKind::Plain;
};

void push_sample(std::vector<Sample>& samples, Money value, SampleKind kind) {
    if (value >= 0.0 && std::isfinite(value)) {
        samples.push_back({value, kind});
    }
}

void push_breakpoint(std::vector<Sample>& samples, Money value, Money grid_step) {
    push_sample(samples, value, SampleKind::Breakpoint);
    push_sample(samples, value - grid_step, SampleKind::BpMinus);
    push_sample(samples, value + grid_step, SampleKind::BpPlus);
}

// Breakpoints of the deviator's profit as a function of its reported variable
// cost: merit-order crossings, partial-block crossings, and (within the
// demote candidate) variable-cost crossings.
std::vector<Money> profit_breakpoints(const Market& market, int gen, const MarginalSplit& split) {
    std::vector<Money> points;
    const Money s = market.generators[gen].startup_cost;
    const Mw capacity = market.capacity;
    const bool partial_slot =
        split.partial_output > 0.0 && !nearly_equal(split.partial_output, capacity);
    for (int k = 0; k < market.size(); ++k) {
        if (k == gen) {
            continue;
        }
        const auto& other = market.generators[k];
        points.push_back((other.full_cost(capacity) - s) / capacity);
        if (partial_slot) {
            points.push_back((other.evaluate(split.partial_output) - s) / split.partial_output);
        }
        if (split.marginal_index >= 2) {
            points.push_back(other.variable_cost);
        }
    }
    return points;
}

// Zeros of demote-cost minus outsider-cost in the deviator's report: the
// points where the chosen dispatch structure flips. The gap is piecewise
// linear with kinks only at the profit breakpoints, so scanning consecutive
// kink intervals finds every sign change.
void append_dispatch_flip_roots(const Market& market, Mw demand, int gen,
                                std::vector<Money>& points, Money hi) {
    std::vector<Money> kinks = points;
    kinks.push_back(0.0);
    kinks.push_back(hi);
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

    auto gap_at = [&](Money v) -> std::optional<Money> {
        const auto bids = BidProfile::single_deviation(market, gen, v);
        const auto cand = detail::structural_candidate_costs(market, demand, {}, bids);
        if (!cand.demote_cost || !cand.outsider_cost) {
            return std::nullopt;
        }
        return *cand.demote_cost - *cand.outsider_cost;
    };

    std::optional<Money> prev_gap;
    Money prev_v = 0.0;
    for (Money v : kinks) {
        if (v < 0.0) {
            continue;
        }
        const auto gap = gap_at(v);
        if (prev_gap && gap && ((*prev_gap < 0.0) != (*gap < 0.0)) && *prev_gap != *gap) {
            points.push_back(prev_v + (v - prev_v) * (*prev_gap / (*prev_gap - *gap)));
        }
        prev_gap = gap;
        prev_v = v;
    }
}

}  // namespace

Money truthful_profit(const Market& market, Mw demand, int generator) {
    detail::validate_market(market);
    detail::validate_generator_index(market, generator);
    if (demand <= 0.0 || nearly_equal(demand, 0.0)) {
        return 0.0;
    }
    const auto split = marginal_split(demand, market.capacity, market.size());
    const Money fm = order_stat_full_cost(market.generators, market.capacity,
                                          split.marginal_index);
    return std::max(0.0, fm - market.generators[generator].full_cost(market.capacity));
}

StrategicOutcome strategic_profit(const Market& market, Mw demand, int generator,
                                  Money reported_v) {
    const auto bids = BidProfile::single_deviation(market, generator, reported_v);
    const auto eval = evaluate_profile(market, demand, bids);

    StrategicOutcome outcome;
    outcome.deviator = generator;
    outcome.reported_v = reported_v;
    outcome.dispatch = eval.dispatch;
    if (eval.m >= 1) {
        outcome.price = eval.price_setter_cost / market.capacity;
        outcome.bid_profit = std::max(
            0.0, eval.price_setter_cost - eval.reported[generator].full_cost(market.capacity));
    }
    const Mw output = eval.dispatch.outputs[generator];
    outcome.cost_guise = eval.reported[generator].evaluate(output) -
                         market.generators[generator].evaluate(output);
    outcome.profit = outcome.bid_profit + outcome.cost_guise;
    return outcome;
}

BestResponse best_response_oracle(const Market& market, Mw demand, int generator,
                                  Money grid_step) {
    detail::validate_market(market);
    detail::validate_generator_index(market, generator);
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
        throw DomainError("grid_step must be positive and finite");
    }
    const Money v_true = market.generators[generator].variable_cost;
    const auto split = marginal_split(demand, market.capacity, market.size());
    if (split.marginal_index == 0) {
        return {0.0, v_true, true};
    }

    Money top_avg = 0.0;
    for (const auto& g : market.generators) {
        top_avg = std::max(top_avg, g.full_cost(market.capacity) / market.capacity);
    }
    const Money hi = top_avg + 1.0;

    std::vector<Sample> samples;
    push_sample(samples, v_true, SampleKind::Plain);

    auto breakpoints = profit_breakpoints(market, generator, split);
    if (split.partial_output > 0.0 && !nearly_equal(split.partial_output, market.capacity) &&
        split.marginal_index >= 2) {
        append_dispatch_flip_roots(market, demand, generator, breakpoints, hi);
    }
    for (Money b : breakpoints) {
        push_breakpoint(samples, b, grid_step);
    }
    for (long long j = 0;; ++j) {
        const Money v = static_cast<double>(j) * grid_step;
        if (v > hi) {
            break;
        }
        push_sample(samples, v, SampleKind::Grid);
    }

    std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
        return a.value != b.value ? a.value < b.value
                                  : static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    // Merge duplicate reports; a point that is also a breakpoint-minus-step
    // sample keeps that label, so attainment stays conservative.
    std::vector<Sample> merged;
    merged.reserve(samples.size());
    for (const auto& s : samples) {
        if (!merged.empty() && merged.back().value == s.value) {
            if (s.kind == SampleKind::BpMinus) {
                merged.back().kind = SampleKind::BpMinus;
            }
            continue;
        }
        merged.push_back(s);
    }

    BestResponse best;
    best.sup_gain = -std::numeric_limits<double>::infinity();
    Money best_at_or_above = -std::numeric_limits<double>::infinity();
    std::vector<Money> profits(merged.size());
    for (std::size_t idx = 0; idx < merged.size(); ++idx) {
        profits[idx] = strategic_profit(market, demand, generator, merged[idx].value).profit;
        best.sup_gain = std::max(best.sup_gain, profits[idx]);
        if (merged[idx].value >= v_true) {
            best_at_or_above = std::max(best_at_or_above, profits[idx]);
        }
    }

    // arg_v is the smallest report certifying the supremum at the search
    // resolution (every sample value is within capacity * grid_step of it).
    // When the at-or-above-truthful side certifies the same supremum, report
    // that side; an undercutting arg_v therefore means under-reporting beats
    // every honest-side report by more than the resolution.
    const Money resolution =
        market.capacity * grid_step + tol_scale(best.sup_gain, best.sup_gain);
    Money target = best.sup_gain;
    bool from_above = false;
    if (best.sup_gain - best_at_or_above <= resolution) {
        target = best_at_or_above;
        from_above = true;
    }
    std::size_t chosen = 0;
    for (std::size_t idx = 0; idx < merged.size(); ++idx) {
        if (profits[idx] == target && (!from_above || merged[idx].value >= v_true)) {
            chosen = idx;
            break;
        }
    }
    best.arg_v = merged[chosen].value;

    const Money near = tol_scale(best.sup_gain, best.sup_gain);
    best.attained = false;
    for (std::size_t idx = 0; idx < merged.size(); ++idx) {
        if (merged[idx].kind != SampleKind::BpMinus && profits[idx] >= best.sup_gain - near) {
            best.attained = true;
            break;
        }
    }
    return best;
}

Money case_supremum(const Market& market, Mw demand, int generator, DispatchTarget target) {
    detail::validate_market(market);
    detail::validate_generator_index(market, generator);
    if (target == DispatchTarget::Zero) {
        return 0.0;
    }
    const auto split = marginal_split(demand, market.capacity, market.size());
    if (split.marginal_index == 0) {
        return 0.0;
    }
    const std::vector<int> barred{generator};
    const Money c_excl_y = restricted_total_cost(market, demand, barred);
    if (target == DispatchTarget::Partial) {
        const Mw rest = static_cast<double>(split.marginal_index - 1) * market.capacity;
        const Money c_excl_rest = restricted_total_cost(market, rest, barred);
        return c_excl_y - c_excl_rest -
               market.generators[generator].evaluate(split.partial_output);
    }
    if (demand < market.capacity && !nearly_equal(demand, market.capacity)) {
        throw InfeasibleError("demand below one capacity block cannot support a full-output case",
                              market.capacity - demand);
    }
    const Money c_excl_prev = restricted_total_cost(market, demand - market.capacity, barred);
    return c_excl_y - c_excl_prev - market.generators[generator].full_cost(market.capacity);
}

Money market_power_index(const Market& market, Mw demand, int generator) {
    detail::validate_market(market);
    detail::validate_generator_index(market, generator);
    const Money restricted = restricted_total_cost(market, demand, {generator});
    const Money base = restricted_total_cost(market, demand, {});
    return restricted - base - truthful_profit(market, demand, generator);
}

CoalitionReport coalition_power(const Market& market, Mw demand,
                                const std::vector<int>& members) {
    detail::validate_market(market);
    if (members.empty()) {
        throw DomainError("coalition must have at least one member");
    }
    CoalitionReport report;
    report.members = members;
    std::sort(report.members.begin(), report.members.end());
    report.members.erase(std::unique(report.members.begin(), report.members.end()),
                         report.members.end());
    for (int k : report.members) {
        detail::validate_generator_index(market, k);
    }

    const Mw remaining =
        market.capacity * static_cast<double>(market.size() - report.members.size());
    report.feasible = leq_within_tol(demand, remaining);
    if (!report.feasible) {
        return report;
    }
    Money benchmark_sum = 0.0;
    for (int k : report.members) {
        benchmark_sum += truthful_profit(market, demand, k);
    }
    report.power = restricted_total_cost(market, demand, report.members) -
                   restricted_total_cost(market, demand, {}) - benchmark_sum;
    return report;
}

std::vector<SupermodularityViolation> check_supermodularity(const Market& market, Mw demand) {
    detail::validate_market(market);
    std::vector<SupermodularityViolation> violations;
    const int n = market.size();
    const Mw pair_remaining = market.capacity * static_cast<double>(n - 2);
    if (n < 2 || !leq_within_tol(demand, pair_remaining)) {
        return violations;  // vacuous: no feasible pair
    }
    std::vector<Money> single(n);
    for (int i = 0; i < n; ++i) {
        single[i] = market_power_index(market, demand, i);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto pair = coalition_power(market, demand, {i, j});
            const Money gap = single[i] + single[j] - pair.power;
            if (gap > tol_scale(pair.power, single[i] + single[j])) {
                violations.push_back({i, j, gap});
            }
        }
    }
    return violations;
}

Money pair_best_response_oracle(const Market& market, Mw demand, int i, int j,
                                Money grid_step) {
    detail::validate_market(market);
    detail::validate_generator_index(market, i);
    detail::validate_generator_index(market, j);
    if (i == j) {
        throw DomainError("pair oracle needs two distinct generators");
    }
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
        throw DomainError("grid_step must be positive and finite");
    }
    const auto split = marginal_split(demand, market.capacity, market.size());
    const Money benchmark =
        truthful_profit(market, demand, i) + truthful_profit(market, demand, j);
    if (split.marginal_index == 0) {
        return 0.0;
    }

    Money top_avg = 0.0;
    for (const auto& g : market.generators) {
        top_avg = std::max(top_avg, g.full_cost(market.capacity) / market.capacity);
    }
    const Money hi = top_avg + 1.0;

    auto axis_candidates = [&](int gen) {
        std::vector<Money> values{market.generators[gen].variable_cost};
        for (Money b : profit_breakpoints(market, gen, split)) {
            for (Money v : {b, b - grid_step, b + grid_step}) {
                if (v >= 0.0 && std::isfinite(v)) {
                    values.push_back(v);
                }
            }
        }
        for (long long k = 0;; ++k) {
            const Money v = static_cast<double>(k) * grid_step;
            if (v > hi) {
                break;
            }
            values.push_back(v);
        }
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        return values;
    };

    const auto vi_candidates = axis_candidates(i);
    const auto vj_candidates = axis_candidates(j);

    Money best_sum = -std::numeric_limits<double>::infinity();
    BidProfile bids = BidProfile::truthful(market);
    for (Money vi : vi_candidates) {
        bids.reported_variable_costs[i] = vi;
        for (Money vj : vj_candidates) {
            bids.reported_variable_costs[j] = vj;
            const auto eval = evaluate_profile(market, demand, bids);
            const Money sum =
                deviator_profit(market, eval, i) + deviator_profit(market, eval, j);
            if (sum > best_sum) {
                best_sum = sum;
            }
        }
        bids.reported_variable_costs[j] = market.generators[j].variable_cost;
    }
    return best_sum - benchmark;
}

PowerReport analyze_market_power(const Market& market, Mw demand, bool with_oracle,
                                 Money grid_step) {
    detail::validate_market(market);
    PowerReport report;
    report.demand = demand;
    const int n = market.size();
    report.benchmark_profits.reserve(n);
    report.closed_form_power.reserve(n);
    for (int k = 0; k < n; ++k) {
        report.benchmark_profits.push_back(truthful_profit(market, demand, k));
        report.closed_form_power.push_back(market_power_index(market, demand, k));
    }
    if (with_oracle) {
        std::vector<OracleEntry> entries;
        entries.reserve(n);
        report.equality_flags.reserve(n);
        for (int k = 0; k < n; ++k) {
            const auto best = best_response_oracle(market, demand, k, grid_step);
            OracleEntry entry;
            entry.sup_gain = best.sup_gain;
            entry.arg_v = best.arg_v;
            entry.attained = best.attained;
            entry.additional_gain = best.sup_gain - report.benchmark_profits[k];
            const Money slack = market.capacity * grid_step;
            report.equality_flags.push_back(
                std::fabs(entry.additional_gain - report.closed_form_power[k]) <=
                slack + tol_scale(entry.additional_gain, report.closed_form_power[k]));
            entries.push_back(entry);
        }
        report.oracle = std::move(entries);
    }
    return report;
}

}  // namespace chp
