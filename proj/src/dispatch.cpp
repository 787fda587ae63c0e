#include "chp/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace chp {

namespace {

void validate_excluded(const Market& market, std::vector<int>& excluded) {
    for (int k : excluded) {
        detail::validate_generator_index(market, k);
    }
    std::sort(excluded.begin(), excluded.end());
    excluded.erase(std::unique(excluded.begin(), excluded.end()), excluded.end());
}

std::vector<int> available_indices(const Market& market, const std::vector<int>& excluded) {
    std::vector<int> available;
    available.reserve(market.generators.size());
    auto it = excluded.begin();
    for (int k = 0; k < market.size(); ++k) {
        if (it != excluded.end() && *it == k) {
            ++it;
            continue;
        }
        available.push_back(k);
    }
    return available;
}

void rank_by_full_cost(const std::vector<GeneratorCost>& costs, Mw capacity,
                       std::vector<int>& indices) {
    std::stable_sort(indices.begin(), indices.end(), [&](int a, int b) {
        return costs[a].full_cost(capacity) < costs[b].full_cost(capacity);
    });
}

struct CoreResult {
    bool demote = false;          // picked the demote candidate
    int holder = -1;              // generator at x; -1 when the split is all-G
    Money cost = 0.0;             // chosen candidate's cost
    std::optional<Money> cost_demote;
    std::optional<Money> cost_outsider;
};

// Structural solve over the ranked available generators; m >= 1 expected.
CoreResult solve_core(const std::vector<GeneratorCost>& costs, Mw capacity,
                      const std::vector<int>& ranked, int m, Mw x) {
    CoreResult result;
    Money prefix_m1 = 0.0;  // sum of f(G) over the first m-1 ranked
    Money max_v = 0.0;
    int p = -1;  // costliest variable cost among the first m-1, lowest index on ties
    for (int j = 0; j < m - 1; ++j) {
        const int k = ranked[j];
        prefix_m1 += costs[k].full_cost(capacity);
        const Money v = costs[k].variable_cost;
        if (p < 0 || v > max_v || (v == max_v && k < p)) {
            max_v = v;
            p = k;
        }
    }

    if (nearly_equal(x, capacity)) {
        // No partial slot: the first m ranked run at capacity.
        result.cost = prefix_m1 + costs[ranked[m - 1]].full_cost(capacity);
        return result;
    }

    int q = -1;  // cheapest at x among everyone past the first m-1
    Money best_fx = 0.0;
    for (std::size_t j = static_cast<std::size_t>(m) - 1; j < ranked.size(); ++j) {
        const int k = ranked[j];
        const Money fx = costs[k].evaluate(x);
        if (q < 0 || fx < best_fx || (fx == best_fx && k < q)) {
            best_fx = fx;
            q = k;
        }
    }
    result.cost_outsider = prefix_m1 + best_fx;

    if (m >= 2) {
        const Money prefix_m = prefix_m1 + costs[ranked[m - 1]].full_cost(capacity);
        result.cost_demote = prefix_m - (capacity - x) * max_v;
    }

    // Cost ties go to the outsider candidate.
    if (result.cost_demote && definitely_less(*result.cost_demote, *result.cost_outsider)) {
        result.demote = true;
        result.holder = p;
        result.cost = *result.cost_demote;
    } else {
        result.holder = q;
        result.cost = *result.cost_outsider;
    }
    return result;
}

Money sum_cost(const std::vector<GeneratorCost>& costs, const std::vector<Mw>& outputs) {
    Money total = 0.0;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        total += costs[k].evaluate(outputs[k]);
    }
    return total;
}

void check_demand_sign(Mw demand) {
    if (demand < 0.0 && !nearly_equal(demand, 0.0)) {
        throw DomainError("demand cannot be negative");
    }
}

// Lexicographic next-combination over positions [0, pool_size).
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

}  // namespace

MarginalSplit marginal_split(Mw demand, Mw capacity, int available) {
    if (!(capacity > 0.0) || !std::isfinite(capacity)) {
        throw DomainError("capacity must be positive and finite");
    }
    if (available < 0) {
        throw DomainError("available generator count cannot be negative");
    }
    if (demand < 0.0 && !nearly_equal(demand, 0.0)) {
        throw InfeasibleError("demand cannot be negative", -demand);
    }
    if (demand <= 0.0 || nearly_equal(demand, 0.0)) {
        return {0, 0.0};
    }
    const Mw total = capacity * static_cast<double>(available);
    if (demand > total && !nearly_equal(demand, total)) {
        throw InfeasibleError("demand exceeds available capacity by " +
                                  std::to_string(demand - total) + " MW",
                              demand - total);
    }
    const auto k = static_cast<long long>(std::llround(demand / capacity));
    if (k >= 1 && nearly_equal(demand, static_cast<double>(k) * capacity)) {
        return {static_cast<int>(k), capacity};
    }
    const int m = static_cast<int>(std::floor(demand / capacity)) + 1;
    return {m, demand - static_cast<double>(m - 1) * capacity};
}

DispatchResult economic_dispatch(const Market& market, Mw demand,
                                 const std::vector<int>& excluded,
                                 const std::optional<BidProfile>& bids) {
    detail::validate_market(market);
    check_demand_sign(demand);
    std::vector<int> barred = excluded;
    validate_excluded(market, barred);

    auto available = available_indices(market, barred);
    const auto split =
        marginal_split(demand, market.capacity, static_cast<int>(available.size()));
    const auto costs = detail::effective_costs(market, bids);

    DispatchResult result;
    result.outputs.assign(market.generators.size(), 0.0);
    result.split = split;
    result.excluded = std::move(barred);

    if (split.marginal_index == 0) {
        return result;
    }

    rank_by_full_cost(costs, market.capacity, available);
    const auto core = solve_core(costs, market.capacity, available, split.marginal_index,
                                 split.partial_output);

    if (core.holder < 0) {
        for (int j = 0; j < split.marginal_index; ++j) {
            result.outputs[available[j]] = market.capacity;
        }
    } else if (core.demote) {
        for (int j = 0; j < split.marginal_index; ++j) {
            result.outputs[available[j]] = market.capacity;
        }
        result.outputs[core.holder] = split.partial_output;
        result.x_holder = core.holder;
    } else {
        for (int j = 0; j + 1 < split.marginal_index; ++j) {
            result.outputs[available[j]] = market.capacity;
        }
        result.outputs[core.holder] = split.partial_output;
        result.x_holder = core.holder;
    }

    result.total_cost = sum_cost(costs, result.outputs);
    return result;
}

DispatchResult dispatch_oracle(const Market& market, Mw demand,
                               const std::vector<int>& excluded,
                               const std::optional<BidProfile>& bids) {
    detail::validate_market(market);
    check_demand_sign(demand);
    std::vector<int> barred = excluded;
    validate_excluded(market, barred);

    const auto available = available_indices(market, barred);
    if (available.size() > 12) {
        throw InstanceTooLargeError("dispatch oracle is limited to 12 available generators, got " +
                                    std::to_string(available.size()));
    }
    const auto split =
        marginal_split(demand, market.capacity, static_cast<int>(available.size()));
    const auto costs = detail::effective_costs(market, bids);

    DispatchResult result;
    result.outputs.assign(market.generators.size(), 0.0);
    result.split = split;
    result.excluded = std::move(barred);
    if (split.marginal_index == 0) {
        return result;
    }

    const int n_av = static_cast<int>(available.size());
    const int m = split.marginal_index;
    const Mw x = split.partial_output;
    const bool all_full = nearly_equal(x, market.capacity);

    bool have_best = false;
    Money best_cost = 0.0;
    std::vector<Mw> best_outputs(market.generators.size(), 0.0);
    std::optional<int> best_holder;

    auto consider = [&](const std::vector<Mw>& outputs, std::optional<int> holder) {
        const Money cost = sum_cost(costs, outputs);
        if (!have_best || cost < best_cost) {
            have_best = true;
            best_cost = cost;
            best_outputs = outputs;
            best_holder = holder;
        }
    };

    std::vector<Mw> outputs(market.generators.size(), 0.0);
    if (all_full) {
        std::vector<int> comb(m);
        std::iota(comb.begin(), comb.end(), 0);
        do {
            std::fill(outputs.begin(), outputs.end(), 0.0);
            for (int pos : comb) {
                outputs[available[pos]] = market.capacity;
            }
            consider(outputs, std::nullopt);
        } while (next_combination(comb, n_av));
    } else {
        for (int qi = 0; qi < n_av; ++qi) {
            const int q = available[qi];
            std::vector<int> pool;
            pool.reserve(n_av - 1);
            for (int j = 0; j < n_av; ++j) {
                if (j != qi) {
                    pool.push_back(available[j]);
                }
            }
            std::vector<int> comb(m - 1);
            std::iota(comb.begin(), comb.end(), 0);
            bool more = true;
            while (more) {
                std::fill(outputs.begin(), outputs.end(), 0.0);
                for (int pos : comb) {
                    outputs[pool[pos]] = market.capacity;
                }
                outputs[q] = x;
                consider(outputs, q);
                more = next_combination(comb, static_cast<int>(pool.size()));
            }
        }
    }

    result.outputs = std::move(best_outputs);
    result.total_cost = best_cost;
    result.x_holder = best_holder;
    return result;
}

namespace detail {

StructuralCandidates structural_candidate_costs(const Market& market, Mw demand,
                                                const std::vector<int>& excluded,
                                                const std::optional<BidProfile>& bids) {
    detail::validate_market(market);
    std::vector<int> barred = excluded;
    validate_excluded(market, barred);
    auto available = available_indices(market, barred);
    const auto split =
        marginal_split(demand, market.capacity, static_cast<int>(available.size()));
    StructuralCandidates out;
    if (split.marginal_index == 0 || nearly_equal(split.partial_output, market.capacity)) {
        return out;
    }
    const auto costs = detail::effective_costs(market, bids);
    rank_by_full_cost(costs, market.capacity, available);
    const auto core = solve_core(costs, market.capacity, available, split.marginal_index,
                                 split.partial_output);
    out.demote_cost = core.cost_demote;
    out.outsider_cost = core.cost_outsider;
    return out;
}

Money restricted_cost(const Market& market, const std::vector<GeneratorCost>& costs,
                      const std::vector<int>& ranked_all, unsigned long long excluded_mask,
                      Mw demand, std::vector<int>& scratch) {
    scratch.clear();
    for (int k : ranked_all) {
        if ((excluded_mask >> k) & 1ULL) {
            continue;
        }
        scratch.push_back(k);
    }
    const auto split =
        marginal_split(demand, market.capacity, static_cast<int>(scratch.size()));
    if (split.marginal_index == 0) {
        return 0.0;
    }
    return solve_core(costs, market.capacity, scratch, split.marginal_index,
                      split.partial_output)
        .cost;
}

}  // namespace detail

}  // namespace chp
