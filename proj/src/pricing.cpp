#include "chp/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chp {

Mw desired_output(const GeneratorCost& cost, Money price, Mw capacity) {
    if (!(capacity > 0.0)) {
        throw DomainError("capacity must be positive");
    }
    const Money profit_at_capacity = price * capacity - cost.full_cost(capacity);
    // The zero-profit tie resolves to full output (sup of the argmax set).
    return profit_at_capacity >= -tol_scale(profit_at_capacity, 0.0) ? capacity : 0.0;
}

Money max_profit(const GeneratorCost& cost, Money price, Mw capacity) {
    if (!(capacity > 0.0)) {
        throw DomainError("capacity must be positive");
    }
    return std::max(0.0, price * capacity - cost.full_cost(capacity));
}

ChpPrice convex_hull_price(const Market& market, Mw demand,
                           const std::optional<BidProfile>& bids) {
    detail::validate_market(market);
    if (demand <= 0.0 || nearly_equal(demand, 0.0)) {
        if (demand < 0.0 && !nearly_equal(demand, 0.0)) {
            throw InfeasibleError("demand cannot be negative", -demand);
        }
        return {0.0, true};
    }
    const auto split = marginal_split(demand, market.capacity, market.size());
    const auto costs = detail::effective_costs(market, bids);
    std::vector<Money> full_costs;
    full_costs.reserve(costs.size());
    for (const auto& c : costs) {
        full_costs.push_back(c.full_cost(market.capacity));
    }
    std::nth_element(full_costs.begin(), full_costs.begin() + (split.marginal_index - 1),
                     full_costs.end());
    return {full_costs[split.marginal_index - 1] / market.capacity, false};
}

PriceResult uplift(const Market& market, Mw demand, Money price,
                   const std::optional<BidProfile>& bids) {
    if (price < 0.0 && !nearly_equal(price, 0.0)) {
        throw DomainError("price cannot be negative");
    }
    const auto costs = detail::effective_costs(market, bids);

    PriceResult result;
    result.price = price;
    result.dispatch = economic_dispatch(market, demand, {}, bids);
    result.desired_outputs.reserve(costs.size());
    result.max_profits.reserve(costs.size());
    result.uplifts.reserve(costs.size());
    for (std::size_t k = 0; k < costs.size(); ++k) {
        const Mw desired = desired_output(costs[k], price, market.capacity);
        const Money best = max_profit(costs[k], price, market.capacity);
        const Mw dispatched = result.dispatch.outputs[k];
        const Money dispatched_profit = price * dispatched - costs[k].evaluate(dispatched);
        result.desired_outputs.push_back(desired);
        result.max_profits.push_back(best);
        result.uplifts.push_back(best - dispatched_profit);
        result.total_uplift += best - dispatched_profit;
    }
    return result;
}

MinimalityVerdict verify_uplift_minimality(const Market& market, Mw demand,
                                           int grid_points) {
    if (grid_points < 1) {
        throw DomainError("grid_points must be at least 1");
    }
    const auto p_star = convex_hull_price(market, demand);
    const Money base = uplift(market, demand, p_star.price).total_uplift;

    // Total uplift is piecewise linear in the price with kinks at the average
    // full-capacity costs; sampling both sides of each kink plus a uniform
    // grid covers every linear piece.
    constexpr Money kKinkEps = 1e-6;
    std::vector<Money> candidates;
    Money top = 0.0;
    for (const auto& g : market.generators) {
        const Money avg = g.full_cost(market.capacity) / market.capacity;
        top = std::max(top, avg);
        if (avg - kKinkEps >= 0.0) {
            candidates.push_back(avg - kKinkEps);
        }
        candidates.push_back(avg + kKinkEps);
    }
    top += 1.0;
    if (grid_points == 1) {
        candidates.push_back(0.0);
    } else {
        for (int j = 0; j < grid_points; ++j) {
            candidates.push_back(top * static_cast<double>(j) /
                                 static_cast<double>(grid_points - 1));
        }
    }

    MinimalityVerdict verdict;
    verdict.worst_gap = -std::numeric_limits<double>::infinity();
    for (Money p : candidates) {
        const Money other = uplift(market, demand, p).total_uplift;
        verdict.worst_gap = std::max(verdict.worst_gap, base - other);
    }
    verdict.holds = verdict.worst_gap <= tol_scale(base, base);
    return verdict;
}

}  // namespace chp
