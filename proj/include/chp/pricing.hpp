#pragma once

#include <optional>
#include <vector>

#include "chp/dispatch.hpp"
#include "chp/model.hpp"

namespace chp {

/// Uniform price plus everything needed to settle it: what each generator
/// would like to produce at that price, the profit it would make there, and
/// the uplift that closes the gap to the operator's dispatch.
struct PriceResult {
    Money price = 0.0;
    std::vector<Mw> desired_outputs;
    std::vector<Money> max_profits;
    std::vector<Money> uplifts;
    Money total_uplift = 0.0;
    DispatchResult dispatch;
};

/// Convex hull price for the demand. `degenerate_demand` flags the zero-load
/// convention where no price-setter exists.
struct ChpPrice {
    Money price = 0.0;
    bool degenerate_demand = false;
};

struct MinimalityVerdict {
    bool holds = false;
    Money worst_gap = 0.0;  // max over candidates of uplift(p*) - uplift(candidate)
};

/// Profit-maximizing output at a uniform price: all-or-nothing for step
/// costs, with the zero-profit tie resolved to full capacity.
Mw desired_output(const GeneratorCost& cost, Money price, Mw capacity);

/// Profit at the desired output, never below the shutdown profit of zero.
Money max_profit(const GeneratorCost& cost, Money price, Mw capacity);

/// The m-th smallest average full-capacity cost f(G)/G, reported costs when
/// bids are given. Zero demand returns price 0 with the degenerate flag set.
ChpPrice convex_hull_price(const Market& market, Mw demand,
                           const std::optional<BidProfile>& bids = std::nullopt);

/// Uplift settlement at an arbitrary price: dispatches on the (reported)
/// profile and pays each generator the gap between its best profit at the
/// price and its profit under the dispatch.
PriceResult uplift(const Market& market, Mw demand, Money price,
                   const std::optional<BidProfile>& bids = std::nullopt);

/// Empirical check that the convex hull price minimizes total uplift:
/// scans both sides of every average-cost kink plus a uniform price grid.
MinimalityVerdict verify_uplift_minimality(const Market& market, Mw demand,
                                           int grid_points);

}  // namespace chp
