#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chp/common.hpp"

namespace chp {

using Money = double;
using Mw = double;

/// Non-convex step cost: a startup component that is paid whenever the unit
/// produces at all, plus a linear variable component.
struct GeneratorCost {
    Money startup_cost = 0.0;   // paid iff output > 0
    Money variable_cost = 0.0;  // per MW

    GeneratorCost() = default;
    GeneratorCost(Money startup, Money variable);

    /// Generation cost at the given output; zero output costs nothing.
    Money evaluate(Mw output) const;

    /// Cost of running flat out, startup included.
    Money full_cost(Mw capacity) const { return startup_cost + variable_cost * capacity; }
};

Money evaluate_cost(const GeneratorCost& cost, Mw output);

/// Equal-capacity pool: one shared capacity, n generators.
struct Market {
    Mw capacity = 0.0;
    std::vector<GeneratorCost> generators;
    std::vector<std::string> names;  // optional labels; indices stay canonical

    Market() = default;
    Market(Mw capacity_mw, std::vector<GeneratorCost> gens,
           std::vector<std::string> labels = {});

    int size() const { return static_cast<int>(generators.size()); }
    Mw total_capacity() const { return capacity * static_cast<double>(size()); }
};

/// Reported variable costs, one per generator. Startup costs are never
/// altered; a strategic report changes the variable component only.
struct BidProfile {
    std::vector<Money> reported_variable_costs;

    static BidProfile truthful(const Market& market);
    /// All generators truthful except `deviator`, which reports `reported_v`.
    static BidProfile single_deviation(const Market& market, int deviator, Money reported_v);

    /// Cost profile as the operator sees it: true startup, reported variable.
    GeneratorCost reported_cost(const Market& market, int index) const;
};

/// Decomposition of demand into m-1 full blocks plus one partial block of x.
struct MarginalSplit {
    int marginal_index = 0;  // m
    Mw partial_output = 0.0;  // x in (0, G]; (0, 0) for zero demand
};

/// Generator indices sorted ascending by full-capacity cost f(G), ties to the
/// lower index. The k-th entry carries the order statistic f^(k)(G).
std::vector<int> merit_order(const Market& market,
                             const std::optional<BidProfile>& bids = std::nullopt);

namespace detail {
/// Effective cost list: reported variable costs when bids are given.
std::vector<GeneratorCost> effective_costs(const Market& market,
                                           const std::optional<BidProfile>& bids);
void validate_market(const Market& market);
void validate_generator_index(const Market& market, int index);
}  // namespace detail

}  // namespace chp
