#include "chp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chp {

namespace detail {

void validate_market(const Market& market) {
    if (!(market.capacity > 0.0) || !std::isfinite(market.capacity)) {
        throw DomainError("market capacity must be positive and finite");
    }
    if (market.generators.empty()) {
        throw DomainError("market needs at least one generator");
    }
    if (!market.names.empty() && market.names.size() != market.generators.size()) {
        throw DomainError("generator labels must match the generator count");
    }
}

void validate_generator_index(const Market& market, int index) {
    if (index < 0 || index >= market.size()) {
        throw DomainError("generator index out of range: " + std::to_string(index));
    }
}

std::vector<GeneratorCost> effective_costs(const Market& market,
                                           const std::optional<BidProfile>& bids) {
    std::vector<GeneratorCost> costs = market.generators;
    if (bids) {
        if (bids->reported_variable_costs.size() != costs.size()) {
            throw DomainError("bid profile length does not match the market");
        }
        for (std::size_t i = 0; i < costs.size(); ++i) {
            costs[i].variable_cost = bids->reported_variable_costs[i];
        }
    }
    return costs;
}

}  // namespace detail

GeneratorCost::GeneratorCost(Money startup, Money variable)
    : startup_cost(startup), variable_cost(variable) {
    if (!(startup >= 0.0) || !std::isfinite(startup)) {
        throw DomainError("startup cost must be non-negative and finite");
    }
    if (!(variable >= 0.0) || !std::isfinite(variable)) {
        throw DomainError("variable cost must be non-negative and finite");
    }
}

Money GeneratorCost::evaluate(Mw output) const {
    if (output < 0.0) {
        throw DomainError("generator output cannot be negative");
    }
    if (output == 0.0) {
        return 0.0;
    }
    return startup_cost + variable_cost * output;
}

Money evaluate_cost(const GeneratorCost& cost, Mw output) { return cost.evaluate(output); }

Market::Market(Mw capacity_mw, std::vector<GeneratorCost> gens, std::vector<std::string> labels)
    : capacity(capacity_mw), generators(std::move(gens)), names(std::move(labels)) {
    detail::validate_market(*this);
}

BidProfile BidProfile::truthful(const Market& market) {
    BidProfile bids;
    bids.reported_variable_costs.reserve(market.generators.size());
    for (const auto& g : market.generators) {
        bids.reported_variable_costs.push_back(g.variable_cost);
    }
    return bids;
}

BidProfile BidProfile::single_deviation(const Market& market, int deviator, Money reported_v) {
    detail::validate_generator_index(market, deviator);
    if (!(reported_v >= 0.0) || !std::isfinite(reported_v)) {
        throw DomainError("reported variable cost must be non-negative and finite");
    }
    BidProfile bids = truthful(market);
    bids.reported_variable_costs[deviator] = reported_v;
    return bids;
}

GeneratorCost BidProfile::reported_cost(const Market& market, int index) const {
    detail::validate_generator_index(market, index);
    GeneratorCost cost = market.generators[index];
    cost.variable_cost = reported_variable_costs.at(index);
    return cost;
}

std::vector<int> merit_order(const Market& market, const std::optional<BidProfile>& bids) {
    detail::validate_market(market);
    const auto costs = detail::effective_costs(market, bids);
    std::vector<int> order(costs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return costs[a].full_cost(market.capacity) < costs[b].full_cost(market.capacity);
    });
    return order;
}

}  // namespace chp
