#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "chp/dispatch.hpp"
#include "chp/model.hpp"

namespace chp::test {

inline Market worked_market() {
    return Market(10.0, {GeneratorCost(10, 1), GeneratorCost(10, 2), GeneratorCost(10, 3),
                         GeneratorCost(10, 4)});
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random instance family used across the property suites: startup in
/// [0, 100], variable cost in [0, 10].
inline Market random_market(std::mt19937_64& rng, int n_min, int n_max,
                            bool fixed_capacity = false) {
    const int n = std::uniform_int_distribution<int>(n_min, n_max)(rng);
    const double capacity = fixed_capacity ? 10.0 : uniform_in(rng, 1.0, 100.0);
    std::vector<GeneratorCost> gens;
    gens.reserve(n);
    for (int k = 0; k < n; ++k) {
        gens.emplace_back(uniform_in(rng, 0.0, 100.0), uniform_in(rng, 0.0, 10.0));
    }
    return Market(capacity, std::move(gens));
}

/// Demand uniform in (lo_blocks, hi_blocks] capacity units.
inline double random_demand(std::mt19937_64& rng, const Market& market, double lo_blocks,
                            double hi_blocks) {
    const double lo = lo_blocks * market.capacity;
    const double hi = hi_blocks * market.capacity;
    double y = uniform_in(rng, lo, hi);
    if (y <= lo) {
        y = std::nextafter(lo, hi);
    }
    return y;
}

/// Brute-force profit maximization over a fine output grid; the independent
/// oracle for desired_output and max_profit. Ties resolve to the largest
/// output, mirroring the sup convention.
struct GridArgmax {
    double output = 0.0;
    double profit = 0.0;
};

inline GridArgmax grid_argmax(const GeneratorCost& cost, double price, double capacity,
                              int steps = 20000) {
    GridArgmax best;  // z = 0 gives profit 0
    for (int j = 1; j <= steps; ++j) {
        const double z = j == steps
                             ? capacity
                             : capacity * static_cast<double>(j) / static_cast<double>(steps);
        const double profit = price * z - cost.evaluate(z);
        if (profit >= best.profit) {
            best.profit = profit;
            best.output = z;
        }
    }
    return best;
}

/// Price-scan oracle for the convex hull price: the smallest average-cost
/// kink at which aggregate desired output (per the grid argmax) covers the
/// demand.
inline double price_scan_inf(const Market& market, double demand) {
    std::vector<double> kinks;
    kinks.reserve(market.generators.size());
    for (const auto& g : market.generators) {
        kinks.push_back(g.full_cost(market.capacity) / market.capacity);
    }
    std::sort(kinks.begin(), kinks.end());
    for (double p : kinks) {
        // sample a hair above the kink so an exact zero-profit tie is not
        // lost to rounding; the infimum itself is the kink value
        const double probe = p + 1e-9 * std::max(1.0, p);
        double total = 0.0;
        for (const auto& g : market.generators) {
            total += grid_argmax(g, probe, market.capacity, 400).output;
        }
        if (total >= demand - 1e-9) {
            return p;
        }
    }
    return kinks.back();
}

}  // namespace chp::test
