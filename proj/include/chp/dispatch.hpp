#pragma once

#include <optional>
#include <vector>

#include "chp/model.hpp"

namespace chp {

/// Solution of the (possibly restricted) dispatch problem. Outputs follow the
/// structural form: all dispatched units run at capacity except at most one,
/// which carries the partial block x.
struct DispatchResult {
    std::vector<Mw> outputs;
    Money total_cost = 0.0;
    MarginalSplit split;
    std::vector<int> excluded;        // sorted, the barred set A
    std::optional<int> x_holder;      // generator at x; empty when x = G or demand = 0
};

/// (m, x) for the given demand. Zero demand maps to (0, 0); exact multiples
/// of the capacity map to (k, G).
MarginalSplit marginal_split(Mw demand, Mw capacity, int available);

/// Cost-minimal dispatch of `demand` over the non-excluded generators,
/// using reported costs when `bids` is given. Structural solve: rank by
/// f(G), then take the cheaper of demoting the costliest committed unit to
/// the partial block versus bringing in the cheapest outsider at x. Cost
/// ties go to the outsider candidate.
DispatchResult economic_dispatch(const Market& market, Mw demand,
                                 const std::vector<int>& excluded = {},
                                 const std::optional<BidProfile>& bids = std::nullopt);

/// Exhaustive-enumeration ground truth for economic_dispatch: tries every
/// assignment of m-1 generators to G and one to x (every m-subset at G when
/// x = G). Intended for at most 12 available generators. Ties keep the first
/// assignment in enumeration order (lowest partial-block generator index,
/// then lexicographically smallest committed set).
DispatchResult dispatch_oracle(const Market& market, Mw demand,
                               const std::vector<int>& excluded = {},
                               const std::optional<BidProfile>& bids = std::nullopt);

namespace detail {

/// Costs of the two structural dispatch candidates at a given cost profile:
/// `demote` commits the first m ranked units with the costliest of the first
/// m-1 pulled down to x; `outsider` runs the first m-1 at G and the cheapest
/// remaining unit at x. Either is absent when it does not exist (m < 2, or
/// x = G where the split degenerates).
struct StructuralCandidates {
    std::optional<Money> demote_cost;
    std::optional<Money> outsider_cost;
};

StructuralCandidates structural_candidate_costs(const Market& market, Mw demand,
                                                const std::vector<int>& excluded,
                                                const std::optional<BidProfile>& bids);

/// Restricted-cost fast path: c^A(y) without materializing a DispatchResult.
/// `ranked_all` is the merit order over all generators for the same cost
/// profile; `excluded_mask` bit k bars generator k. Scratch is caller-owned
/// to keep tight loops allocation-free.
Money restricted_cost(const Market& market, const std::vector<GeneratorCost>& costs,
                      const std::vector<int>& ranked_all, unsigned long long excluded_mask,
                      Mw demand, std::vector<int>& scratch);

}  // namespace detail

}  // namespace chp
