#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chp/pricing.hpp"
#include "chp/strategic.hpp"
#include "support.hpp"

using namespace chp;

TEST_CASE("truthful benchmark profits") {
    const auto market = test::worked_market();
    CHECK(truthful_profit(market, 15, 0) == doctest::Approx(10.0));
    CHECK(truthful_profit(market, 15, 1) == 0.0);
    CHECK(truthful_profit(market, 15, 3) == 0.0);
    CHECK_THROWS_AS(truthful_profit(market, 15, 11), DomainError);
}

TEST_CASE("strategic profit pipeline") {
    const auto market = test::worked_market();

    auto outcome = strategic_profit(market, 15, 1, 2.9);
    CHECK(outcome.profit == doctest::Approx(4.5));
    CHECK(outcome.price == doctest::Approx(3.9));
    CHECK(outcome.dispatch.outputs[1] == doctest::Approx(5.0));

    // truthful report reproduces the benchmark exactly
    outcome = strategic_profit(market, 15, 0, 1.0);
    CHECK(outcome.profit == truthful_profit(market, 15, 0));

    // inflating past the x-slot crossing moves the deviator to the partial block
    outcome = strategic_profit(market, 15, 0, 2.5);
    CHECK(outcome.profit == doctest::Approx(7.5));
    CHECK(outcome.dispatch.outputs[0] == doctest::Approx(5.0));
}

TEST_CASE("profit decomposition and payment identity") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 150; ++t) {
        const auto market = test::random_market(rng, 1, 6);
        const double y = test::random_demand(rng, market, 0.0, market.size());
        const int dev = std::uniform_int_distribution<int>(0, market.size() - 1)(rng);
        const double v = test::uniform_in(rng, 0.0, 12.0);
        const auto outcome = strategic_profit(market, y, dev, v);

        CHECK(outcome.profit ==
              doctest::Approx(outcome.bid_profit + outcome.cost_guise).epsilon(1e-12));

        // payment-minus-true-cost identity: uplift on the reported profile,
        // true cost subtracted
        const auto bids = BidProfile::single_deviation(market, dev, v);
        const auto settlement = uplift(market, y, outcome.price, bids);
        const double dispatched = outcome.dispatch.outputs[dev];
        const double direct = outcome.price * dispatched + settlement.uplifts[dev] -
                              market.generators[dev].evaluate(dispatched);
        CAPTURE(t);
        CHECK(outcome.profit == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("best response search on the worked market") {
    const auto market = test::worked_market();

    auto best = best_response_oracle(market, 15, 1, 1e-3);
    CHECK(best.sup_gain == doctest::Approx(5.0));
    CHECK(best.arg_v == doctest::Approx(3.0));

    best = best_response_oracle(market, 15, 3, 1e-3);
    CHECK(best.sup_gain == doctest::Approx(0.0));

    // the deviator that already earns the benchmark cannot do better
    best = best_response_oracle(market, 15, 0, 1e-3);
    CHECK(best.sup_gain == doctest::Approx(10.0));
    CHECK(best.sup_gain - truthful_profit(market, 15, 0) == doctest::Approx(0.0));
}

TEST_CASE("case-conditional suprema") {
    const auto market = test::worked_market();
    CHECK(case_supremum(market, 15, 0, DispatchTarget::Partial) == doctest::Approx(10.0));
    CHECK(case_supremum(market, 15, 0, DispatchTarget::Full) == doctest::Approx(15.0));
    CHECK(case_supremum(market, 15, 2, DispatchTarget::Zero) == 0.0);
    CHECK_THROWS_AS(case_supremum(market, 5, 0, DispatchTarget::Full), InfeasibleError);
}

TEST_CASE("market power index on the worked market") {
    const auto market = test::worked_market();
    CHECK(market_power_index(market, 15, 0) == doctest::Approx(5.0));
    CHECK(market_power_index(market, 15, 1) == doctest::Approx(5.0));
    CHECK(market_power_index(market, 15, 2) == doctest::Approx(0.0));

    // excluding anyone leaves too little capacity
    CHECK_THROWS_AS(market_power_index(market, 35, 0), InfeasibleError);
}

TEST_CASE("market power index is non-negative") {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 200; ++t) {
        const auto market = test::random_market(rng, 2, 8);
        const double y = test::random_demand(rng, market, 0.0, market.size() - 1);
        for (int k = 0; k < market.size(); ++k) {
            const double index = market_power_index(market, y, k);
            CAPTURE(t);
            CHECK(index >= -tol_scale(index, 0.0));
        }
    }
}

TEST_CASE("coalition power") {
    const auto market = test::worked_market();
    auto report = coalition_power(market, 15, {0, 1});
    CHECK(report.feasible);
    CHECK(report.power == doctest::Approx(20.0));

    report = coalition_power(market, 15, {2, 3});
    CHECK(report.feasible);
    CHECK(report.power == doctest::Approx(0.0));

    const Market trio(10.0,
                      {GeneratorCost(10, 1), GeneratorCost(10, 2), GeneratorCost(10, 3)});
    report = coalition_power(trio, 15, {0, 1});
    CHECK_FALSE(report.feasible);

    CHECK_THROWS_AS(coalition_power(market, 15, {}), DomainError);
}

TEST_CASE("supermodularity holds") {
    const auto market = test::worked_market();
    CHECK(check_supermodularity(market, 15).empty());
    // worked pair: 20 >= 5 + 5
    CHECK(coalition_power(market, 15, {0, 1}).power >=
          market_power_index(market, 15, 0) + market_power_index(market, 15, 1) - 1e-9);

    std::mt19937_64 rng(33);
    for (int t = 0; t < 300; ++t) {
        const auto random = test::random_market(rng, 2, 8);
        const double y = test::random_demand(rng, random, 0.0, random.size());
        CAPTURE(t);
        CHECK(check_supermodularity(random, y).empty());
    }
}

TEST_CASE("pair best response stays under the closed form") {
    const auto market = test::worked_market();
    CHECK(pair_best_response_oracle(market, 15, 2, 3, 0.05) == doctest::Approx(0.0));

    const double gain = pair_best_response_oracle(market, 15, 0, 1, 0.05);
    CHECK(gain >= -1e-9);
    CHECK(gain <= coalition_power(market, 15, {0, 1}).power + 2 * 10.0 * 0.05 + 1e-9);

    std::mt19937_64 rng(34);
    for (int t = 0; t < 10; ++t) {
        const auto random = test::random_market(rng, 3, 4, true);
        const double y = test::random_demand(rng, random, 0.0, random.size() - 2);
        const int i = 0;
        const int j = random.size() - 1;
        const double oracle = pair_best_response_oracle(random, y, i, j, 0.1);
        const double closed = coalition_power(random, y, {i, j}).power;
        CAPTURE(t);
        CHECK(oracle >= -tol_scale(oracle, 0.0));
        CHECK(leq_within_tol(oracle, closed + 2 * random.capacity * 0.1));
    }
}

TEST_CASE("oracle dominance and bounds") {
    std::mt19937_64 rng(35);
    const double step = 2e-3;
    for (int t = 0; t < 25; ++t) {
        const auto market = test::random_market(rng, 2, 5, true);
        const double y = test::random_demand(rng, market, 0.0, market.size() - 1);
        for (int k = 0; k < market.size(); ++k) {
            const auto best = best_response_oracle(market, y, k, step);
            const double benchmark = truthful_profit(market, y, k);
            const double add = best.sup_gain - benchmark;
            const double index = market_power_index(market, y, k);
            CAPTURE(t);
            CHECK(add >= -tol_scale(add, 0.0));
            CHECK(leq_within_tol(add, index + market.capacity * step));
            // under-reporting never certifies a strictly better response
            CHECK(best.arg_v >= market.generators[k].variable_cost - step - 1e-9);
        }
    }
}

TEST_CASE("under-reporting can strictly beat the truthful point") {
    // The deviator under-reports until it ranks first; the operator then
    // finds it cheapest to demote it to the x block while the second-ranked
    // unit runs full. The uplift pays the reported full-capacity margin but
    // the reported-minus-true gap is only charged on x units, so the profit
    // grows by (v - v~)(G - x) as the report drops. The supremum of that
    // branch still never exceeds the over-reporting route, which tops out at
    // the same case bound.
    const Market market(10.0, {GeneratorCost(20, 9),     // deviator
                               GeneratorCost(60, 4.5),   // expensive at x
                               GeneratorCost(90, 1)});   // cheap baseload
    const double y = 10.5;  // m = 2, x = 0.5

    // truthful: baseload at G, deviator takes the partial block, zero rent
    const auto truthful = economic_dispatch(market, y);
    CHECK(truthful.outputs[0] == doctest::Approx(0.5));
    CHECK(truthful.outputs[2] == doctest::Approx(10.0));
    CHECK(truthful_profit(market, y, 0) == 0.0);

    // reporting 7 instead of 9 flips the deviator into the demoted slot and
    // strictly beats the truthful profit
    const auto outcome = strategic_profit(market, y, 0, 7.0);
    CHECK(outcome.dispatch.outputs[0] == doctest::Approx(0.5));
    CHECK(outcome.profit == doctest::Approx(9.0));

    // both routes approach the closed form; the honest-side maximizer is the
    // partial-block crossing at (f_1(x) - s_0) / x = 84.5, where the index
    // tie keeps the deviator on the block
    CHECK(market_power_index(market, y, 0) == doctest::Approx(37.75));
    const auto best = best_response_oracle(market, y, 0, 1e-3);
    CHECK(best.sup_gain == doctest::Approx(37.75));
    CHECK(best.arg_v == doctest::Approx(84.5));
    CHECK(best.attained);
}

TEST_CASE("power report flags the closed-form gap on the worked market") {
    const auto market = test::worked_market();
    const auto report = analyze_market_power(market, 15, true, 1e-3);
    REQUIRE(report.oracle.has_value());
    REQUIRE(report.equality_flags.size() == 4);
    CHECK_FALSE(report.equality_flags[0]);  // oracle 0 vs closed form 5
    CHECK(report.equality_flags[1]);
    CHECK(report.equality_flags[2]);
    CHECK(report.equality_flags[3]);
    CHECK((*report.oracle)[0].additional_gain == doctest::Approx(0.0));
    CHECK((*report.oracle)[1].additional_gain == doctest::Approx(5.0));
}
